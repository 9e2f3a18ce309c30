#pragma once

#include <functional>
#include <vector>

#include "graphmf/dynamics.hpp"
#include "graphmf/kernels.hpp"

namespace graphmf {

/// Solution of the discretized mean-field system dv_k/dt = Q(Wv)_k v_k.
struct MeanFieldSolution {
    int grid_m = 0;
    std::vector<std::string> labels;
    std::vector<double> times;
    std::vector<StepFunction> values;
    /// Simplex drift observed across every integration step (not only the
    /// recorded ones): max |per-cell component sum - 1| and min component.
    double max_sum_drift = 0.0;
    double min_component = 1.0;

    const StepFunction& at_time(double t) const;  // nearest recorded time
};

/// Right-hand side Q((1/M) sum_l W_kl v_l) v_k per cell; kernel_disc must be
/// blockwise on the same grid as v. Output component sums vanish per cell.
StepFunction meanfield_rhs(const GraphonKernel& kernel_disc, const RateModel& model,
                           const StepFunction& v);

/// Classical fixed-step 4th-order integration. Initial cells are the averages
/// of u0 over each cell. No projection is applied; drift is only monitored.
MeanFieldSolution solve_meanfield(const GraphonKernel& kernel, const RateModel& model,
                                  const StepFunction& u0, int m, double dt, double horizon,
                                  double record_dt);

struct SisEquilibrium {
    bool die_out = false;
    double k = 0.0;          // solution of the scalar fixed-point equation
    StepFunction g;          // endemic equilibrium on the quadrature grid (zero if die_out)
    double r0 = 0.0;         // beta * ||phi||_2^2 on the quadrature grid
    double residual = 0.0;
};

/// Endemic equilibrium g(x) = beta*phi(x)*k / (1 + beta*phi(x)*k) of the SIS
/// dynamics on a separable kernel phi(x)phi(y), with k solving
/// 1 = (1/M) sum_l beta*phi_l^2 / (1 + beta*phi_l*k) by bisection (the right
/// side is strictly decreasing in k). phi is sampled at the grid nodes l/M,
/// matching the kernel discretization, so the result is the exact fixed point
/// of the discretized system. Returns die_out when beta*||phi||_2^2 <= 1.
SisEquilibrium sis_equilibrium_separable(const std::function<double(double)>& phi, double beta,
                                         int quadrature_m, double tol);

/// Integral of the infected component at the horizon, starting from the
/// constant profile u_I(0) = u0_level.
double long_run_prevalence(const GraphonKernel& kernel, double beta, int m, double horizon,
                           double dt, double u0_level = 0.01);

/// Scalar component s of a vector-valued step function.
StepFunction component(const StepFunction& f, int s);

/// Process-wide extremes of the simplex drift over every solve since the
/// last reset. Verification harnesses use this to check that no mean-field
/// run anywhere in a suite left the simplex beyond tolerance.
struct DriftMonitor {
    static void reset();
    static double worst_sum_drift();
    static double worst_min_component();
};

}  // namespace graphmf
