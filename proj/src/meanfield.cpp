#include "graphmf/meanfield.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

namespace graphmf {

namespace {

std::atomic<double> g_worst_sum_drift{0.0};
std::atomic<double> g_worst_min_component{1.0};

void atomic_max(std::atomic<double>& a, double v) {
    double cur = a.load(std::memory_order_relaxed);
    while (v > cur && !a.compare_exchange_weak(cur, v)) {
    }
}

void atomic_min(std::atomic<double>& a, double v) {
    double cur = a.load(std::memory_order_relaxed);
    while (v < cur && !a.compare_exchange_weak(cur, v)) {
    }
}

}  // namespace

void DriftMonitor::reset() {
    g_worst_sum_drift.store(0.0);
    g_worst_min_component.store(1.0);
}
double DriftMonitor::worst_sum_drift() { return g_worst_sum_drift.load(); }
double DriftMonitor::worst_min_component() { return g_worst_min_component.load(); }

const StepFunction& MeanFieldSolution::at_time(double t) const {
    if (times.empty()) throw std::logic_error("MeanFieldSolution: empty");
    std::size_t best = 0;
    for (std::size_t i = 1; i < times.size(); ++i)
        if (std::abs(times[i] - t) < std::abs(times[best] - t)) best = i;
    return values[best];
}

namespace {

void rhs_cell(const std::vector<double>& cells, const RateModel& model, const StepFunction& v,
              StepFunction& out, int k) {
    const int m = v.grid_size();
    const int ns = v.num_states();
    double phi[16];
    for (int s = 0; s < ns; ++s) phi[s] = 0.0;
    const double* row = cells.data() + static_cast<std::size_t>(k) * m;
    for (int l = 0; l < m; ++l) {
        const double w = row[l];
        for (int s = 0; s < ns; ++s) phi[s] += w * v.at(l, s);
    }
    for (int s = 0; s < ns; ++s) phi[s] /= m;

    for (int s = 0; s < ns; ++s) out.at(k, s) = 0.0;
    for (int from = 0; from < ns; ++from) {
        const double vf = v.at(k, from);
        for (int to = 0; to < ns; ++to) {
            if (to == from) continue;
            const double flow = model.rate(from, to, phi) * vf;
            out.at(k, to) += flow;
            out.at(k, from) -= flow;
        }
    }
}

void rhs_into(const std::vector<double>& cells, const RateModel& model, const StepFunction& v,
              StepFunction& out) {
    const int m = v.grid_size();
    // entering a parallel region once per RK stage dwarfs the row work on
    // small grids, so those stay on the calling thread entirely
    if (m >= 256) {
#pragma omp parallel for schedule(static)
        for (int k = 0; k < m; ++k) rhs_cell(cells, model, v, out, k);
    } else {
        for (int k = 0; k < m; ++k) rhs_cell(cells, model, v, out, k);
    }
}

const std::vector<double>& blockwise_cells(const GraphonKernel& kernel_disc, int m) {
    if (kernel_disc.repr() != GraphonKernel::Repr::Blockwise || kernel_disc.block_size() != m)
        throw std::invalid_argument("meanfield_rhs: kernel must be blockwise on the solution grid");
    return kernel_disc.block_values();
}

}  // namespace

StepFunction meanfield_rhs(const GraphonKernel& kernel_disc, const RateModel& model,
                           const StepFunction& v) {
    if (v.num_states() != model.num_states())
        throw std::invalid_argument("meanfield_rhs: state count mismatch");
    StepFunction out(v.grid_size(), v.state_labels());
    rhs_into(blockwise_cells(kernel_disc, v.grid_size()), model, v, out);
    return out;
}

MeanFieldSolution solve_meanfield(const GraphonKernel& kernel, const RateModel& model,
                                  const StepFunction& u0, int m, double dt, double horizon,
                                  double record_dt) {
    if (dt <= 0.0 || horizon <= 0.0 || record_dt <= 0.0)
        throw std::invalid_argument("solve_meanfield: dt, horizon and record_dt must be positive");
    if (u0.num_states() != model.num_states())
        throw std::invalid_argument("solve_meanfield: initial condition state count mismatch");
    for (int k = 0; k < u0.grid_size(); ++k) {
        double sum = 0.0;
        for (int s = 0; s < u0.num_states(); ++s) {
            if (u0.at(k, s) < -1e-9)
                throw std::invalid_argument("solve_meanfield: initial condition outside simplex");
            sum += u0.at(k, s);
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("solve_meanfield: initial condition outside simplex");
    }

    GraphonKernel disc = kernel.repr() == GraphonKernel::Repr::Blockwise && kernel.block_size() == m
                             ? kernel
                             : discretize(kernel, m);
    const std::vector<double>& cells = blockwise_cells(disc, m);

    StepFunction v = u0.on_grid(m);
    const int ns = v.num_states();
    StepFunction k1 = v, k2 = v, k3 = v, k4 = v, tmp = v;

    MeanFieldSolution sol;
    sol.grid_m = m;
    sol.labels = v.state_labels();

    const long long nsteps = static_cast<long long>(std::ceil(horizon / dt - 1e-9));
    const long long stride = std::max(1LL, static_cast<long long>(std::llround(record_dt / dt)));

    auto track_drift = [&](const StepFunction& f) {
        for (int k = 0; k < m; ++k) {
            double sum = 0.0;
            for (int s = 0; s < ns; ++s) {
                sum += f.at(k, s);
                sol.min_component = std::min(sol.min_component, f.at(k, s));
            }
            sol.max_sum_drift = std::max(sol.max_sum_drift, std::abs(sum - 1.0));
        }
    };
    auto record = [&](double t) {
        sol.times.push_back(t);
        sol.values.push_back(v);
    };

    track_drift(v);
    record(0.0);
    double t = 0.0;
    for (long long step = 0; step < nsteps; ++step) {
        const double h = std::min(dt, horizon - t);
        rhs_into(cells, model, v, k1);
        for (std::size_t i = 0; i < tmp.values().size(); ++i)
            tmp.values()[i] = v.values()[i] + 0.5 * h * k1.values()[i];
        rhs_into(cells, model, tmp, k2);
        for (std::size_t i = 0; i < tmp.values().size(); ++i)
            tmp.values()[i] = v.values()[i] + 0.5 * h * k2.values()[i];
        rhs_into(cells, model, tmp, k3);
        for (std::size_t i = 0; i < tmp.values().size(); ++i)
            tmp.values()[i] = v.values()[i] + h * k3.values()[i];
        rhs_into(cells, model, tmp, k4);
        for (std::size_t i = 0; i < v.values().size(); ++i)
            v.values()[i] += h / 6.0 * (k1.values()[i] + 2.0 * k2.values()[i] + 2.0 * k3.values()[i] +
                                        k4.values()[i]);
        t = (step + 1 == nsteps) ? horizon : t + h;
        track_drift(v);
        if ((step + 1) % stride == 0 || step + 1 == nsteps) record(t);
    }
    atomic_max(g_worst_sum_drift, sol.max_sum_drift);
    atomic_min(g_worst_min_component, sol.min_component);
    return sol;
}

SisEquilibrium sis_equilibrium_separable(const std::function<double(double)>& phi, double beta,
                                         int quadrature_m, double tol) {
    if (beta <= 0.0 || quadrature_m < 1 || tol <= 0.0)
        throw std::invalid_argument("sis_equilibrium_separable: bad arguments");
    const int m = quadrature_m;
    std::vector<double> ph(m);
    for (int l = 0; l < m; ++l) {
        ph[l] = phi(static_cast<double>(l + 1) / m);
        if (ph[l] < 0.0)
            throw std::invalid_argument("sis_equilibrium_separable: phi must be nonnegative");
    }
    auto F = [&](double k) {
        double acc = 0.0;
        for (int l = 0; l < m; ++l) acc += beta * ph[l] * ph[l] / (1.0 + beta * ph[l] * k);
        return acc / m;
    };

    SisEquilibrium eq;
    eq.g = StepFunction(m, {""});
    eq.r0 = F(0.0);
    if (eq.r0 <= 1.0) {
        eq.die_out = true;
        return eq;
    }

    double hi = 1.0;
    int guard = 0;
    while (F(hi) > 1.0) {
        hi *= 2.0;
        if (++guard > 200) throw std::runtime_error("sis_equilibrium_separable: bracketing failed");
    }
    double lo = 0.0;
    double mid = 0.5 * hi;
    for (int it = 0; it < 500; ++it) {
        mid = 0.5 * (lo + hi);
        const double f = F(mid);
        eq.residual = f - 1.0;
        if (std::abs(eq.residual) < tol) break;
        (f > 1.0 ? lo : hi) = mid;
    }
    if (std::abs(eq.residual) >= tol)
        throw std::runtime_error("sis_equilibrium_separable: bisection did not converge");
    eq.k = mid;
    for (int l = 0; l < m; ++l) eq.g.at(l) = beta * ph[l] * eq.k / (1.0 + beta * ph[l] * eq.k);
    return eq;
}

double long_run_prevalence(const GraphonKernel& kernel, double beta, int m, double horizon,
                           double dt, double u0_level) {
    RateModel model = RateModel::sis(beta);
    StepFunction u0 = StepFunction::constant_vector(m, model.states(), {1.0 - u0_level, u0_level});
    MeanFieldSolution sol = solve_meanfield(kernel, model, u0, m, dt, horizon, horizon);
    return sol.values.back().integral(model.index_of("I"));
}

StepFunction component(const StepFunction& f, int s) {
    StepFunction out(f.grid_size(), {""});
    for (int k = 0; k < f.grid_size(); ++k) out.at(k) = f.at(k, s);
    return out;
}

}  // namespace graphmf
