#pragma once

#include <vector>

#include "graphmf/dynamics.hpp"
#include "graphmf/kernels.hpp"
#include "graphmf/meanfield.hpp"

namespace graphmf {

/// Interval norm sup_I |int_I f| per component, summed over components.
/// Exact for step functions: the prefix integral is piecewise linear, so the
/// sup is attained at grid nodes and equals max_j F_j - min_j F_j with both
/// extrema over j in {0..M}.
double interval_norm(const StepFunction& f);

/// L1 distance after refinement to a common grid, summed over components.
double l1_distance(const StepFunction& f, const StepFunction& g);

/// Cut-norm surrogate restricted to intervals aligned to the m grid: a lower
/// bound on the true cut norm. Exhaustive O(m^4) scan via 2-D prefix sums up
/// to m = 60, coarse-to-fine refinement above.
double interval_cut_surrogate(const GraphonKernel& kernel, int m);

struct TrajectoryComparison {
    std::vector<double> times;
    std::vector<double> interval_norm_gap;
    std::vector<double> l1_gap;
    double sup_gap = 0.0;  // sup over times of the interval-norm gap
};

/// Gap series between a simulated box-aggregated trajectory and a mean-field
/// solution on the same grid; times matched to the nearest recorded instant.
TrajectoryComparison compare_trajectories(const Trajectory& sim, const MeanFieldSolution& mf);

}  // namespace graphmf
