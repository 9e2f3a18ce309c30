#include "graphmf/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace graphmf {

double interval_norm(const StepFunction& f) {
    const int m = f.grid_size();
    double total = 0.0;
    for (int s = 0; s < f.num_states(); ++s) {
        double prefix = 0.0, lo = 0.0, hi = 0.0;  // extrema include F_0 = 0
        for (int k = 0; k < m; ++k) {
            prefix += f.at(k, s) / m;
            lo = std::min(lo, prefix);
            hi = std::max(hi, prefix);
        }
        total += hi - lo;
    }
    return total;
}

double l1_distance(const StepFunction& f, const StepFunction& g) {
    if (f.state_labels() != g.state_labels())
        throw std::invalid_argument("l1_distance: component mismatch");
    const int w = common_grid(f.grid_size(), g.grid_size());
    StepFunction fw = f.on_grid(w), gw = g.on_grid(w);
    double acc = 0.0;
    for (std::size_t i = 0; i < fw.values().size(); ++i)
        acc += std::abs(fw.values()[i] - gw.values()[i]);
    return acc / w;
}

namespace {

// max |sum over index rectangle| / m^2 via 2-D prefix sums; each of the four
// boundary coordinates scans its own [lo, hi] range with the given stride
struct CoordRange {
    int lo = 0;
    int hi = 0;
};

double scan_rectangles(const std::vector<double>& prefix, int m, int stride,
                       const std::array<CoordRange, 4>& range, std::array<int, 4>* best_out) {
    const int mp = m + 1;
    auto P = [&](int a, int b) { return prefix[static_cast<std::size_t>(a) * mp + b]; };
    double best = 0.0;
    std::array<int, 4> arg{0, 0, 0, 0};
    for (int a1 = range[0].lo; a1 <= range[0].hi; a1 += stride)
        for (int b1 = std::max(a1 + 1, range[1].lo); b1 <= range[1].hi; b1 += stride)
            for (int a2 = range[2].lo; a2 <= range[2].hi; a2 += stride)
                for (int b2 = std::max(a2 + 1, range[3].lo); b2 <= range[3].hi; b2 += stride) {
                    const double v = std::abs(P(b1, b2) - P(a1, b2) - P(b1, a2) + P(a1, a2));
                    if (v > best) {
                        best = v;
                        arg = {a1, b1, a2, b2};
                    }
                }
    if (best_out) *best_out = arg;
    return best / (static_cast<double>(m) * m);
}

}  // namespace

double interval_cut_surrogate(const GraphonKernel& kernel, int m) {
    if (m < 1) throw std::invalid_argument("interval_cut_surrogate: grid must be positive");
    if (m > 2048) throw std::invalid_argument("interval_cut_surrogate: grid too large");
    GraphonKernel disc = discretize(kernel, m);
    const auto& cells = disc.block_values();
    const int mp = m + 1;
    std::vector<double> prefix(static_cast<std::size_t>(mp) * mp, 0.0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            prefix[static_cast<std::size_t>(i + 1) * mp + (j + 1)] =
                prefix[static_cast<std::size_t>(i) * mp + (j + 1)] +
                prefix[static_cast<std::size_t>(i + 1) * mp + j] -
                prefix[static_cast<std::size_t>(i) * mp + j] +
                cells[static_cast<std::size_t>(i) * m + j];

    const std::array<CoordRange, 4> full{CoordRange{0, m}, {0, m}, {0, m}, {0, m}};
    if (m <= 60) return scan_rectangles(prefix, m, 1, full, nullptr);
    const int stride = (m + 59) / 60;
    std::array<int, 4> coarse;
    scan_rectangles(prefix, m, stride, full, &coarse);
    std::array<CoordRange, 4> window;
    for (int c = 0; c < 4; ++c)
        window[c] = {std::max(0, coarse[c] - stride), std::min(m, coarse[c] + stride)};
    double refined = scan_rectangles(prefix, m, 1, window, nullptr);
    return refined;
}

TrajectoryComparison compare_trajectories(const Trajectory& sim, const MeanFieldSolution& mf) {
    if (sim.grid_m != mf.grid_m) throw std::invalid_argument("compare_trajectories: grid mismatch");
    if (sim.labels != mf.labels) throw std::invalid_argument("compare_trajectories: state mismatch");
    if (sim.times.empty() || mf.times.empty())
        throw std::invalid_argument("compare_trajectories: empty trajectory");
    TrajectoryComparison cmp;
    for (std::size_t i = 0; i < sim.times.size(); ++i) {
        const double t = sim.times[i];
        std::size_t j = 0;
        for (std::size_t c = 1; c < mf.times.size(); ++c)
            if (std::abs(mf.times[c] - t) < std::abs(mf.times[j] - t)) j = c;
        StepFunction diff = sim.box_density[i] - mf.values[j];
        cmp.times.push_back(t);
        cmp.interval_norm_gap.push_back(interval_norm(diff));
        cmp.l1_gap.push_back(l1_distance(sim.box_density[i], mf.values[j]));
    }
    cmp.sup_gap = *std::max_element(cmp.interval_norm_gap.begin(), cmp.interval_norm_gap.end());
    return cmp;
}

}  // namespace graphmf
