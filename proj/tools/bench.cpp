// Benchmark of the OpenMP kernels against their serial references. Each row
// reports wall times and the maximum elementwise deviation between the two
// implementations (expected 0 for the bit-identical pairs).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "graphmf/analysis.hpp"
#include "graphmf/meanfield.hpp"
#include "graphmf/rng.hpp"
#include "graphmf/serial_ref.hpp"
#include "graphmf/spectral.hpp"

using namespace graphmf;

namespace {

double now_ms() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

template <typename F>
double time_ms(F&& f, int reps = 3) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const double t0 = now_ms();
        f();
        best = std::min(best, now_ms() - t0);
    }
    return best;
}

void row(const std::string& name, double serial_ms, double parallel_ms, double max_diff) {
    std::printf("%-28s %10.1f ms %10.1f ms  %6.2fx   max|diff| %.3g\n", name.c_str(), serial_ms,
                parallel_ms, serial_ms / parallel_ms, max_diff);
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP not enabled\n");
#endif

    {
        GraphonKernel k = GraphonKernel::evaluable(
            [](double x, double y) { return 0.5 * (x * y + std::min(x, y)); }, true);
        StepFunction f(1200, {""});
        SplitMix64 rng(1);
        for (double& v : f.values()) v = rng.uniform();
        StepFunction ser(1, {""}), par(1, {""});
        const double ts = time_ms([&] { ser = serial::apply_operator(k, f, 1200); });
        const double tp = time_ms([&] { par = apply_operator(k, f, 1200); });
        row("apply_operator (M=1200)", ts, tp, max_abs_diff(ser.values(), par.values()));
    }

    {
        GraphonKernel k = GraphonKernel::evaluable(
            [](double x, double y) { return std::exp(-3.0 * std::abs(x - y)); }, true);
        GraphonKernel ser = GraphonKernel::constant(0.0), par = GraphonKernel::constant(0.0);
        const double ts = time_ms([&] { ser = serial::discretize(k, 1500); });
        const double tp = time_ms([&] { par = discretize(k, 1500); });
        row("discretize (M=1500)", ts, tp, max_abs_diff(ser.block_values(), par.block_values()));
    }

    {
        GraphonKernel k = GraphonKernel::constant(0.2);
        SampledGraph gs, gp;
        const double ts = time_ms(
            [&] { gs = serial::sample_graph(k, 4000, 1.0, VertexMode::grid, 7); }, 2);
        const double tp = time_ms([&] { gp = sample_graph(k, 4000, 1.0, VertexMode::grid, 7); }, 2);
        const bool same = gs.neighbors == gp.neighbors && gs.offsets == gp.offsets;
        row("sample dense (n=4000)", ts, tp, same ? 0.0 : 1.0);
    }

    {
        GraphonKernel k = GraphonKernel::product_xy();
        GraphonKernel disc = discretize(k, 800);
        RateModel model = RateModel::sis(2.0);
        StepFunction v(800, model.states());
        SplitMix64 rng(2);
        for (int c = 0; c < 800; ++c) {
            const double ui = rng.uniform();
            v.at(c, 1) = ui;
            v.at(c, 0) = 1.0 - ui;
        }
        StepFunction ser(1, model.states()), par(1, model.states());
        const double ts = time_ms([&] {
            for (int i = 0; i < 20; ++i) ser = serial::meanfield_rhs(disc, model, v);
        });
        const double tp = time_ms([&] {
            for (int i = 0; i < 20; ++i) par = meanfield_rhs(disc, model, v);
        });
        row("meanfield rhs x20 (M=800)", ts, tp, max_abs_diff(ser.values(), par.values()));
    }

    {
        GraphonKernel k = GraphonKernel::evaluable(
            [](double x, double y) { return 0.5 + 0.45 * std::cos(3.0 * (x - y)); }, true);
        double ls = 0.0, lp = 0.0;
        const double ts = time_ms([&] { ls = serial::op2_norm(k, 1200); }, 2);
        const double tp = time_ms([&] { lp = op2_norm(k, 1200); }, 2);
        row("op2 norm (M=1200)", ts, tp, std::abs(ls - lp));
    }

    {
        GraphonKernel k = GraphonKernel::product_xy();
        double vs = 0.0, vp = 0.0;
        const double ts = time_ms([&] { vs = serial::interval_cut_surrogate(k, 56); }, 2);
        const double tp = time_ms([&] { vp = graphmf::interval_cut_surrogate(k, 56); }, 2);
        // the reference sums each rectangle directly; the speedup here is
        // mostly the prefix-sum algorithm, not threading
        row("cut surrogate (M=56)", ts, tp, std::abs(vs - vp));
    }

    return 0;
}
