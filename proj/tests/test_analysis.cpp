#include <cmath>

#include "doctest.h"
#include "graphmf/analysis.hpp"
#include "graphmf/rng.hpp"
#include "graphmf/serial_ref.hpp"
#include "graphmf/spectral.hpp"

using namespace graphmf;

namespace {

// independent enumeration oracle: every grid-aligned interval, cells summed
// directly per component
double interval_norm_bruteforce(const StepFunction& f) {
    const int m = f.grid_size();
    double total = 0.0;
    for (int s = 0; s < f.num_states(); ++s) {
        double best = 0.0;
        for (int a = 0; a < m; ++a)
            for (int b = a + 1; b <= m; ++b) {
                double acc = 0.0;
                for (int k = a; k < b; ++k) acc += f.at(k, s) / m;
                best = std::max(best, std::abs(acc));
            }
        total += best;
    }
    return total;
}

}  // namespace

TEST_CASE("interval norm closed cases") {
    CHECK(interval_norm(StepFunction::constant(7, 0.0)) == 0.0);
    CHECK(interval_norm(StepFunction::constant(5, -0.7)) == doctest::Approx(0.7).epsilon(1e-15));

    StepFunction f(2, {""}, {1.0, -1.0});
    CHECK(interval_norm(f) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(interval_norm_bruteforce(f) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("interval norm equals brute-force enumeration exactly") {
    // dyadic cell values on power-of-two grids keep every partial sum exact,
    // so the two summation routes must agree bit for bit
    SplitMix64 rng(2024);
    const int pow2_grids[] = {2, 4, 8, 16, 32};
    for (int trial = 0; trial < 200; ++trial) {
        const int m = pow2_grids[rng.below(5)];
        const int ns = 1 + static_cast<int>(rng.below(3));
        std::vector<std::string> labels;
        for (int s = 0; s < ns; ++s) labels.push_back(std::string(1, static_cast<char>('a' + s)));
        StepFunction f(m, labels);
        for (double& v : f.values())
            v = (static_cast<double>(rng.below(129)) - 64.0) / 64.0;
        CHECK(interval_norm(f) == interval_norm_bruteforce(f));
    }
    // arbitrary grids agree to roundoff
    for (int trial = 0; trial < 100; ++trial) {
        const int m = 1 + static_cast<int>(rng.below(50));
        StepFunction f(m, {""});
        for (double& v : f.values()) v = 2.0 * rng.uniform() - 1.0;
        CHECK(interval_norm(f) == doctest::Approx(interval_norm_bruteforce(f)).epsilon(1e-12));
    }
}

TEST_CASE("interval norm vs l1: bound and single-sign equality") {
    SplitMix64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const int m = 1 + static_cast<int>(rng.below(30));
        StepFunction f(m, {""}), zero(m, {""});
        for (double& v : f.values()) v = 2.0 * rng.uniform() - 1.0;
        CHECK(interval_norm(f) <= l1_distance(f, zero) + 1e-12);
        for (double& v : f.values()) v = std::abs(v);
        CHECK(interval_norm(f) == doctest::Approx(l1_distance(f, zero)).epsilon(1e-13));
    }
}

TEST_CASE("l1 distance") {
    StepFunction f(3, {""}, {0.3, -1.0, 2.0});
    CHECK(l1_distance(f, f) == 0.0);
    CHECK(l1_distance(StepFunction::constant(4, 1.0), StepFunction::constant(4, 0.0)) ==
          doctest::Approx(1.0).epsilon(1e-15));

    StepFunction a(2, {"x", "y"}, {1.0, 0.0, 0.0, 1.0});
    StepFunction b = StepFunction::constant_vector(2, {"x", "y"}, {0.5, 0.5});
    CHECK(l1_distance(a, b) == doctest::Approx(1.0).epsilon(1e-15));

    // mismatched grids refine to the common one
    StepFunction c2(2, {""}, {1.0, 0.0});
    StepFunction c3(3, {""}, {1.0, 0.0, 0.0});
    // refined to 6 cells: |1-1|,|1-1|,|1-0|,|0-0|x3 -> 1/6
    CHECK(l1_distance(c2, c3) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));

    StepFunction other(2, {"z"}, {0.0, 0.0});
    CHECK_THROWS_AS(l1_distance(c2, other), std::invalid_argument);
}

TEST_CASE("interval cut surrogate") {
    CHECK(interval_cut_surrogate(GraphonKernel::constant(0.0), 10) == 0.0);
    CHECK(interval_cut_surrogate(GraphonKernel::constant(0.4), 17) ==
          doctest::Approx(0.4).epsilon(1e-13));

    // nonnegative kernel: maximized by the full square; value is the
    // right-endpoint quadrature of the integral
    const int m = 40;
    const double v = interval_cut_surrogate(GraphonKernel::product_xy(), m);
    const double grid_exact = std::pow((m + 1.0) / (2.0 * m), 2.0);
    CHECK(v == doctest::Approx(grid_exact).epsilon(1e-12));
    CHECK(std::abs(v - 0.25) <= 1.0 / m);

    // signed kernel: best rectangle is a single block
    GraphonKernel signed_k = GraphonKernel::blockwise(2, {0.5, -0.5, -0.5, 0.5}, false);
    CHECK(interval_cut_surrogate(signed_k, 2) == doctest::Approx(0.125).epsilon(1e-15));
}

TEST_CASE("cut surrogate coarse-to-fine matches the known optimum") {
    const int m = 100;  // beyond the exhaustive-scan cutoff
    const double v = interval_cut_surrogate(GraphonKernel::product_xy(), m);
    const double grid_exact = std::pow((m + 1.0) / (2.0 * m), 2.0);
    CHECK(v == doctest::Approx(grid_exact).epsilon(1e-12));
}

TEST_CASE("cut surrogate is bounded by the operator norm") {
    // surrogate <= cut norm <= op2 norm
    for (const auto& k : {GraphonKernel::constant(0.7), GraphonKernel::product_xy(),
                          GraphonKernel::blockwise(2, {0.8, 0.2, 0.2, 0.8}),
                          GraphonKernel::blockwise(2, {0.0, 0.8, 0.8, 0.0})}) {
        CHECK(interval_cut_surrogate(k, 40) <= op2_norm(k, 400) + 1e-6);
    }
}
