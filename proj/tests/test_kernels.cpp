#include <cmath>

#include "doctest.h"
#include "graphmf/kernels.hpp"
#include "graphmf/rng.hpp"

using namespace graphmf;

namespace {

GraphonKernel two_block() { return GraphonKernel::blockwise(2, {0.8, 0.2, 0.2, 0.8}); }

}  // namespace

TEST_CASE("evaluate point values") {
    CHECK(GraphonKernel::constant(0.5).evaluate(0.3, 0.7) == 0.5);
    CHECK(GraphonKernel::product_xy().evaluate(0.5, 0.5) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(two_block().evaluate(0.25, 0.75) == 0.2);
    CHECK_THROWS_AS(two_block().evaluate(1.2, 0.0), std::domain_error);
    CHECK_THROWS_AS(two_block().evaluate(0.0, -0.1), std::domain_error);
}

TEST_CASE("blockwise lookups treat grid nodes as right endpoints") {
    GraphonKernel k = two_block();
    CHECK(k.evaluate(0.5, 0.5) == 0.8);  // 1/2 belongs to the first cell
    CHECK(k.evaluate(0.0, 1.0) == 0.2);
    CHECK(k.evaluate(1.0, 1.0) == 0.8);
}

TEST_CASE("symmetry of evaluation") {
    SplitMix64 rng(42);
    auto kernels = {two_block(), GraphonKernel::product_xy(),
                    GraphonKernel::finite_rank({0.5, -0.3},
                                               {StepFunction(2, {""}, {1.0, 1.0}),
                                                StepFunction(2, {""}, {1.0, -1.0})})};
    for (const auto& k : kernels)
        for (int t = 0; t < 1000; ++t) {
            double x = rng.uniform(), y = rng.uniform();
            CHECK(k.evaluate(x, y) == k.evaluate(y, x));
        }
    GraphonKernel ev =
        GraphonKernel::evaluable([](double x, double y) { return 0.5 * (x + y) * x * y; }, true);
    for (int t = 0; t < 1000; ++t) {
        double x = rng.uniform(), y = rng.uniform();
        CHECK(ev.evaluate(x, y) == doctest::Approx(ev.evaluate(y, x)).epsilon(1e-15));
    }
}

TEST_CASE("unit-range violations are construction errors") {
    CHECK_THROWS_AS(GraphonKernel::blockwise(1, {1.5}), std::invalid_argument);
    CHECK_THROWS_AS(GraphonKernel::blockwise(2, {0.1, -0.2, -0.2, 0.1}), std::invalid_argument);
    CHECK_NOTHROW(GraphonKernel::blockwise(1, {1.5}, false));
    CHECK_THROWS_AS(GraphonKernel::blockwise(2, {0.1, 0.2, 0.3, 0.1}), std::invalid_argument);  // asymmetric
    CHECK_THROWS_AS(GraphonKernel::separable_poly({2.0}), std::invalid_argument);  // phi^2 = 4
    CHECK(GraphonKernel::constant(0.7).unit_range());
    CHECK_FALSE(GraphonKernel::constant(1.5).unit_range());
}

TEST_CASE("apply_operator: constant kernel averages") {
    StepFunction f(4, {""}, {0.1, 0.9, 0.5, 0.1});  // integral 0.4
    StepFunction g = apply_operator(GraphonKernel::constant(1.0), f, 8);
    for (int k = 0; k < 8; ++k) CHECK(g.at(k) == doctest::Approx(0.4).epsilon(1e-14));
}

TEST_CASE("apply_operator: separable analytic") {
    StepFunction one = StepFunction::constant(1, 1.0);
    StepFunction g = apply_operator(GraphonKernel::product_xy(), one, 1000);
    double max_err = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const double x = (k + 0.5) / 1000.0;
        max_err = std::max(max_err, std::abs(g.at(k) - x / 2.0));
    }
    CHECK(max_err <= 1e-3);
}

TEST_CASE("apply_operator: blockwise matches hand quadrature") {
    StepFunction f(2, {""}, {1.0, 0.0});
    StepFunction g = apply_operator(two_block(), f, 2);
    CHECK(g.at(0) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(g.at(1) == doctest::Approx(0.1).epsilon(1e-15));

    // independent midpoint-quadrature oracle on a fine grid
    const int fine = 200;
    for (int cell = 0; cell < 2; ++cell) {
        const double x = cell == 0 ? 0.25 : 0.75;
        double acc = 0.0;
        for (int l = 0; l < fine; ++l) {
            const double y = (l + 0.5) / fine;
            acc += two_block().evaluate(x, y) * f.value_at(y);
        }
        CHECK(g.at(cell) == doctest::Approx(acc / fine).epsilon(1e-12));
    }
}

TEST_CASE("apply_operator: linearity and positivity") {
    SplitMix64 rng(7);
    std::vector<double> cells(25);
    std::vector<double> sym(25);
    for (int i = 0; i < 5; ++i)
        for (int j = i; j < 5; ++j) sym[i * 5 + j] = sym[j * 5 + i] = rng.uniform();
    GraphonKernel k = GraphonKernel::blockwise(5, sym);

    StepFunction f(10, {"a", "b"}), g(10, {"a", "b"});
    for (auto* fn : {&f, &g})
        for (double& v : fn->values()) v = rng.uniform();

    const double alpha = 0.7, beta = -1.3;
    StepFunction lhs = apply_operator(k, alpha * f + beta * g, 10);
    StepFunction rhs = alpha * apply_operator(k, f, 10) + beta * apply_operator(k, g, 10);
    for (std::size_t i = 0; i < lhs.values().size(); ++i)
        CHECK(lhs.values()[i] == doctest::Approx(rhs.values()[i]).epsilon(1e-13));

    StepFunction pos = apply_operator(k, f, 10);
    for (double v : pos.values()) CHECK(v >= -1e-15);
}

TEST_CASE("apply_operator rejects bad quadrature grid") {
    CHECK_THROWS_AS(apply_operator(two_block(), StepFunction::constant(2, 1.0), 0), std::domain_error);
}

TEST_CASE("degree function") {
    StepFunction d = degree_function(GraphonKernel::constant(0.3), 5);
    for (int k = 0; k < 5; ++k) CHECK(d.at(k) == doctest::Approx(0.3).epsilon(1e-15));

    StepFunction dx = degree_function(GraphonKernel::product_xy(), 100);
    for (int k = 0; k < 100; ++k) {
        const double x = (k + 0.5) / 100.0;
        CHECK(std::abs(dx.at(k) - x / 2.0) <= 0.5 / 100.0);
    }
}

TEST_CASE("discretize point samples") {
    GraphonKernel c4 = discretize(GraphonKernel::constant(0.25), 4);
    for (double v : c4.block_values()) CHECK(v == 0.25);

    GraphonKernel xy2 = discretize(GraphonKernel::product_xy(), 2);
    const auto& cells = xy2.block_values();
    CHECK(cells[0] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(cells[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(cells[2] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(cells[3] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("discretize is idempotent on matching grids") {
    GraphonKernel k = two_block();
    GraphonKernel d2 = discretize(k, 2);
    CHECK(d2.block_values() == k.block_values());
    GraphonKernel d4 = discretize(k, 4);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            CHECK(d4.block_values()[a * 4 + b] == k.block_values()[(a / 2) * 2 + (b / 2)]);
}

TEST_CASE("discretize of a Lipschitz kernel stays within L/M") {
    // |xy - x'y'| <= |x-x'| + |y-y'| on the unit square, so L_W = 2
    for (int m : {5, 10, 20}) {
        const double d = delta_m(GraphonKernel::product_xy(), m, 10 * m);
        CHECK(d > 0.0);
        CHECK(d <= 2.0 / m);
    }
}

TEST_CASE("delta_m examples and grid-max oracle") {
    CHECK(delta_m(GraphonKernel::constant(0.6), 3, 30) == 0.0);
    CHECK(delta_m(two_block(), 2, 20) == 0.0);  // idempotence

    const int m = 10, probe = 1000;
    const double d = delta_m(GraphonKernel::product_xy(), m, probe);
    GraphonKernel disc = discretize(GraphonKernel::product_xy(), m);
    double oracle = 0.0;
    for (int i = 0; i < probe; ++i)
        for (int j = 0; j < probe; ++j) {
            const double x = (i + 0.5) / probe, y = (j + 0.5) / probe;
            oracle = std::max(oracle, std::abs(disc.evaluate(x, y) - x * y));
        }
    CHECK(d == oracle);
    CHECK(d <= 0.2);

    // monotone nondecreasing along nested probe grids (odd refinement ratios
    // keep midpoint grids nested)
    const double d100 = delta_m(GraphonKernel::product_xy(), m, 100);
    const double d300 = delta_m(GraphonKernel::product_xy(), m, 300);
    const double d900 = delta_m(GraphonKernel::product_xy(), m, 900);
    CHECK(d100 <= d300);
    CHECK(d300 <= d900);
    CHECK_THROWS_AS(delta_m(GraphonKernel::product_xy(), 10, 5), std::invalid_argument);
}

TEST_CASE("kernel norm chain on unit-range kernels") {
    for (const auto& k : {GraphonKernel::constant(0.3), GraphonKernel::product_xy(), two_block()}) {
        const double l1 = kernel_l1_norm(k, 200);
        const double l2 = kernel_l2_norm(k, 200);
        CHECK(l1 <= l2 + 1e-9);
        CHECK(l2 <= std::sqrt(l1) + 1e-9);
        CHECK(l2 <= 1.0 + 1e-9);
    }
    CHECK(kernel_l1_norm(GraphonKernel::product_xy(), 400) == doctest::Approx(0.25).epsilon(1e-4));
    CHECK(kernel_l2_norm(GraphonKernel::product_xy(), 400) == doctest::Approx(1.0 / 3.0).epsilon(1e-4));
}

TEST_CASE("separable kernel from a step-function factor") {
    StepFunction phi(2, {""}, {0.4, 0.8});
    GraphonKernel k = GraphonKernel::separable_step(phi);
    CHECK(k.evaluate(0.1, 0.9) == doctest::Approx(0.32).epsilon(1e-15));
    CHECK(k.max_abs() == doctest::Approx(0.64).epsilon(1e-15));
    CHECK(k.max_is_exact());
    // grid nodes follow the kernel cell convention
    CHECK(k.evaluate(0.5, 0.5) == doctest::Approx(0.16).epsilon(1e-15));
    GraphonKernel disc = discretize(k, 2);
    CHECK(disc.block_values()[0] == doctest::Approx(0.16).epsilon(1e-15));
    CHECK(disc.block_values()[3] == doctest::Approx(0.64).epsilon(1e-15));

    StepFunction vec(2, {"a", "b"});
    CHECK_THROWS_AS(GraphonKernel::separable_step(vec), std::invalid_argument);
}

TEST_CASE("kernel JSON and shorthand specs") {
    GraphonKernel k = GraphonKernel::from_spec("constant:0.5");
    CHECK(k.evaluate(0.1, 0.9) == 0.5);

    GraphonKernel b = GraphonKernel::from_spec("blockwise:0.8,0.2,0.2,0.8");
    CHECK(b.block_size() == 2);
    CHECK(b.evaluate(0.25, 0.75) == 0.2);

    GraphonKernel p = GraphonKernel::from_spec("separable_poly:0,1");
    CHECK(p.evaluate(0.5, 0.5) == doctest::Approx(0.25).epsilon(1e-15));

    nlohmann::json j = {{"type", "finite_rank"},
                        {"grid", 2},
                        {"terms", {{{"lambda", 0.5}, {"values", {1.0, 1.0}}}}}};
    GraphonKernel fr = GraphonKernel::from_json(j);
    CHECK(fr.evaluate(0.2, 0.9) == doctest::Approx(0.5).epsilon(1e-15));

    GraphonKernel round = GraphonKernel::from_json(b.to_json());
    CHECK(round.block_values() == b.block_values());

    CHECK_THROWS_AS(GraphonKernel::from_spec("no_such_kernel:1"), std::invalid_argument);
    CHECK_THROWS_AS(GraphonKernel::from_json(nlohmann::json{{"type", "bogus"}}), std::invalid_argument);
}
