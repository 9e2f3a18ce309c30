#include <cmath>

#include "doctest.h"
#include "graphmf/dynamics.hpp"

using namespace graphmf;

namespace {

SampledGraph complete_graph(std::uint32_t n, std::uint64_t seed = 1) {
    return sample_graph(GraphonKernel::constant(1.0), n, 1.0, VertexMode::grid, seed);
}

}  // namespace

TEST_CASE("rate model presets and coefficients") {
    RateModel sis = RateModel::sis(2.0);
    CHECK(sis.num_states() == 2);
    const double phi[2] = {0.3, 0.5};
    CHECK(sis.rate(sis.index_of("S"), sis.index_of("I"), phi) == doctest::Approx(1.0));  // beta*phi_I
    CHECK(sis.rate(sis.index_of("I"), sis.index_of("S"), phi) == doctest::Approx(1.0));
    CHECK(sis.lipschitz(sis.index_of("S"), sis.index_of("I")) == doctest::Approx(2.0));
    CHECK(sis.total_outflow(sis.index_of("I"), phi) == doctest::Approx(1.0));

    RateModel sir = RateModel::sir(1.5);
    CHECK(sir.num_states() == 3);
    const double phi3[3] = {0.3, 0.5, 0.1};
    CHECK(sir.rate(sir.index_of("I"), sir.index_of("R"), phi3) == doctest::Approx(1.0));
    CHECK(sir.rate(sir.index_of("S"), sir.index_of("I"), phi3) == doctest::Approx(0.75));

    CHECK_THROWS_AS(RateModel::sis(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(RateModel({"x"}, std::vector<double>{}, std::vector<double>{}), std::invalid_argument);

    // derived constants: Lipschitz bound 2*max row sum of interaction
    // coefficients, rate bound over the simplex
    RateModel s2 = RateModel::sis(2.0);
    CHECK(s2.lipschitz_bound() == doctest::Approx(4.0));
    CHECK(s2.qmax_bound() == doctest::Approx(4.0));  // 2 * max over rows of (base + peak coeff)
}

TEST_CASE("rate model JSON round trip") {
    RateModel m = RateModel::sis(2.5);
    RateModel back = RateModel::from_json(m.to_json());
    CHECK(back.states() == m.states());
    const double phi[2] = {0.0, 0.4};
    CHECK(back.rate(0, 1, phi) == m.rate(0, 1, phi));

    RateModel spec = RateModel::from_spec("sis:2.5");
    CHECK(spec.rate(0, 1, phi) == m.rate(0, 1, phi));
    CHECK_THROWS_AS(RateModel::from_spec("nope"), std::invalid_argument);
}

TEST_CASE("sum tree sampling and updates") {
    SumTree t;
    t.init({1.0, 0.0, 3.0, 0.0, 2.0});
    CHECK(t.total() == doctest::Approx(6.0));
    CHECK(t.sample(0.0) == 0);
    CHECK(t.sample(0.999999) == 4);
    CHECK(t.sample(0.3) == 2);  // target 1.8 falls in the third leaf
    t.update(2, 0.0);
    CHECK(t.total() == doctest::Approx(3.0));
    CHECK(t.sample(0.5) == 4);
}

TEST_CASE("initial environment counts and rates on K2") {
    SampledGraph g = complete_graph(2);
    RateModel model = RateModel::sis(2.0);
    ProcessState st = ProcessState::init(
        g, model, InitialCondition::explicit_states({model.index_of("I"), model.index_of("I")}), 9);
    // both infected: phi_I = 1/(N kappa) = 1/2 per vertex, each can only recover
    CHECK(st.phi(0, model.index_of("I")) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(st.phi(1, model.index_of("I")) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(st.total_rate() == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(st.phi_l1(0) == doctest::Approx(g.degree(0) / (2.0 * g.kappa)).epsilon(1e-15));
}

TEST_CASE("all susceptible SIS is absorbed immediately") {
    SampledGraph g = complete_graph(4);
    RateModel model = RateModel::sis(2.0);
    ProcessState st = ProcessState::init(g, model, InitialCondition::explicit_states({0, 0, 0, 0}), 3);
    CHECK(st.total_rate() == 0.0);
    CHECK_FALSE(st.step().has_value());
    for (std::uint32_t i = 0; i < 4; ++i) CHECK(st.phi(i, model.index_of("I")) == 0.0);
}

TEST_CASE("zero model is absorbed with any state") {
    SampledGraph g = complete_graph(3);
    RateModel model = RateModel::zero({"S", "I"});
    ProcessState st = ProcessState::init(g, model, InitialCondition::explicit_states({1, 0, 1}), 3);
    CHECK_FALSE(st.step().has_value());
    Trajectory traj = run(st, 2.0, 3, 0.5);
    CHECK(traj.times.size() == 5);
    for (std::size_t t = 1; t < traj.times.size(); ++t) {
        CHECK(traj.box_density[t].values() == traj.box_density[0].values());
        CHECK(traj.state_density[t] == traj.state_density[0]);
    }
}

TEST_CASE("single infected vertex with beta=0 recovers exactly once") {
    SampledGraph g = complete_graph(2);
    RateModel model = RateModel::sis(0.0);
    ProcessState st = ProcessState::init(g, model, InitialCondition::explicit_states({1, 0}), 11);
    auto ev = st.step();
    REQUIRE(ev.has_value());
    CHECK(ev->vertex == 0);
    CHECK(ev->from == 1);
    CHECK(ev->to == 0);
    CHECK(ev->time > 0.0);
    CHECK_FALSE(st.step().has_value());
}

TEST_CASE("sojourn time of a unit-rate clock") {
    // single isolated vertex, I -> S at rate 1: mean of 1e4 draws within 3 sigma
    SampledGraph g = sample_graph(GraphonKernel::constant(0.0), 1, 1.0, VertexMode::grid, 1);
    RateModel model = RateModel::sis(0.0);
    double acc = 0.0;
    const int runs = 10000;
    for (int r = 0; r < runs; ++r) {
        ProcessState st =
            ProcessState::init(g, model, InitialCondition::explicit_states({1}), 1000 + r);
        acc += st.step()->time;
    }
    CHECK(std::abs(acc / runs - 1.0) <= 3.0 / std::sqrt(static_cast<double>(runs)));
}

TEST_CASE("iid initial condition draws from the density") {
    SampledGraph g = complete_graph(2);
    RateModel model = RateModel::sis(1.0);
    StepFunction u0 = StepFunction::constant_vector(1, model.states(), {0.5, 0.5});
    ProcessState st = ProcessState::init(g, model, InitialCondition::iid(u0), 4);
    for (auto s : st.vertex_states()) CHECK(s <= 1);

    StepFunction bad = StepFunction::constant_vector(1, model.states(), {0.7, 0.7});
    CHECK_THROWS_AS(ProcessState::init(g, model, InitialCondition::iid(bad), 4),
                    std::invalid_argument);
}

TEST_CASE("degree-zero initial condition marks isolated vertices") {
    SampledGraph g = sample_graph(GraphonKernel::constant(1.0), 200, 1.0 / 200.0, VertexMode::grid, 6);
    RateModel model = RateModel::sis(2.0);
    const int s_i = model.index_of("I"), s_s = model.index_of("S");
    ProcessState st = ProcessState::init(g, model, InitialCondition::degree_zero(s_i, s_s), 6);
    for (std::uint32_t i = 0; i < g.n; ++i)
        CHECK(static_cast<int>(st.vertex_states()[i]) == (g.degree(i) == 0 ? s_i : s_s));
}

TEST_CASE("degree-zero infected fraction matches exp(-lambda) at scale") {
    const std::uint32_t n = 100000;
    SampledGraph g = sample_graph(GraphonKernel::constant(1.0), n, 1.0 / n, VertexMode::grid, 42);
    RateModel model = RateModel::sis(2.0);
    ProcessState st = ProcessState::init(
        g, model, InitialCondition::degree_zero(model.index_of("I"), model.index_of("S")), 42);
    const double frac = st.state_density()[model.index_of("I")];
    CHECK(std::abs(frac - std::exp(-1.0)) <= 0.005);
}

TEST_CASE("pure recovery decays like exp(-t)") {
    const std::uint32_t n = 10000;
    SampledGraph g = sample_graph(GraphonKernel::constant(1.0), n, 1.0 / n, VertexMode::grid, 17);
    RateModel model = RateModel::sis(0.0);
    std::vector<int> all_infected(n, model.index_of("I"));
    ProcessState st = ProcessState::init(g, model, InitialCondition::explicit_states(all_infected), 17);
    Trajectory traj = run(st, 3.0, 1, 0.1);
    for (std::size_t t = 0; t < traj.times.size(); ++t) {
        const double expected = std::exp(-traj.times[t]);
        CHECK(std::abs(traj.state_density[t][model.index_of("I")] - expected) <= 0.02);
    }
}

TEST_CASE("state density is conserved at recorded times") {
    SampledGraph g = sample_graph(GraphonKernel::constant(0.5), 300, 1.0, VertexMode::grid, 23);
    RateModel model = RateModel::sis(2.0);
    StepFunction u0 = StepFunction::constant_vector(1, model.states(), {0.7, 0.3});
    ProcessState st = ProcessState::init(g, model, InitialCondition::iid(u0), 23);
    Trajectory traj = run(st, 2.0, 10, 0.25);
    for (const auto& dens : traj.state_density) {
        // exact integer counts over n = 300: the sum rounds to exactly 1
        CHECK(std::abs(dens[0] + dens[1] - 1.0) <= 1e-15);
    }
    // box values follow the M/n normalization and integrate to ~1 per state sum
    for (const auto& f : traj.box_density) {
        double total = 0.0;
        for (int k = 0; k < f.grid_size(); ++k)
            for (int s = 0; s < f.num_states(); ++s) total += f.at(k, s) / f.grid_size();
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("incremental rates match a full recomputation after many events") {
    SampledGraph g = sample_graph(GraphonKernel::constant(0.5), 1000, 1.0, VertexMode::grid, 31);
    RateModel model = RateModel::sis(3.0);
    StepFunction u0 = StepFunction::constant_vector(1, model.states(), {0.5, 0.5});
    ProcessState st = ProcessState::init(g, model, InitialCondition::iid(u0), 31);
    int events = 0;
    for (; events < 100000; ++events)
        if (!st.step()) break;
    CHECK(events == 100000);  // supercritical run should not absorb
    auto c = st.consistency();
    CHECK(c.max_rate_rel_err < 1e-9);
    CHECK(c.tree_rel_err < 1e-9);
}

TEST_CASE("identical seeds give identical event sequences") {
    SampledGraph g = sample_graph(GraphonKernel::constant(0.4), 200, 1.0, VertexMode::grid, 77);
    RateModel model = RateModel::sis(2.0);
    StepFunction u0 = StepFunction::constant_vector(1, model.states(), {0.6, 0.4});

    auto run_one = [&](std::uint64_t seed) {
        ProcessState st = ProcessState::init(g, model, InitialCondition::iid(u0), seed);
        std::vector<TransitionEvent> events;
        for (int i = 0; i < 500; ++i) {
            auto ev = st.step();
            if (!ev) break;
            events.push_back(*ev);
        }
        return events;
    };
    auto a = run_one(5), b = run_one(5), c = run_one(6);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].time == b[i].time);
        CHECK(a[i].vertex == b[i].vertex);
        CHECK(a[i].from == b[i].from);
        CHECK(a[i].to == b[i].to);
    }
    bool differs = c.size() != a.size();
    for (std::size_t i = 0; !differs && i < a.size(); ++i) differs = a[i].time != c[i].time;
    CHECK(differs);
}

TEST_CASE("init validation") {
    SampledGraph g = complete_graph(3);
    RateModel model = RateModel::sis(1.0);
    CHECK_THROWS_AS(ProcessState::init(g, model, InitialCondition::explicit_states({0, 1}), 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(ProcessState::init(g, model, InitialCondition::explicit_states({0, 1, 7}), 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(ProcessState::init(g, model, InitialCondition::degree_zero(5, 0), 1),
                    std::invalid_argument);
    ProcessState st = ProcessState::init(g, model, InitialCondition::explicit_states({0, 1, 0}), 1);
    CHECK_THROWS_AS(run(st, -1.0, 2, 0.1), std::invalid_argument);
}
