#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "graphmf/experiments.hpp"

using namespace graphmf;

namespace {

ExperimentConfig convergence_config() {
    ExperimentConfig c;
    c.kind = "convergence";
    c.kernel = {{"type", "constant"}, {"p", 0.5}};
    c.model = "zero:S,I";
    c.u0 = 0.3;
    c.n_list = {200, 400, 800};
    c.m = 10;
    c.horizon = 1.0;
    c.dt = 0.05;
    c.record_dt = 0.5;
    c.seeds = {1, 2, 3, 4, 5, 6};
    return c;
}

}  // namespace

TEST_CASE("config validation") {
    ExperimentConfig c = convergence_config();
    c.n_list = {400, 200};
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = convergence_config();
    c.seeds.clear();
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = convergence_config();
    c.kappa_rule.gamma = 1.0;  // truly sparse schedules are excluded here
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = convergence_config();
    c.kind = "threshold_sweep";
    c.betas = {1.0, 1.0};
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("config json round trip") {
    ExperimentConfig c = convergence_config();
    ExperimentConfig back = ExperimentConfig::from_json(c.to_json());
    CHECK(back.to_json() == c.to_json());
    CHECK_THROWS(run_experiment(ExperimentConfig::from_json({{"kind", "bogus"}})));
}

TEST_CASE("zero-rate convergence: gaps shrink with n and reports are bit-stable") {
    ExperimentConfig c = convergence_config();
    Report r1 = run_convergence(c);
    CHECK(r1.all_passed());
    auto medians = r1.data.at("medians").get<std::vector<double>>();
    REQUIRE(medians.size() == 3);
    CHECK(medians[1] < medians[0]);
    CHECK(medians[2] < medians[1]);

    // re-running the config embedded in the report reproduces it bit-exactly
    ExperimentConfig embedded = ExperimentConfig::from_json(r1.data.at("config"));
    Report r2 = run_experiment(embedded);
    CHECK(r1.to_json().dump() == r2.to_json().dump());

    CHECK(r1.data.at("config").at("kind") == "convergence");
    CHECK(r1.data.contains("library_version"));
    CHECK(r1.data.at("rng_algorithm") == "splitmix64-v1");
}

TEST_CASE("block-model convergence: simulation approaches the mean-field solution") {
    ExperimentConfig c;
    c.kind = "convergence";
    c.kernel = {{"type", "blockwise"}, {"m", 2}, {"values", {0.8, 0.2, 0.2, 0.8}}};
    c.model = "sis";
    c.beta = 2.0;
    c.u0 = 0.3;
    c.n_list = {1000, 4000};
    c.m = 2;
    c.horizon = 3.0;
    c.dt = 0.01;
    c.record_dt = 0.25;
    c.seeds = {1, 2, 3, 4, 5, 6};
    Report r = run_convergence(c);
    CHECK(r.all_passed());
    auto medians = r.data.at("medians").get<std::vector<double>>();
    CHECK(medians[1] < medians[0]);
    CHECK(medians[1] < 0.05);
}

TEST_CASE("single-n convergence runs without a monotonicity assertion") {
    ExperimentConfig c = convergence_config();
    c.n_list = {300};
    c.seeds = {1, 2};
    Report r = run_convergence(c);
    CHECK(r.assertions.empty());
    CHECK(r.all_passed());
}

TEST_CASE("threshold sweep brackets the critical beta") {
    ExperimentConfig c;
    c.kind = "threshold_sweep";
    c.kernel = {{"type", "constant"}, {"p", 1.0}};
    c.betas = {0.6, 0.8, 1.2, 1.5};
    c.m = 1;
    c.horizon = 100.0;
    c.dt = 0.01;
    c.seeds = {1};
    Report r = run_threshold_sweep(c);
    CHECK(r.all_passed());
    auto prev = r.data.at("prevalence").get<std::vector<double>>();
    CHECK(prev[0] < 1e-4);
    CHECK(prev[1] < 1e-4);
    CHECK(prev[2] == doctest::Approx(1.0 - 1.0 / 1.2).epsilon(1e-3));
    CHECK(prev[3] == doctest::Approx(1.0 - 1.0 / 1.5).epsilon(1e-3));
}

TEST_CASE("threshold sweep below the critical point sees no flip") {
    ExperimentConfig c;
    c.kind = "threshold_sweep";
    c.kernel = {{"type", "constant"}, {"p", 1.0}};
    c.betas = {0.3, 0.5, 0.7};
    c.m = 1;
    c.horizon = 60.0;
    c.dt = 0.01;
    c.seeds = {1};
    Report r = run_threshold_sweep(c);
    CHECK(r.all_passed());
    bool found = false;
    for (const auto& a : r.assertions)
        if (a.name == "no_flip_consistent_with_threshold") found = a.pass;
    CHECK(found);
}

TEST_CASE("sparse counterexample with beta=0 degenerates to pure decay") {
    ExperimentConfig c;
    c.kind = "sparse_counterexample";
    c.lambda = 1.0;
    c.beta = 0.0;
    c.n = 40000;
    c.horizon = 2.0;
    c.dt = 0.001;
    c.record_dt = 0.1;
    c.seeds = {1, 2, 3};
    Report r = run_sparse_counterexample(c);
    CHECK(r.all_passed());
    CHECK(r.assertions.size() == 2);  // divergence assertion skipped
    CHECK(std::abs(r.data.at("median_initial_infected").get<double>() - std::exp(-1.0)) <= 0.005);
    CHECK(r.data.at("sup_decay_vs_meanfield").get<double>() <= 1e-9);
}

TEST_CASE("empirical opnorm medians decrease") {
    ExperimentConfig c;
    c.kind = "empirical_opnorm";
    c.kernel = {{"type", "constant"}, {"p", 0.5}};
    c.n_list = {300, 600};
    c.seeds = {1, 2, 3, 4, 5};
    Report r = run_empirical_opnorm(c);
    CHECK(r.all_passed());
    auto medians = r.data.at("medians").get<std::vector<double>>();
    CHECK(medians[1] < medians[0]);
    CHECK(medians[1] < 0.2);
}

TEST_CASE("equilibrium crosscheck for constant and separable kernels") {
    ExperimentConfig c;
    c.kind = "equilibrium_crosscheck";
    c.kernel = {{"type", "constant"}, {"p", 1.0}};
    c.beta = 2.0;
    c.m = 50;
    c.horizon = 60.0;
    c.dt = 0.01;
    Report r = run_equilibrium_crosscheck(c);
    CHECK(r.all_passed());
    CHECK(r.data.at("sup_cell_gap").get<double>() < 1e-6);
    CHECK(r.data.at("k").get<double>() == doctest::Approx(0.5).epsilon(1e-9));

    c.kernel = {{"type", "product_xy"}};
    c.beta = 6.0;
    c.m = 60;
    c.horizon = 120.0;
    Report r2 = run_equilibrium_crosscheck(c);
    CHECK(r2.all_passed());
    CHECK(r2.data.at("sup_cell_gap").get<double>() < 1e-3);

    c.beta = 0.5;  // subcritical: both routes die out
    c.horizon = 60.0;
    Report r3 = run_equilibrium_crosscheck(c);
    CHECK(r3.all_passed());
    CHECK(r3.data.at("die_out").get<bool>());
}

TEST_CASE("reports are written to the output directory") {
    namespace fs = std::filesystem;
    ExperimentConfig c = convergence_config();
    c.n_list = {200};
    c.seeds = {1, 2};
    const fs::path dir = fs::temp_directory_path() / "graphmf_report_test";
    fs::remove_all(dir);
    c.output_dir = dir.string();
    run_convergence(c);
    CHECK(fs::exists(dir / "report.json"));
    CHECK(fs::exists(dir / "gaps.csv"));
    std::ifstream cmp(dir / "comparison_n200.csv");
    std::string header;
    std::getline(cmp, header);
    CHECK(header == "t,interval_gap,l1_gap");
    fs::remove_all(dir);
}
