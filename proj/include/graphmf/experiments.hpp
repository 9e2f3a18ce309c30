#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "graphmf/analysis.hpp"
#include "graphmf/meanfield.hpp"
#include "graphmf/spectral.hpp"
#include "json.hpp"

namespace graphmf {

/// Density schedule kappa_N = c * N^{-gamma}.
struct KappaRule {
    double c = 1.0;
    double gamma = 0.0;
    double kappa(std::uint32_t n) const;
};

struct ExperimentConfig {
    std::string kind;  // convergence | threshold_sweep | sparse_counterexample |
                       // empirical_opnorm | equilibrium_crosscheck
    nlohmann::json kernel = {{"type", "constant"}, {"p", 0.5}};
    std::string model = "sis";
    double beta = 2.0;
    std::vector<double> betas;
    std::vector<std::uint32_t> n_list;
    KappaRule kappa_rule;
    int m = 20;              // aggregation / solver grid
    int spectral_m = 500;    // grid for eigenvalue estimates
    double horizon = 5.0;
    double dt = 0.01;
    double record_dt = 0.1;
    nlohmann::json u0 = 0.3;      // infected level (number) or full per-state vector
    double lambda = 1.0;          // sparse counterexample: kappa = lambda / n
    std::uint32_t n = 100000;     // sparse counterexample vertex count
    int coarse_max = 2000;        // opnorm eigensolve size cap
    double die_out_threshold = 1e-4;
    double endemic_threshold = 0.05;
    double crosscheck_tol = 1e-3;
    std::vector<std::uint64_t> seeds = {1};
    int threads = 0;  // 0 = OpenMP default
    std::string output_dir;

    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig from_file(const std::string& path);
    nlohmann::json to_json() const;
    void validate() const;
};

struct Assertion {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Deterministic experiment output: `data` embeds the full config, seeds and
/// library version, and re-running the embedded config reproduces it
/// bit-exactly. CSV side files are written next to the JSON report.
struct Report {
    std::string kind;
    nlohmann::json data;
    std::vector<Assertion> assertions;
    std::vector<std::pair<std::string, std::string>> csv_files;  // name -> content

    bool all_passed() const;
    nlohmann::json to_json() const;
    void write(const std::string& dir) const;
};

Report run_convergence(const ExperimentConfig& config);
Report run_threshold_sweep(const ExperimentConfig& config);
Report run_sparse_counterexample(const ExperimentConfig& config);
Report run_empirical_opnorm(const ExperimentConfig& config);
Report run_equilibrium_crosscheck(const ExperimentConfig& config);
Report run_experiment(const ExperimentConfig& config);

/// Initial condition vector for the configured model ({1-x, x} for a numeric
/// u0 with a two-state model, explicit per-state vector otherwise).
std::vector<double> initial_point(const ExperimentConfig& config, const RateModel& model);

/// Dense operator matrix of (1/kappa) W^N - W on the n-cell grid.
SymMatrix empirical_difference_matrix(const SampledGraph& graph, const GraphonKernel& kernel);

double median(std::vector<double> values);

}  // namespace graphmf
