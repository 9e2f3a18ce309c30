#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "graphmf/analysis.hpp"
#include "graphmf/experiments.hpp"
#include "graphmf/meanfield.hpp"
#include "graphmf/serial_ref.hpp"
#include "graphmf/version.hpp"

namespace fs = std::filesystem;
using namespace graphmf;

namespace {

std::vector<double> parse_csv_doubles(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

std::vector<std::uint64_t> parse_csv_u64(const std::string& s) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoull(tok));
    return out;
}

std::vector<std::uint32_t> parse_csv_u32(const std::string& s) {
    std::vector<std::uint32_t> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(static_cast<std::uint32_t>(std::stoul(tok)));
    return out;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

RateModel make_model(const std::string& spec, double beta) {
    if (spec == "sis") return RateModel::sis(beta);
    if (spec == "sir") return RateModel::sir(beta);
    return RateModel::from_spec(spec);
}

InitialCondition make_initial(const std::string& spec, const RateModel& model, int grid) {
    if (spec == "degree_zero")
        return InitialCondition::degree_zero(model.index_of("I"), model.index_of("S"));
    std::vector<double> point = parse_csv_doubles(spec);
    if (point.size() == 1 && model.num_states() == 2) point = {1.0 - point[0], point[0]};
    return InitialCondition::iid(StepFunction::constant_vector(grid, model.states(), point));
}

void write_file(const fs::path& path, const std::string& content) {
    if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    out << content;
}

std::string trajectory_csv(const Trajectory& traj) {
    std::ostringstream csv;
    csv << "t,cell,state,value\n";
    for (std::size_t t = 0; t < traj.times.size(); ++t)
        for (int k = 0; k < traj.grid_m; ++k)
            for (int s = 0; s < static_cast<int>(traj.labels.size()); ++s)
                csv << fmt(traj.times[t]) << "," << k + 1 << "," << traj.labels[s] << ","
                    << fmt(traj.box_density[t].at(k, s)) << "\n";
    return csv.str();
}

std::string meanfield_csv(const MeanFieldSolution& sol) {
    std::ostringstream csv;
    csv << "t,cell,state,value\n";
    for (std::size_t t = 0; t < sol.times.size(); ++t)
        for (int k = 0; k < sol.grid_m; ++k)
            for (int s = 0; s < static_cast<int>(sol.labels.size()); ++s)
                csv << fmt(sol.times[t]) << "," << k + 1 << "," << sol.labels[s] << ","
                    << fmt(sol.values[t].at(k, s)) << "\n";
    return csv.str();
}

int report_outcome(const Report& rep) {
    for (const auto& a : rep.assertions)
        std::cout << (a.pass ? "[PASS] " : "[FAIL] ") << a.name
                  << (a.detail.empty() ? "" : " (" + a.detail + ")") << "\n";
    std::cout << (rep.all_passed() ? "OK" : "FAILED") << "\n";
    return rep.all_passed() ? 0 : 1;
}

std::uint64_t file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return 0;
    std::stringstream ss;
    ss << in.rdbuf();
    return fnv1a(ss.str());
}

struct ExperimentFlags {
    std::string config_path;
    std::string kernel = "constant:0.5";
    std::string betas;
    std::string n_list;
    std::string seeds;
    std::uint64_t seed = 1;
    int replicas = 0;
    int m = 20;
    int spectral_m = 500;
    double horizon = 5.0;
    double dt = 0.01;
    double record_dt = 0.1;
    double beta = 2.0;
    double u0 = 0.3;
    double lambda = 1.0;
    std::uint32_t n = 100000;
    double kappa_c = 1.0;
    double kappa_gamma = 0.0;
    double tol = 1e-3;
    int threads = 0;
    std::string out;

    void add_common(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file (overrides other flags)");
        cmd->add_option("--kernel", kernel, "kernel spec or JSON file");
        cmd->add_option("--seeds", seeds, "comma-separated seed list");
        cmd->add_option("--seed", seed, "first seed");
        cmd->add_option("--replicas", replicas, "number of seeds starting at --seed");
        cmd->add_option("--M", m, "grid size");
        cmd->add_option("--spectral-M", spectral_m, "eigensolve grid");
        cmd->add_option("--T", horizon, "time horizon");
        cmd->add_option("--dt", dt, "integrator step");
        cmd->add_option("--record-dt", record_dt, "recording cadence");
        cmd->add_option("--beta", beta, "SIS infection rate");
        cmd->add_option("--u0", u0, "initial infected level");
        cmd->add_option("--kappa-c", kappa_c, "kappa rule constant");
        cmd->add_option("--gamma", kappa_gamma, "kappa rule exponent");
        cmd->add_option("--tol", tol, "crosscheck tolerance");
        cmd->add_option("--threads", threads, "worker threads (0 = default)");
        cmd->add_option("--out", out, "output directory");
    }

    ExperimentConfig build(const std::string& kind) const {
        if (!config_path.empty()) {
            ExperimentConfig c = ExperimentConfig::from_file(config_path);
            if (!out.empty()) c.output_dir = out;
            return c;
        }
        ExperimentConfig c;
        c.kind = kind;
        c.kernel = GraphonKernel::from_spec(kernel).to_json();
        if (c.kernel.at("type") == "separable" || c.kernel.at("type") == "evaluable") {
            // evaluator-backed kernels cannot be serialized; keep the CLI string
            c.kernel = {{"type", "spec"}, {"spec", kernel}};
        }
        if (!betas.empty()) c.betas = parse_csv_doubles(betas);
        if (!n_list.empty()) c.n_list = parse_csv_u32(n_list);
        if (!seeds.empty()) {
            c.seeds = parse_csv_u64(seeds);
        } else if (replicas > 0) {
            c.seeds.clear();
            for (int i = 0; i < replicas; ++i) c.seeds.push_back(seed + static_cast<std::uint64_t>(i));
        } else {
            c.seeds = {seed};
        }
        c.m = m;
        c.spectral_m = spectral_m;
        c.horizon = horizon;
        c.dt = dt;
        c.record_dt = record_dt;
        c.beta = beta;
        c.u0 = u0;
        c.lambda = lambda;
        c.n = n;
        c.kappa_rule = {kappa_c, kappa_gamma};
        c.crosscheck_tol = tol;
        c.threads = threads;
        c.output_dir = out;
        return c;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"graphmf: local-density dependent Markov dynamics on graphons"};
    app.require_subcommand(0, 1);
    bool show_version = false;
    app.add_flag("--version", show_version, "print version and golden-file hash");

    int exit_code = 0;

    // --- sample ---------------------------------------------------------
    auto* sample_cmd = app.add_subcommand("sample", "sample a graph from a graphon");
    struct {
        std::string kernel, mode = "grid", out = ".", format = "text";
        std::uint32_t n = 1000;
        double kappa = 1.0;
        std::uint64_t seed = 1;
    } sa;
    sample_cmd->add_option("--kernel", sa.kernel, "kernel spec")->required();
    sample_cmd->add_option("--n", sa.n, "vertex count")->required();
    sample_cmd->add_option("--kappa", sa.kappa, "density parameter");
    sample_cmd->add_option("--mode", sa.mode, "grid | uniform");
    sample_cmd->add_option("--seed", sa.seed, "RNG seed");
    sample_cmd->add_option("--out", sa.out, "output directory");
    sample_cmd->add_option("--format", sa.format, "text | binary | both");
    sample_cmd->callback([&] {
        GraphonKernel kernel = GraphonKernel::from_spec(sa.kernel);
        SampledGraph g = sample_graph(kernel, sa.n, sa.kappa, vertex_mode_from_string(sa.mode), sa.seed);
        fs::create_directories(sa.out);
        if (sa.format == "text" || sa.format == "both")
            save_edge_list(g, (fs::path(sa.out) / "graph.txt").string());
        if (sa.format == "binary" || sa.format == "both")
            save_binary(g, (fs::path(sa.out) / "graph.bin").string());
        nlohmann::json summary = {{"n", g.n},
                                  {"edges", g.edge_count()},
                                  {"kappa", g.kappa},
                                  {"seed", g.seed},
                                  {"rng", kRngAlgorithm}};
        std::cout << summary.dump() << "\n";
    });

    // --- simulate -------------------------------------------------------
    auto* sim_cmd = app.add_subcommand("simulate", "event-driven simulation on a sampled graph");
    struct {
        std::string kernel = "constant:0.5", graph, model = "sis", init = "0.1", out, mode = "grid";
        std::uint32_t n = 1000;
        double kappa = 1.0, beta = 2.0, horizon = 5.0, record_dt = 0.1;
        int grid = 20;
        std::uint64_t seed = 1;
    } si;
    sim_cmd->add_option("--kernel", si.kernel, "kernel spec (ignored with --graph)");
    sim_cmd->add_option("--graph", si.graph, "load a saved graph instead of sampling");
    sim_cmd->add_option("--model", si.model, "model preset or JSON");
    sim_cmd->add_option("--beta", si.beta, "infection rate for sis/sir presets");
    sim_cmd->add_option("--init", si.init, "initial condition: level, CSV vector, or degree_zero");
    sim_cmd->add_option("--n", si.n, "vertex count");
    sim_cmd->add_option("--kappa", si.kappa, "density parameter");
    sim_cmd->add_option("--mode", si.mode, "grid | uniform");
    sim_cmd->add_option("--seed", si.seed, "RNG seed");
    sim_cmd->add_option("--T", si.horizon, "horizon");
    sim_cmd->add_option("--record-dt", si.record_dt, "recording cadence");
    sim_cmd->add_option("--grid", si.grid, "aggregation grid M");
    sim_cmd->add_option("--out", si.out, "output directory");
    sim_cmd->callback([&] {
        RateModel model = make_model(si.model, si.beta);
        SampledGraph g = si.graph.empty()
                             ? sample_graph(GraphonKernel::from_spec(si.kernel), si.n, si.kappa,
                                            vertex_mode_from_string(si.mode), si.seed)
                             : (si.graph.ends_with(".bin") ? load_binary(si.graph)
                                                           : load_edge_list(si.graph));
        ProcessState st = ProcessState::init(g, model, make_initial(si.init, model, 1), si.seed);
        Trajectory traj = run(st, si.horizon, si.grid, si.record_dt);
        nlohmann::json summary = {{"n", g.n},
                                  {"edges", g.edge_count()},
                                  {"final_time", traj.times.back()},
                                  {"final_density", traj.state_density.back()},
                                  {"states", traj.labels}};
        if (!si.out.empty()) {
            write_file(fs::path(si.out) / "trajectory.csv", trajectory_csv(traj));
            write_file(fs::path(si.out) / "summary.json", summary.dump(2) + "\n");
        }
        std::cout << summary.dump() << "\n";
    });

    // --- meanfield ------------------------------------------------------
    auto* mf_cmd = app.add_subcommand("meanfield", "solve the discretized mean-field equation");
    struct {
        std::string kernel = "constant:1", model = "sis", u0 = "0.1", out;
        double beta = 2.0, dt = 0.01, horizon = 5.0, record_dt = 0.1;
        int m = 20;
    } mf;
    mf_cmd->add_option("--kernel", mf.kernel, "kernel spec")->required();
    mf_cmd->add_option("--model", mf.model, "model preset or JSON");
    mf_cmd->add_option("--beta", mf.beta, "infection rate for sis/sir presets");
    mf_cmd->add_option("--u0", mf.u0, "initial level or CSV vector");
    mf_cmd->add_option("--M", mf.m, "solver grid");
    mf_cmd->add_option("--dt", mf.dt, "integrator step");
    mf_cmd->add_option("--T", mf.horizon, "horizon");
    mf_cmd->add_option("--record-dt", mf.record_dt, "recording cadence");
    mf_cmd->add_option("--out", mf.out, "output directory");
    mf_cmd->callback([&] {
        RateModel model = make_model(mf.model, mf.beta);
        std::vector<double> point = parse_csv_doubles(mf.u0);
        if (point.size() == 1 && model.num_states() == 2) point = {1.0 - point[0], point[0]};
        StepFunction u0 = StepFunction::constant_vector(mf.m, model.states(), point);
        MeanFieldSolution sol = solve_meanfield(GraphonKernel::from_spec(mf.kernel), model, u0, mf.m,
                                                mf.dt, mf.horizon, mf.record_dt);
        nlohmann::json summary = {{"final_time", sol.times.back()},
                                  {"final_integrals", sol.values.back().integrals()},
                                  {"max_sum_drift", sol.max_sum_drift},
                                  {"min_component", sol.min_component}};
        if (!mf.out.empty()) {
            write_file(fs::path(mf.out) / "meanfield.csv", meanfield_csv(sol));
            write_file(fs::path(mf.out) / "summary.json", summary.dump(2) + "\n");
        }
        std::cout << summary.dump() << "\n";
    });

    // --- spectral -------------------------------------------------------
    auto* sp_cmd = app.add_subcommand("spectral", "eigenvalues of the kernel operator");
    struct {
        std::string kernel, eigenfunctions;
        int m = 100, k = 10;
        bool two_grid = false;
    } sp;
    sp_cmd->add_option("--kernel", sp.kernel, "kernel spec")->required();
    sp_cmd->add_option("--M", sp.m, "discretization grid");
    sp_cmd->add_option("--K", sp.k, "number of eigenpairs");
    sp_cmd->add_option("--eigenfunctions", sp.eigenfunctions, "write eigenfunction grid CSV here");
    sp_cmd->add_flag("--two-grid", sp.two_grid,
                     "report the lambda_1 gap between grids M and 2M on stderr");
    sp_cmd->callback([&] {
        GraphonKernel kernel = GraphonKernel::from_spec(sp.kernel);
        const int k = std::min(sp.k, sp.m);
        Spectrum s = spectrum(kernel, sp.m, k);
        for (int t = 0; t < k; ++t) std::cout << t + 1 << "," << fmt(s.eigenvalues[t]) << "\n";
        if (!sp.eigenfunctions.empty()) {
            std::ostringstream csv;
            csv << "cell";
            for (int t = 0; t < k; ++t) csv << ",f" << t + 1;
            csv << "\n";
            for (int c = 0; c < sp.m; ++c) {
                csv << c + 1;
                for (int t = 0; t < k; ++t) csv << "," << fmt(s.eigenfunctions[t].at(c));
                csv << "\n";
            }
            write_file(fs::path(sp.eigenfunctions), csv.str());
        }
        if (sp.two_grid) {
            const double l1 = s.eigenvalues[0];
            const double l2 = spectrum(kernel, 2 * sp.m, 1).eigenvalues[0];
            std::fprintf(stderr, "lambda1(M=%d)=%.12g lambda1(2M)=%.12g gap=%.3g\n", sp.m, l1, l2,
                         std::abs(l1 - l2));
        }
    });

    // --- experiment subcommands ------------------------------------------
    ExperimentFlags cv, th, cx, on, eqf;
    auto* cv_cmd = app.add_subcommand("converge", "mean-field convergence experiment");
    cv.n_list = "500,2000,8000";
    cv.replicas = 10;
    cv_cmd->add_option("--n-list", cv.n_list, "comma-separated graph sizes");
    cv.add_common(cv_cmd);
    cv_cmd->callback([&] { exit_code = report_outcome(run_convergence(cv.build("convergence"))); });

    auto* th_cmd = app.add_subcommand("threshold", "SIS threshold sweep");
    th.betas = "0.6,0.8,1.2,1.5";
    th.horizon = 100.0;
    th.m = 50;
    th_cmd->add_option("--betas", th.betas, "comma-separated infection rates");
    th.add_common(th_cmd);
    th_cmd->callback([&] { exit_code = report_outcome(run_threshold_sweep(th.build("threshold_sweep"))); });

    auto* cx_cmd = app.add_subcommand("sparse-cx", "sparse-regime counterexample");
    cx.horizon = 3.0;
    cx.replicas = 5;
    cx_cmd->add_option("--lambda", cx.lambda, "average degree parameter (kappa = lambda/n)");
    cx_cmd->add_option("--n", cx.n, "vertex count");
    cx.add_common(cx_cmd);
    cx_cmd->callback(
        [&] { exit_code = report_outcome(run_sparse_counterexample(cx.build("sparse_counterexample"))); });

    auto* on_cmd = app.add_subcommand("opnorm", "empirical operator-norm convergence");
    on.n_list = "500,1000,2000";
    on.replicas = 10;
    on_cmd->add_option("--n-list", on.n_list, "comma-separated graph sizes");
    on.add_common(on_cmd);
    on_cmd->callback([&] { exit_code = report_outcome(run_empirical_opnorm(on.build("empirical_opnorm"))); });

    auto* eq_cmd = app.add_subcommand("equilibrium", "SIS equilibrium cross-check");
    eqf.kernel = "product_xy";
    eqf.beta = 6.0;
    eqf.m = 100;
    eqf.horizon = 200.0;
    eq_cmd->callback(
        [&] { exit_code = report_outcome(run_equilibrium_crosscheck(eqf.build("equilibrium_crosscheck"))); });
    eqf.add_common(eq_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    if (show_version) {
        std::string golden = "none";
        for (const char* p : {"data/golden.json", "../data/golden.json"})
            if (fs::exists(p)) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%016llx",
                              static_cast<unsigned long long>(file_hash(p)));
                golden = buf;
                break;
            }
        std::cout << "graphmf " << kVersion << " rng=" << kRngAlgorithm << " golden=" << golden
                  << "\n";
        return 0;
    }
    if (app.get_subcommands().empty()) {
        std::cerr << app.help();
        return 2;
    }
    return exit_code;
}
