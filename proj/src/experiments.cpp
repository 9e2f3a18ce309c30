#include "graphmf/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "graphmf/version.hpp"

namespace graphmf {

namespace {

int effective_threads(int requested, std::size_t tasks) {
    int hw = 1;
#ifdef _OPENMP
    hw = omp_get_max_threads();
#endif
    int t = requested > 0 ? requested : hw;
    return std::max(1, std::min<int>(t, static_cast<int>(tasks)));
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void get_if_present(const nlohmann::json& j, const char* key, auto& out) {
    if (j.contains(key)) j.at(key).get_to(out);
}

}  // namespace

double KappaRule::kappa(std::uint32_t n) const { return c * std::pow(static_cast<double>(n), -gamma); }

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    c.kind = j.at("kind").get<std::string>();
    if (j.contains("kernel")) c.kernel = j.at("kernel");
    get_if_present(j, "model", c.model);
    get_if_present(j, "beta", c.beta);
    get_if_present(j, "betas", c.betas);
    get_if_present(j, "n_list", c.n_list);
    if (j.contains("kappa")) {
        c.kappa_rule.c = j.at("kappa").value("c", 1.0);
        c.kappa_rule.gamma = j.at("kappa").value("gamma", 0.0);
    }
    get_if_present(j, "M", c.m);
    get_if_present(j, "spectral_M", c.spectral_m);
    get_if_present(j, "T", c.horizon);
    get_if_present(j, "dt", c.dt);
    get_if_present(j, "record_dt", c.record_dt);
    if (j.contains("u0")) c.u0 = j.at("u0");
    get_if_present(j, "lambda", c.lambda);
    get_if_present(j, "n", c.n);
    get_if_present(j, "coarse_max", c.coarse_max);
    get_if_present(j, "die_out_threshold", c.die_out_threshold);
    get_if_present(j, "endemic_threshold", c.endemic_threshold);
    get_if_present(j, "crosscheck_tol", c.crosscheck_tol);
    get_if_present(j, "seeds", c.seeds);
    get_if_present(j, "threads", c.threads);
    get_if_present(j, "output_dir", c.output_dir);
    return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("ExperimentConfig: cannot open " + path);
    nlohmann::json j;
    in >> j;
    return from_json(j);
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["kind"] = kind;
    j["kernel"] = kernel;
    j["model"] = model;
    j["beta"] = beta;
    if (!betas.empty()) j["betas"] = betas;
    if (!n_list.empty()) j["n_list"] = n_list;
    j["kappa"] = {{"c", kappa_rule.c}, {"gamma", kappa_rule.gamma}};
    j["M"] = m;
    j["spectral_M"] = spectral_m;
    j["T"] = horizon;
    j["dt"] = dt;
    j["record_dt"] = record_dt;
    j["u0"] = u0;
    j["lambda"] = lambda;
    j["n"] = n;
    j["coarse_max"] = coarse_max;
    j["die_out_threshold"] = die_out_threshold;
    j["endemic_threshold"] = endemic_threshold;
    j["crosscheck_tol"] = crosscheck_tol;
    j["seeds"] = seeds;
    j["threads"] = threads;
    return j;
}

void ExperimentConfig::validate() const {
    if (seeds.empty()) throw std::invalid_argument("config: seeds must be nonempty");
    if (kind == "convergence" || kind == "empirical_opnorm") {
        if (n_list.empty()) throw std::invalid_argument("config: n_list required");
        for (std::size_t i = 1; i < n_list.size(); ++i)
            if (n_list[i] <= n_list[i - 1])
                throw std::invalid_argument("config: n_list must be strictly increasing");
        if (kappa_rule.gamma < 0.0 || kappa_rule.gamma >= 1.0)
            throw std::invalid_argument("config: kappa gamma must lie in [0,1)");
        if (kappa_rule.c <= 0.0) throw std::invalid_argument("config: kappa c must be positive");
    }
    if (kind == "threshold_sweep") {
        if (betas.size() < 1) throw std::invalid_argument("config: betas required");
        for (std::size_t i = 1; i < betas.size(); ++i)
            if (betas[i] <= betas[i - 1])
                throw std::invalid_argument("config: betas must be strictly increasing");
    }
}

bool Report::all_passed() const {
    for (const auto& a : assertions)
        if (!a.pass) return false;
    return true;
}

nlohmann::json Report::to_json() const {
    nlohmann::json j;
    j["kind"] = kind;
    j["data"] = data;
    for (const auto& a : assertions)
        j["assertions"].push_back({{"name", a.name}, {"pass", a.pass}, {"detail", a.detail}});
    j["all_passed"] = all_passed();
    return j;
}

void Report::write(const std::string& dir) const {
    if (dir.empty()) return;
    std::filesystem::create_directories(dir);
    std::ofstream out(dir + "/report.json");
    out << to_json().dump(2) << "\n";
    for (const auto& [name, content] : csv_files) {
        std::ofstream csv(dir + "/" + name);
        csv << content;
    }
}

std::vector<double> initial_point(const ExperimentConfig& config, const RateModel& model) {
    if (config.u0.is_number()) {
        const double level = config.u0.get<double>();
        if (model.num_states() != 2)
            throw std::invalid_argument("config: numeric u0 needs a two-state model");
        if (level < 0.0 || level > 1.0) throw std::invalid_argument("config: u0 outside [0,1]");
        return {1.0 - level, level};
    }
    auto point = config.u0.get<std::vector<double>>();
    if (static_cast<int>(point.size()) != model.num_states())
        throw std::invalid_argument("config: u0 vector size must match state count");
    return point;
}

SymMatrix empirical_difference_matrix(const SampledGraph& graph, const GraphonKernel& kernel) {
    const std::uint32_t n = graph.n;
    if (n > 8192) throw std::invalid_argument("empirical_difference_matrix: n too large for dense matrix");
    SymMatrix d;
    d.n = static_cast<int>(n);
    d.a.assign(static_cast<std::size_t>(n) * n, 0.0);
    const double inv_kn = 1.0 / (graph.kappa * n);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < d.n; ++i) {
        const double x = graph.positions[i];
        for (int j = 0; j < d.n; ++j)
            d.a[static_cast<std::size_t>(i) * n + j] = -kernel.evaluate(x, graph.positions[j]) / n;
        for (std::uint32_t j : graph.neighbors_of(static_cast<std::uint32_t>(i)))
            d.a[static_cast<std::size_t>(i) * n + j] += inv_kn;
    }
    return d;
}

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median: empty");
    std::sort(values.begin(), values.end());
    const std::size_t h = values.size() / 2;
    return values.size() % 2 ? values[h] : 0.5 * (values[h - 1] + values[h]);
}

namespace {

nlohmann::json base_data(const ExperimentConfig& config) {
    nlohmann::json d;
    d["config"] = config.to_json();
    d["library_version"] = kVersion;
    d["rng_algorithm"] = kRngAlgorithm;
    return d;
}

}  // namespace

Report run_convergence(const ExperimentConfig& config) {
    config.validate();
    Report rep;
    rep.kind = "convergence";
    rep.data = base_data(config);

    const GraphonKernel kernel = GraphonKernel::from_json(config.kernel);
    const RateModel model = config.model == "sis" ? RateModel::sis(config.beta)
                                                  : RateModel::from_spec(config.model);
    const std::vector<double> point = initial_point(config, model);
    const StepFunction u0 = StepFunction::constant_vector(config.m, model.states(), point);

    const MeanFieldSolution mf =
        solve_meanfield(kernel, model, u0, config.m, config.dt, config.horizon, config.record_dt);
    rep.data["meanfield_max_sum_drift"] = mf.max_sum_drift;
    rep.data["meanfield_min_component"] = mf.min_component;

    std::ostringstream csv;
    csv << "n,seed,sup_gap\n";
    std::vector<double> medians;
    for (std::uint32_t n : config.n_list) {
        const double kap = config.kappa_rule.kappa(n);
        std::vector<double> gaps(config.seeds.size(), 0.0);
        TrajectoryComparison first_cmp;
        const int nt = effective_threads(config.threads, config.seeds.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
        for (int si = 0; si < static_cast<int>(config.seeds.size()); ++si) {
            SampledGraph g = sample_graph(kernel, n, kap, VertexMode::grid, config.seeds[si]);
            ProcessState st = ProcessState::init(g, model, InitialCondition::iid(u0), config.seeds[si]);
            Trajectory traj = run(st, config.horizon, config.m, config.record_dt);
            TrajectoryComparison cmp = compare_trajectories(traj, mf);
            gaps[si] = cmp.sup_gap;
            if (si == 0) first_cmp = std::move(cmp);
        }
        for (std::size_t si = 0; si < config.seeds.size(); ++si)
            csv << n << "," << config.seeds[si] << "," << fmt(gaps[si]) << "\n";
        medians.push_back(median(gaps));
        rep.data["gaps"][std::to_string(n)] = gaps;
        rep.data["summaries"].push_back({{"n", n},
                                         {"M", config.m},
                                         {"seed", config.seeds.front()},
                                         {"kappa", kap},
                                         {"sup_gap", first_cmp.sup_gap}});
        std::ostringstream series;
        series << "t,interval_gap,l1_gap\n";
        for (std::size_t t = 0; t < first_cmp.times.size(); ++t)
            series << fmt(first_cmp.times[t]) << "," << fmt(first_cmp.interval_norm_gap[t]) << ","
                   << fmt(first_cmp.l1_gap[t]) << "\n";
        rep.csv_files.emplace_back("comparison_n" + std::to_string(n) + ".csv", series.str());
    }
    rep.data["medians"] = medians;
    rep.csv_files.emplace_back("gaps.csv", csv.str());

    if (config.n_list.size() >= 2) {
        bool decreasing = true;
        for (std::size_t i = 1; i < medians.size(); ++i)
            if (medians[i] >= medians[i - 1]) decreasing = false;
        std::ostringstream detail;
        for (double v : medians) detail << v << " ";
        rep.assertions.push_back({"median_gap_strictly_decreasing", decreasing, detail.str()});
    }
    rep.write(config.output_dir);
    return rep;
}

Report run_threshold_sweep(const ExperimentConfig& config) {
    config.validate();
    Report rep;
    rep.kind = "threshold_sweep";
    rep.data = base_data(config);

    const GraphonKernel kernel = GraphonKernel::from_json(config.kernel);
    const int ms = kernel.repr() == GraphonKernel::Repr::Blockwise
                       ? kernel.block_size()
                       : config.spectral_m;
    const double beta_c = epidemic_threshold(kernel, ms);
    rep.data["beta_critical"] = beta_c;

    std::vector<double> prevalence(config.betas.size(), 0.0);
    const int nt = effective_threads(config.threads, config.betas.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
    for (int bi = 0; bi < static_cast<int>(config.betas.size()); ++bi)
        prevalence[bi] =
            long_run_prevalence(kernel, config.betas[bi], config.m, config.horizon, config.dt, 0.01);

    std::ostringstream csv;
    csv << "beta,prevalence,class\n";
    std::vector<int> cls(config.betas.size());  // 0 die-out, 1 ambiguous, 2 endemic
    for (std::size_t i = 0; i < config.betas.size(); ++i) {
        cls[i] = prevalence[i] < config.die_out_threshold  ? 0
                 : prevalence[i] > config.endemic_threshold ? 2
                                                            : 1;
        csv << fmt(config.betas[i]) << "," << fmt(prevalence[i]) << ","
            << (cls[i] == 0 ? "die_out" : cls[i] == 2 ? "endemic" : "ambiguous") << "\n";
    }
    rep.csv_files.emplace_back("sweep.csv", csv.str());
    rep.data["prevalence"] = prevalence;

    auto step_at = [&](std::size_t i) {
        if (config.betas.size() < 2) return 0.0;
        if (i + 1 < config.betas.size()) return config.betas[i + 1] - config.betas[i];
        return config.betas[i] - config.betas[i - 1];
    };

    // ambiguity allowed only next to the threshold
    bool ambiguity_ok = true;
    for (std::size_t i = 0; i < cls.size(); ++i)
        if (cls[i] == 1 && std::abs(config.betas[i] - beta_c) > step_at(i) * (1.0 + 1e-9))
            ambiguity_ok = false;
    rep.assertions.push_back({"ambiguous_only_near_threshold", ambiguity_ok, ""});

    // monotone classification with exactly one flip located at beta_c
    int flips = 0;
    std::size_t flip_at = 0;
    bool monotone = true;
    for (std::size_t i = 1; i < cls.size(); ++i) {
        if (cls[i] < cls[i - 1]) monotone = false;
        if (cls[i - 1] < 2 && cls[i] == 2) {
            ++flips;
            flip_at = i;
        }
    }
    std::ostringstream detail;
    detail << "flips=" << flips << " beta_c=" << beta_c;
    if (flips == 1) {
        const double lo = config.betas[flip_at - 1] - step_at(flip_at - 1);
        const double hi = config.betas[flip_at] + step_at(flip_at);
        rep.assertions.push_back(
            {"single_flip_at_threshold", monotone && lo <= beta_c && beta_c <= hi, detail.str()});
    } else if (flips == 0) {
        const bool all_die = cls.front() < 2 && cls.back() < 2;
        const bool consistent = all_die ? config.betas.back() <= beta_c + step_at(cls.size() - 1)
                                        : config.betas.front() >= beta_c - step_at(0);
        rep.assertions.push_back({"no_flip_consistent_with_threshold", consistent, detail.str()});
    } else {
        rep.assertions.push_back({"single_flip_at_threshold", false, detail.str()});
    }
    rep.write(config.output_dir);
    return rep;
}

Report run_sparse_counterexample(const ExperimentConfig& config) {
    config.validate();
    Report rep;
    rep.kind = "sparse_counterexample";
    rep.data = base_data(config);

    const GraphonKernel kernel = GraphonKernel::constant(1.0);
    const RateModel model = RateModel::sis(config.beta);
    const int s_i = model.index_of("I");
    const int s_s = model.index_of("S");
    const double u_init = std::exp(-config.lambda);
    const double kappa = config.lambda / config.n;

    // mean-field curve from the same initial level (Kurtz ODE, M = 1)
    const StepFunction u0 =
        StepFunction::constant_vector(1, model.states(), {1.0 - u_init, u_init});
    const MeanFieldSolution mf =
        solve_meanfield(kernel, model, u0, 1, config.dt, config.horizon, config.record_dt);

    const std::size_t n_rec = mf.times.size();
    std::vector<double> init_fracs(config.seeds.size(), 0.0);
    std::vector<double> sup_emp_decay(config.seeds.size(), 0.0);
    std::vector<std::vector<double>> emp_curves(config.seeds.size());

    const int nt = effective_threads(config.threads, config.seeds.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
    for (int si = 0; si < static_cast<int>(config.seeds.size()); ++si) {
        SampledGraph g = sample_graph(kernel, config.n, kappa, VertexMode::grid, config.seeds[si]);
        ProcessState st =
            ProcessState::init(g, model, InitialCondition::degree_zero(s_i, s_s), config.seeds[si]);
        Trajectory traj = run(st, config.horizon, 1, config.record_dt);
        init_fracs[si] = traj.state_density.front()[s_i];
        double sup = 0.0;
        std::vector<double> curve(traj.times.size());
        for (std::size_t t = 0; t < traj.times.size(); ++t) {
            curve[t] = traj.state_density[t][s_i];
            const double decay = u_init * std::exp(-traj.times[t]);
            sup = std::max(sup, std::abs(curve[t] - decay));
        }
        sup_emp_decay[si] = sup;
        emp_curves[si] = std::move(curve);
    }

    double sup_decay_mf = 0.0;
    std::ostringstream csv;
    csv << "t,empirical_median,decay,meanfield\n";
    for (std::size_t t = 0; t < n_rec; ++t) {
        const double decay = u_init * std::exp(-mf.times[t]);
        const double mfv = mf.values[t].at(0, s_i);
        sup_decay_mf = std::max(sup_decay_mf, std::abs(decay - mfv));
        std::vector<double> at_t;
        for (const auto& c : emp_curves)
            if (t < c.size()) at_t.push_back(c[t]);
        csv << fmt(mf.times[t]) << "," << fmt(median(at_t)) << "," << fmt(decay) << "," << fmt(mfv)
            << "\n";
    }
    rep.csv_files.emplace_back("curves.csv", csv.str());

    const double med_init = median(init_fracs);
    const double med_sup = median(sup_emp_decay);
    rep.data["median_initial_infected"] = med_init;
    rep.data["expected_initial_infected"] = u_init;
    rep.data["median_sup_empirical_vs_decay"] = med_sup;
    rep.data["sup_decay_vs_meanfield"] = sup_decay_mf;
    // derivative mismatch at t = 0: pure decay vs logistic drift
    rep.data["decay_derivative_at_0"] = -u_init;
    rep.data["meanfield_derivative_at_0"] = -u_init + config.beta * u_init * (1.0 - u_init);

    rep.assertions.push_back({"initial_infected_matches_exp_minus_lambda",
                              std::abs(med_init - u_init) <= 0.005,
                              "median=" + fmt(med_init)});
    rep.assertions.push_back(
        {"empirical_follows_pure_decay", med_sup < 0.01, "median sup=" + fmt(med_sup)});
    if (config.beta > 0.0)
        rep.assertions.push_back({"meanfield_departs_from_decay", sup_decay_mf > 0.05,
                                  "sup=" + fmt(sup_decay_mf)});
    rep.write(config.output_dir);
    return rep;
}

Report run_empirical_opnorm(const ExperimentConfig& config) {
    config.validate();
    Report rep;
    rep.kind = "empirical_opnorm";
    rep.data = base_data(config);

    const GraphonKernel kernel = GraphonKernel::from_json(config.kernel);
    std::ostringstream csv;
    csv << "n,seed,opnorm\n";
    std::vector<double> medians;
    for (std::uint32_t n : config.n_list) {
        const double kap = config.kappa_rule.kappa(n);
        std::vector<double> vals(config.seeds.size(), 0.0);
        const int nt = effective_threads(config.threads, config.seeds.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
        for (int si = 0; si < static_cast<int>(config.seeds.size()); ++si) {
            SampledGraph g = sample_graph(kernel, n, kap, VertexMode::grid, config.seeds[si]);
            SymMatrix d = empirical_difference_matrix(g, kernel);
            if (d.n > config.coarse_max) d = coarsen_matrix(d, config.coarse_max);
            vals[si] = std::abs(power_dominant(d).lambda);
        }
        for (std::size_t si = 0; si < config.seeds.size(); ++si)
            csv << n << "," << config.seeds[si] << "," << fmt(vals[si]) << "\n";
        medians.push_back(median(vals));
        rep.data["opnorms"][std::to_string(n)] = vals;
    }
    rep.data["medians"] = medians;
    rep.csv_files.emplace_back("opnorm.csv", csv.str());

    if (config.n_list.size() >= 2) {
        bool decreasing = true;
        for (std::size_t i = 1; i < medians.size(); ++i)
            if (medians[i] >= medians[i - 1]) decreasing = false;
        std::ostringstream detail;
        for (double v : medians) detail << v << " ";
        rep.assertions.push_back({"median_opnorm_strictly_decreasing", decreasing, detail.str()});
    }
    rep.write(config.output_dir);
    return rep;
}

Report run_equilibrium_crosscheck(const ExperimentConfig& config) {
    config.validate();
    Report rep;
    rep.kind = "equilibrium_crosscheck";
    rep.data = base_data(config);

    const GraphonKernel kernel = GraphonKernel::from_json(config.kernel);
    std::function<double(double)> phi;
    if (kernel.is_separable()) {
        phi = [&kernel](double x) { return kernel.separable_phi(x); };
    } else if (kernel.repr() == GraphonKernel::Repr::Blockwise && kernel.block_size() == 1) {
        const double root = std::sqrt(kernel.block_values().front());  // W = p is sqrt(p) x sqrt(p)
        phi = [root](double) { return root; };
    } else {
        throw std::invalid_argument("equilibrium_crosscheck: kernel must be separable");
    }

    SisEquilibrium eq = sis_equilibrium_separable(phi, config.beta, config.m, 1e-12);
    rep.data["r0"] = eq.r0;
    rep.data["die_out"] = eq.die_out;

    const RateModel model = RateModel::sis(config.beta);
    const int s_i = model.index_of("I");
    const StepFunction u0 = StepFunction::constant_vector(config.m, model.states(), {0.99, 0.01});
    const MeanFieldSolution sol =
        solve_meanfield(kernel, model, u0, config.m, config.dt, config.horizon, config.horizon);
    const StepFunction pde_final = component(sol.values.back(), s_i);

    std::ostringstream csv;
    csv << "cell,x,g_solver,g_pde\n";
    double sup_gap = 0.0;
    for (int k = 0; k < config.m; ++k) {
        const double gs = eq.die_out ? 0.0 : eq.g.at(k);
        sup_gap = std::max(sup_gap, std::abs(gs - pde_final.at(k)));
        csv << k + 1 << "," << fmt((k + 1.0) / config.m) << "," << fmt(gs) << ","
            << fmt(pde_final.at(k)) << "\n";
    }
    rep.csv_files.emplace_back("equilibrium.csv", csv.str());
    rep.data["sup_cell_gap"] = sup_gap;
    if (!eq.die_out) rep.data["k"] = eq.k;

    if (eq.die_out) {
        const double prev = pde_final.integral();
        rep.assertions.push_back({"both_routes_die_out", prev < config.die_out_threshold,
                                  "pde prevalence=" + fmt(prev)});
    } else {
        rep.assertions.push_back({"equilibrium_gap_below_tol", sup_gap < config.crosscheck_tol,
                                  "sup gap=" + fmt(sup_gap)});
    }
    rep.write(config.output_dir);
    return rep;
}

Report run_experiment(const ExperimentConfig& config) {
    if (config.kind == "convergence") return run_convergence(config);
    if (config.kind == "threshold_sweep") return run_threshold_sweep(config);
    if (config.kind == "sparse_counterexample") return run_sparse_counterexample(config);
    if (config.kind == "empirical_opnorm") return run_empirical_opnorm(config);
    if (config.kind == "equilibrium_crosscheck") return run_equilibrium_crosscheck(config);
    throw std::invalid_argument("run_experiment: unknown kind '" + config.kind + "'");
}

}  // namespace graphmf
