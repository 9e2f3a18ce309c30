#include "graphmf/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace graphmf {

namespace {
constexpr int kMaxStates = 16;
}

RateModel::RateModel(std::vector<std::string> states, std::vector<double> base_from_to,
                     std::vector<double> inter_from_to_via)
    : states_(std::move(states)), base_(std::move(base_from_to)), inter_(std::move(inter_from_to_via)) {
    const std::size_t s = states_.size();
    if (s == 0 || s > kMaxStates) throw std::invalid_argument("RateModel: 1..16 states supported");
    if (base_.size() != s * s || inter_.size() != s * s * s)
        throw std::invalid_argument("RateModel: coefficient array sizes must be |S|^2 and |S|^3");
    for (double v : base_)
        if (v < 0.0) throw std::invalid_argument("RateModel: negative base rate");
    for (double v : inter_)
        if (v < 0.0) throw std::invalid_argument("RateModel: negative interaction coefficient");
    lipschitz_.assign(s * s, 0.0);
    for (std::size_t f = 0; f < s; ++f)
        for (std::size_t t = 0; t < s; ++t) {
            double acc = 0.0;
            for (std::size_t v = 0; v < s; ++v) acc += inter_[(f * s + t) * s + v];
            lipschitz_[f * s + t] = acc;
        }
    double lmax = 0.0, qmax = 0.0;
    for (std::size_t f = 0; f < s; ++f) {
        double lrow = 0.0, qrow = 0.0;
        for (std::size_t t = 0; t < s; ++t) {
            if (t == f) continue;
            lrow += lipschitz_[f * s + t];
            double bmax = 0.0;
            for (std::size_t v = 0; v < s; ++v) bmax = std::max(bmax, inter_[(f * s + t) * s + v]);
            qrow += base_[f * s + t] + bmax;
        }
        lmax = std::max(lmax, lrow);
        qmax = std::max(qmax, qrow);
    }
    lipschitz_bound_ = 2.0 * lmax;
    qmax_bound_ = 2.0 * qmax;
}

RateModel RateModel::zero(std::vector<std::string> states) {
    const std::size_t s = states.size();
    return RateModel(std::move(states), std::vector<double>(s * s, 0.0),
                     std::vector<double>(s * s * s, 0.0));
}

RateModel RateModel::sis(double beta) {
    if (beta < 0.0) throw std::invalid_argument("sis: beta must be nonnegative");
    std::vector<std::string> st{"S", "I"};
    std::vector<double> base(4, 0.0), inter(8, 0.0);
    base[1 * 2 + 0] = 1.0;      // I -> S, rate 1
    inter[(0 * 2 + 1) * 2 + 1] = beta;  // S -> I, beta * phi_I
    return RateModel(std::move(st), std::move(base), std::move(inter));
}

RateModel RateModel::sir(double beta) {
    if (beta < 0.0) throw std::invalid_argument("sir: beta must be nonnegative");
    std::vector<std::string> st{"S", "I", "R"};
    std::vector<double> base(9, 0.0), inter(27, 0.0);
    base[1 * 3 + 2] = 1.0;      // I -> R, rate 1
    inter[(0 * 3 + 1) * 3 + 1] = beta;  // S -> I, beta * phi_I
    return RateModel(std::move(st), std::move(base), std::move(inter));
}

int RateModel::index_of(const std::string& label) const {
    for (std::size_t i = 0; i < states_.size(); ++i)
        if (states_[i] == label) return static_cast<int>(i);
    throw std::invalid_argument("RateModel: unknown state '" + label + "'");
}

RateModel RateModel::from_json(const nlohmann::json& j) {
    auto states = j.at("states").get<std::vector<std::string>>();
    const std::size_t s = states.size();
    std::vector<double> base(s * s, 0.0), inter(s * s * s, 0.0);
    RateModel probe = zero(states);  // for label lookup
    if (j.contains("base"))
        for (const auto& e : j.at("base")) {
            int f = probe.index_of(e.at("from").get<std::string>());
            int t = probe.index_of(e.at("to").get<std::string>());
            if (f == t) throw std::invalid_argument("RateModel: self-transition rate");
            base[static_cast<std::size_t>(f) * s + t] = e.at("rate").get<double>();
        }
    if (j.contains("interaction"))
        for (const auto& e : j.at("interaction")) {
            int f = probe.index_of(e.at("from").get<std::string>());
            int t = probe.index_of(e.at("to").get<std::string>());
            int v = probe.index_of(e.at("via").get<std::string>());
            if (f == t) throw std::invalid_argument("RateModel: self-transition rate");
            inter[(static_cast<std::size_t>(f) * s + t) * s + v] = e.at("coeff").get<double>();
        }
    return RateModel(std::move(states), std::move(base), std::move(inter));
}

RateModel RateModel::from_spec(const std::string& spec) {
    if (spec.find('{') != std::string::npos) return from_json(nlohmann::json::parse(spec));
    auto colon = spec.find(':');
    std::string name = spec.substr(0, colon);
    if (name == "sis") return sis(colon == std::string::npos ? 1.0 : std::stod(spec.substr(colon + 1)));
    if (name == "sir") return sir(colon == std::string::npos ? 1.0 : std::stod(spec.substr(colon + 1)));
    if (name == "zero") {
        std::vector<std::string> states;
        std::stringstream ss(colon == std::string::npos ? "S,I" : spec.substr(colon + 1));
        std::string tok;
        while (std::getline(ss, tok, ',')) states.push_back(tok);
        return zero(std::move(states));
    }
    std::ifstream in(spec);
    if (!in) throw std::invalid_argument("RateModel: unrecognized model spec '" + spec + "'");
    nlohmann::json j;
    in >> j;
    return from_json(j);
}

nlohmann::json RateModel::to_json() const {
    nlohmann::json j;
    j["states"] = states_;
    const int s = num_states();
    for (int f = 0; f < s; ++f)
        for (int t = 0; t < s; ++t) {
            if (f == t) continue;
            if (base(f, t) != 0.0)
                j["base"].push_back({{"from", states_[f]}, {"to", states_[t]}, {"rate", base(f, t)}});
            for (int v = 0; v < s; ++v)
                if (interaction(f, t, v) != 0.0)
                    j["interaction"].push_back({{"from", states_[f]},
                                                {"to", states_[t]},
                                                {"via", states_[v]},
                                                {"coeff", interaction(f, t, v)}});
        }
    return j;
}

void SumTree::init(const std::vector<double>& leaves) {
    n_ = static_cast<int>(leaves.size());
    base_ = 1;
    while (base_ < n_) base_ <<= 1;
    node_.assign(static_cast<std::size_t>(2) * base_, 0.0);
    std::copy(leaves.begin(), leaves.end(), node_.begin() + base_);
    for (int i = base_ - 1; i >= 1; --i) node_[i] = node_[2 * i] + node_[2 * i + 1];
}

void SumTree::update(int i, double v) {
    std::size_t p = static_cast<std::size_t>(base_) + i;
    node_[p] = v;
    for (p >>= 1; p >= 1; p >>= 1) node_[p] = node_[2 * p] + node_[2 * p + 1];
}

int SumTree::sample(double u) const {
    double target = u * node_[1];
    std::size_t idx = 1;
    while (idx < static_cast<std::size_t>(base_)) {
        const double left = node_[2 * idx];
        if (target < left) {
            idx = 2 * idx;
        } else {
            target -= left;
            idx = 2 * idx + 1;
        }
    }
    int leaf = static_cast<int>(idx) - base_;
    if (leaf >= n_) leaf = n_ - 1;
    while (leaf > 0 && node_[static_cast<std::size_t>(base_) + leaf] <= 0.0) --leaf;
    return leaf;
}

InitialCondition InitialCondition::explicit_states(std::vector<int> labels) {
    InitialCondition ic;
    ic.kind = Kind::explicit_labels;
    ic.labels = std::move(labels);
    return ic;
}

InitialCondition InitialCondition::iid(StepFunction probabilities) {
    InitialCondition ic;
    ic.kind = Kind::iid_density;
    ic.density = std::move(probabilities);
    return ic;
}

InitialCondition InitialCondition::degree_zero(int zero_degree_state, int default_state) {
    InitialCondition ic;
    ic.kind = Kind::degree_zero;
    ic.zero_degree_state = zero_degree_state;
    ic.default_state = default_state;
    return ic;
}

double ProcessState::vertex_rate(std::uint32_t i) const {
    double phi_buf[kMaxStates];
    for (int s = 0; s < ns_; ++s) phi_buf[s] = counts_[idx(i, s)] * inv_nkappa_;
    return model_->total_outflow(state_[i], phi_buf);
}

ProcessState ProcessState::init(const SampledGraph& graph, const RateModel& model,
                                const InitialCondition& initial, std::uint64_t seed) {
    ProcessState st;
    st.graph_ = &graph;
    st.model_ = &model;
    st.ns_ = model.num_states();
    st.inv_nkappa_ = 1.0 / (static_cast<double>(graph.n) * graph.kappa);
    st.rng_ = SplitMix64(stream_seed(seed, "events"));
    st.state_.assign(graph.n, 0);

    SplitMix64 init_rng(stream_seed(seed, "init"));
    switch (initial.kind) {
        case InitialCondition::Kind::explicit_labels: {
            if (initial.labels.size() != graph.n)
                throw std::invalid_argument("init_process: explicit labels must cover all vertices");
            for (std::uint32_t i = 0; i < graph.n; ++i) {
                int s = initial.labels[i];
                if (s < 0 || s >= st.ns_) throw std::invalid_argument("init_process: state index out of range");
                st.state_[i] = static_cast<std::uint8_t>(s);
            }
            break;
        }
        case InitialCondition::Kind::iid_density: {
            const StepFunction& u0 = initial.density;
            if (u0.num_states() != st.ns_)
                throw std::invalid_argument("init_process: probability function has wrong state count");
            for (int k = 0; k < u0.grid_size(); ++k) {
                double sum = 0.0;
                for (int s = 0; s < st.ns_; ++s) {
                    if (u0.at(k, s) < -1e-9)
                        throw std::invalid_argument("init_process: negative initial probability");
                    sum += u0.at(k, s);
                }
                if (std::abs(sum - 1.0) > 1e-9)
                    throw std::invalid_argument("init_process: initial probabilities must sum to 1 per cell");
            }
            for (std::uint32_t i = 0; i < graph.n; ++i) {
                const double u = init_rng.uniform();
                double cum = 0.0;
                int chosen = st.ns_ - 1;
                for (int s = 0; s < st.ns_; ++s) {
                    cum += u0.value_at(graph.positions[i], s);
                    if (u < cum) {
                        chosen = s;
                        break;
                    }
                }
                st.state_[i] = static_cast<std::uint8_t>(chosen);
            }
            break;
        }
        case InitialCondition::Kind::degree_zero: {
            if (initial.zero_degree_state < 0 || initial.zero_degree_state >= st.ns_ ||
                initial.default_state < 0 || initial.default_state >= st.ns_)
                throw std::invalid_argument("init_process: state index out of range");
            for (std::uint32_t i = 0; i < graph.n; ++i)
                st.state_[i] = static_cast<std::uint8_t>(
                    graph.degree(i) == 0 ? initial.zero_degree_state : initial.default_state);
            break;
        }
    }

    st.counts_.assign(static_cast<std::size_t>(graph.n) * st.ns_, 0);
    for (std::uint32_t i = 0; i < graph.n; ++i)
        for (std::uint32_t j : graph.neighbors_of(i)) ++st.counts_[st.idx(i, st.state_[j])];
    st.global_.assign(st.ns_, 0);
    for (std::uint32_t i = 0; i < graph.n; ++i) ++st.global_[st.state_[i]];

    st.rate_.resize(graph.n);
    for (std::uint32_t i = 0; i < graph.n; ++i) st.rate_[i] = st.vertex_rate(i);
    st.tree_.init(st.rate_);
    return st;
}

std::optional<TransitionEvent> ProcessState::step() {
    const double total = tree_.total();
    if (!(total > 0.0)) return std::nullopt;

    time_ += rng_.exponential(total);
    const std::uint32_t i = static_cast<std::uint32_t>(tree_.sample(rng_.uniform()));

    const int from = state_[i];
    double phi_buf[kMaxStates];
    for (int s = 0; s < ns_; ++s) phi_buf[s] = counts_[idx(i, s)] * inv_nkappa_;

    // target state proportional to its rate; same summation order as
    // total_outflow keeps selection and maintained totals consistent
    const double pick = rng_.uniform() * rate_[i];
    double cum = 0.0;
    int to = -1;
    for (int s = 0; s < ns_; ++s) {
        if (s == from) continue;
        const double r = model_->rate(from, s, phi_buf);
        cum += r;
        if (pick < cum) {
            to = s;
            break;
        }
    }
    if (to < 0) {  // numerical remainder: take the last state with positive rate
        for (int s = ns_ - 1; s >= 0; --s)
            if (s != from && model_->rate(from, s, phi_buf) > 0.0) {
                to = s;
                break;
            }
        if (to < 0) return std::nullopt;
    }

    state_[i] = static_cast<std::uint8_t>(to);
    --global_[from];
    ++global_[to];
    for (std::uint32_t j : graph_->neighbors_of(i)) {
        --counts_[idx(j, from)];
        ++counts_[idx(j, to)];
        rate_[j] = vertex_rate(j);
        tree_.update(static_cast<int>(j), rate_[j]);
    }
    rate_[i] = vertex_rate(i);
    tree_.update(static_cast<int>(i), rate_[i]);

    return TransitionEvent{time_, i, from, to};
}

double ProcessState::phi_l1(std::uint32_t i) const {
    double acc = 0.0;
    for (int s = 0; s < ns_; ++s) acc += phi(i, s);
    return acc;
}

std::vector<double> ProcessState::state_density() const {
    std::vector<double> out(ns_);
    for (int s = 0; s < ns_; ++s) out[s] = static_cast<double>(global_[s]) / graph_->n;
    return out;
}

ProcessState::Consistency ProcessState::consistency() const {
    Consistency c;
    double sum = 0.0;
    for (std::uint32_t i = 0; i < graph_->n; ++i) {
        const double fresh = vertex_rate(i);
        sum += fresh;
        const double err = std::abs(fresh - rate_[i]) / std::max(1.0, std::abs(fresh));
        c.max_rate_rel_err = std::max(c.max_rate_rel_err, err);
    }
    c.tree_rel_err = std::abs(tree_.total() - sum) / std::max(1.0, sum);
    return c;
}

Trajectory run(ProcessState& state, double horizon, int record_grid_m, double record_dt) {
    if (horizon <= 0.0 || record_dt <= 0.0 || record_grid_m < 1)
        throw std::invalid_argument("run: horizon, record_dt and record grid must be positive");
    const SampledGraph& g = state.graph();
    const int m = record_grid_m;
    const int ns = state.model().num_states();
    const double n = static_cast<double>(g.n);

    std::vector<int> box(g.n);
    for (std::uint32_t i = 0; i < g.n; ++i)
        box[i] = std::min(static_cast<int>(g.positions[i] * m), m - 1);

    // run-local aggregation lags one event behind the process state so each
    // record reflects the configuration in force at the record time
    std::vector<std::int64_t> box_counts(static_cast<std::size_t>(m) * ns, 0);
    std::vector<std::int64_t> global(ns, 0);
    for (std::uint32_t i = 0; i < g.n; ++i) {
        ++box_counts[static_cast<std::size_t>(box[i]) * ns + state.vertex_states()[i]];
        ++global[state.vertex_states()[i]];
    }

    Trajectory traj;
    traj.grid_m = m;
    traj.labels = state.model().states();
    const auto n_records = static_cast<std::size_t>(std::floor(horizon / record_dt + 1e-9)) + 1;

    auto record = [&](double t) {
        StepFunction f(m, traj.labels);
        for (int k = 0; k < m; ++k)
            for (int s = 0; s < ns; ++s)
                f.at(k, s) = static_cast<double>(box_counts[static_cast<std::size_t>(k) * ns + s]) * m / n;
        std::vector<double> dens(ns);
        for (int s = 0; s < ns; ++s) dens[s] = static_cast<double>(global[s]) / n;
        traj.times.push_back(t);
        traj.box_density.push_back(std::move(f));
        traj.state_density.push_back(std::move(dens));
    };

    std::size_t r = 0;
    while (r < n_records) {
        auto ev = state.step();
        if (!ev) break;
        while (r < n_records && static_cast<double>(r) * record_dt < ev->time) {
            record(static_cast<double>(r) * record_dt);
            ++r;
        }
        if (r >= n_records) break;
        std::size_t b = static_cast<std::size_t>(box[ev->vertex]) * ns;
        --box_counts[b + ev->from];
        ++box_counts[b + ev->to];
        --global[ev->from];
        ++global[ev->to];
    }
    while (r < n_records) {  // absorbed or horizon reached
        record(static_cast<double>(r) * record_dt);
        ++r;
    }
    return traj;
}

}  // namespace graphmf
