#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "graphmf/rng.hpp"
#include "graphmf/sampling.hpp"
#include "graphmf/step_function.hpp"
#include "json.hpp"

namespace graphmf {

/// Finite state set with affine-in-phi transition rates
///   q(from -> to, phi) = base[from][to] + sum_via inter[from][to][via] * phi_via.
/// All coefficients are nonnegative, which makes every rate nonnegative on
/// phi >= 0 and globally Lipschitz with constant sum_via inter[from][to][via].
class RateModel {
  public:
    RateModel(std::vector<std::string> states, std::vector<double> base_from_to,
              std::vector<double> inter_from_to_via);

    static RateModel zero(std::vector<std::string> states);
    static RateModel sis(double beta);  // states {S, I}; recovery rate 1, infection beta * phi_I
    static RateModel sir(double beta);  // states {S, I, R}; recovery rate 1
    static RateModel from_json(const nlohmann::json& j);
    /// "sis:2.0", "sir:1.5", inline JSON, or a JSON file path.
    static RateModel from_spec(const std::string& spec);
    nlohmann::json to_json() const;

    int num_states() const { return static_cast<int>(states_.size()); }
    const std::vector<std::string>& states() const { return states_; }
    int index_of(const std::string& label) const;

    double base(int from, int to) const { return base_[idx2(from, to)]; }
    double interaction(int from, int to, int via) const { return inter_[idx3(from, to, via)]; }

    double rate(int from, int to, const double* phi) const {
        double r = base_[idx2(from, to)];
        const double* b = inter_.data() + idx3(from, to, 0);
        for (int v = 0; v < num_states(); ++v) r += b[v] * phi[v];
        return r;
    }
    /// Total outflow rate from a state: sum over to != from of rate().
    double total_outflow(int from, const double* phi) const {
        double acc = 0.0;
        for (int to = 0; to < num_states(); ++to)
            if (to != from) acc += rate(from, to, phi);
        return acc;
    }

    double lipschitz(int from, int to) const { return lipschitz_[idx2(from, to)]; }
    double lipschitz_bound() const { return lipschitz_bound_; }
    double qmax_bound() const { return qmax_bound_; }

  private:
    std::size_t idx2(int a, int b) const { return static_cast<std::size_t>(a) * states_.size() + b; }
    std::size_t idx3(int a, int b, int c) const {
        return (static_cast<std::size_t>(a) * states_.size() + b) * states_.size() + c;
    }
    std::vector<std::string> states_;
    std::vector<double> base_;       // [from][to]
    std::vector<double> inter_;      // [from][to][via]
    std::vector<double> lipschitz_;  // [from][to]
    double lipschitz_bound_ = 0.0;
    double qmax_bound_ = 0.0;
};

/// Binary sum tree over per-vertex rates: O(log n) proportional sampling and
/// single-entry update. Internal nodes are recomputed as child sums, so the
/// root never accumulates incremental drift.
class SumTree {
  public:
    void init(const std::vector<double>& leaves);
    void update(int i, double v);
    double total() const { return node_.empty() ? 0.0 : node_[1]; }
    double leaf(int i) const { return node_[static_cast<std::size_t>(base_) + i]; }
    int sample(double u) const;  // u in [0,1)

  private:
    int n_ = 0;
    int base_ = 1;
    std::vector<double> node_;
};

struct InitialCondition {
    enum class Kind { explicit_labels, iid_density, degree_zero };
    Kind kind = Kind::explicit_labels;
    std::vector<int> labels;
    StepFunction density;
    int zero_degree_state = -1;
    int default_state = -1;

    static InitialCondition explicit_states(std::vector<int> labels);
    /// i.i.d. per vertex from the probability step function evaluated at U_i.
    static InitialCondition iid(StepFunction probabilities);
    /// Vertices of degree zero start in one state, everyone else in another.
    static InitialCondition degree_zero(int zero_degree_state, int default_state);
};

struct TransitionEvent {
    double time = 0.0;
    std::uint32_t vertex = 0;
    int from = 0;
    int to = 0;
};

/// Exact event-driven simulation of the local-density dependent process:
/// Gillespie's direct method with competing exponential clocks. Environment
/// vectors are kept as integer neighbor-state counts and scaled by 1/(n*kappa)
/// only at rate evaluation, so they never drift.
class ProcessState {
  public:
    static ProcessState init(const SampledGraph& graph, const RateModel& model,
                             const InitialCondition& initial, std::uint64_t seed);

    /// One event; std::nullopt once the total rate is zero (absorbed).
    std::optional<TransitionEvent> step();

    double time() const { return time_; }
    double total_rate() const { return tree_.total(); }
    const SampledGraph& graph() const { return *graph_; }
    const RateModel& model() const { return *model_; }
    const std::vector<std::uint8_t>& vertex_states() const { return state_; }

    double phi(std::uint32_t i, int s) const { return counts_[idx(i, s)] * inv_nkappa_; }
    double phi_l1(std::uint32_t i) const;
    std::vector<double> state_density() const;  // global fractions, exact

    struct Consistency {
        double max_rate_rel_err = 0.0;
        double tree_rel_err = 0.0;
    };
    /// Compare maintained rates and tree root against a full recomputation.
    Consistency consistency() const;

  private:
    std::size_t idx(std::uint32_t i, int s) const {
        return static_cast<std::size_t>(i) * ns_ + static_cast<std::size_t>(s);
    }
    double vertex_rate(std::uint32_t i) const;

    const SampledGraph* graph_ = nullptr;
    const RateModel* model_ = nullptr;
    int ns_ = 0;
    double inv_nkappa_ = 0.0;
    std::vector<std::uint8_t> state_;
    std::vector<std::uint32_t> counts_;  // n x S neighbor-state counts
    std::vector<std::int64_t> global_;   // per-state vertex counts
    std::vector<double> rate_;
    SumTree tree_;
    double time_ = 0.0;
    SplitMix64 rng_;
};

/// Time series of box-aggregated state densities. Box values follow the
/// M/n normalization (counts divided by n/M, not by the box population);
/// state_density rows are exact global fractions.
struct Trajectory {
    int grid_m = 0;
    std::vector<std::string> labels;
    std::vector<double> times;
    std::vector<StepFunction> box_density;
    std::vector<std::vector<double>> state_density;
};

/// Run until time >= horizon, recording at multiples of record_dt. Box
/// membership (U_i in [k/M,(k+1)/M)) is fixed at entry.
Trajectory run(ProcessState& state, double horizon, int record_grid_m, double record_dt);

}  // namespace graphmf
