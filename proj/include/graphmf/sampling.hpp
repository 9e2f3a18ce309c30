#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "graphmf/kernels.hpp"

namespace graphmf {

enum class VertexMode { grid, ordered_uniform };

std::string to_string(VertexMode mode);
VertexMode vertex_mode_from_string(const std::string& s);

/// Simple undirected graph sampled from a graphon, with the vertex positions
/// and density parameter that produced it. Adjacency is CSR with both
/// directions stored; neighbor lists are sorted ascending.
struct SampledGraph {
    std::uint32_t n = 0;
    double kappa = 1.0;
    std::uint64_t seed = 0;
    VertexMode mode = VertexMode::grid;
    std::vector<double> positions;       // nondecreasing, in [0,1]
    std::vector<std::uint64_t> offsets;  // size n+1
    std::vector<std::uint32_t> neighbors;

    std::uint32_t degree(std::uint32_t i) const {
        return static_cast<std::uint32_t>(offsets[i + 1] - offsets[i]);
    }
    std::span<const std::uint32_t> neighbors_of(std::uint32_t i) const {
        return {neighbors.data() + offsets[i], neighbors.data() + offsets[i + 1]};
    }
    std::uint64_t edge_count() const { return neighbors.size() / 2; }
};

/// Connect each pair {i,j}, i<j, independently with probability
/// kappa * W(U_i, U_j). Pairs are visited in lexicographic order within
/// per-row RNG streams derived from the seed, so the result is bit-identical
/// regardless of thread count. A skip-ahead geometric sampler is used when
/// kappa * max(W) <= 0.1, keeping sparse sampling near O(edges).
SampledGraph sample_graph(const GraphonKernel& kernel, std::uint32_t n, double kappa, VertexMode mode,
                          std::uint64_t seed);

/// Blockwise kernel on the n-grid with cell (i,j) value a_ij.
GraphonKernel empirical_graphon(const SampledGraph& graph);

/// Row sums of the adjacency matrix divided by n, as a step function.
StepFunction empirical_degree_density(const SampledGraph& graph);

// Edge-list text format: header "N kappa seed mode", one "i j" line per edge
// (1-based, i<j). Positions are regenerated from seed/mode on load. The
// binary format stores positions verbatim. Both round-trip exactly.
void save_edge_list(const SampledGraph& graph, const std::string& path);
SampledGraph load_edge_list(const std::string& path);
void save_binary(const SampledGraph& graph, const std::string& path);
SampledGraph load_binary(const std::string& path);

namespace detail {
std::vector<double> draw_positions(std::uint32_t n, VertexMode mode, std::uint64_t seed);
SampledGraph assemble_graph(std::uint32_t n, double kappa, std::uint64_t seed, VertexMode mode,
                            std::vector<double> positions,
                            const std::vector<std::vector<std::uint32_t>>& row_edges);
}  // namespace detail

}  // namespace graphmf
