#include "graphmf/sampling.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "graphmf/rng.hpp"

namespace graphmf {

std::string to_string(VertexMode mode) {
    return mode == VertexMode::grid ? "grid" : "uniform";
}

VertexMode vertex_mode_from_string(const std::string& s) {
    if (s == "grid") return VertexMode::grid;
    if (s == "uniform" || s == "ordered_uniform") return VertexMode::ordered_uniform;
    throw std::invalid_argument("unknown vertex mode '" + s + "'");
}

namespace detail {

std::vector<double> draw_positions(std::uint32_t n, VertexMode mode, std::uint64_t seed) {
    std::vector<double> pos(n);
    if (mode == VertexMode::grid) {
        for (std::uint32_t i = 0; i < n; ++i) pos[i] = static_cast<double>(i + 1) / n;
    } else {
        SplitMix64 rng(stream_seed(seed, "positions"));
        for (double& p : pos) p = rng.uniform();
        std::sort(pos.begin(), pos.end());
    }
    return pos;
}

SampledGraph assemble_graph(std::uint32_t n, double kappa, std::uint64_t seed, VertexMode mode,
                            std::vector<double> positions,
                            const std::vector<std::vector<std::uint32_t>>& row_edges) {
    SampledGraph g;
    g.n = n;
    g.kappa = kappa;
    g.seed = seed;
    g.mode = mode;
    g.positions = std::move(positions);
    std::vector<std::uint32_t> deg(n, 0);
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j : row_edges[i]) {
            ++deg[i];
            ++deg[j];
        }
    g.offsets.assign(n + 1, 0);
    for (std::uint32_t i = 0; i < n; ++i) g.offsets[i + 1] = g.offsets[i] + deg[i];
    g.neighbors.resize(g.offsets[n]);
    std::vector<std::uint64_t> cursor(g.offsets.begin(), g.offsets.end() - 1);
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j : row_edges[i]) {
            g.neighbors[cursor[i]++] = j;
            g.neighbors[cursor[j]++] = i;
        }
    // rows (i, j>i) are emitted in order, so lists are sorted already except
    // for the back-edges; a per-vertex sort keeps the invariant simple
    for (std::uint32_t i = 0; i < n; ++i)
        std::sort(g.neighbors.begin() + static_cast<std::ptrdiff_t>(g.offsets[i]),
                  g.neighbors.begin() + static_cast<std::ptrdiff_t>(g.offsets[i + 1]));
    return g;
}

}  // namespace detail

SampledGraph sample_graph(const GraphonKernel& kernel, std::uint32_t n, double kappa, VertexMode mode,
                          std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_graph: need at least one vertex");
    if (!kernel.unit_range()) throw std::invalid_argument("sample_graph: kernel must take values in [0,1]");
    if (kappa <= 0.0 || kappa > 1.0) throw std::invalid_argument("sample_graph: kappa must be in (0,1]");

    std::vector<double> pos = detail::draw_positions(n, mode, seed);
    const double pmax = kappa * kernel.max_abs();
    const bool sparse = pmax <= 0.1 && kernel.max_is_exact();
    std::vector<std::vector<std::uint32_t>> rows(n);

    const int ni = static_cast<int>(n);
    if (sparse) {
        const double log_skip = pmax > 0.0 ? std::log1p(-pmax) : 0.0;
#pragma omp parallel for schedule(dynamic, 64)
        for (int i = 0; i < ni; ++i) {
            if (pmax <= 0.0) continue;
            SplitMix64 rng(stream_seed(seed, "edges", static_cast<std::uint64_t>(i)));
            std::uint64_t j = static_cast<std::uint64_t>(i);
            while (true) {
                const double u = rng.uniform();
                const double skip = std::floor(std::log1p(-u) / log_skip);
                j += 1 + static_cast<std::uint64_t>(skip);
                if (j >= n) break;
                const double p = kappa * kernel.evaluate(pos[i], pos[j]);
                if (p > pmax * (1.0 + 1e-12))
                    throw std::runtime_error("sample_graph: kernel exceeds its certified maximum");
                if (rng.uniform() * pmax < p) rows[i].push_back(static_cast<std::uint32_t>(j));
            }
        }
    } else {
#pragma omp parallel for schedule(dynamic, 16)
        for (int i = 0; i < ni; ++i) {
            SplitMix64 rng(stream_seed(seed, "edges", static_cast<std::uint64_t>(i)));
            for (std::uint32_t j = static_cast<std::uint32_t>(i) + 1; j < n; ++j) {
                const double p = kappa * kernel.evaluate(pos[i], pos[j]);
                if (p > 1.0 + 1e-12)
                    throw std::runtime_error("sample_graph: edge probability kappa*W exceeds 1");
                if (rng.uniform() < p) rows[i].push_back(j);
            }
        }
    }
    return detail::assemble_graph(n, kappa, seed, mode, std::move(pos), rows);
}

GraphonKernel empirical_graphon(const SampledGraph& graph) {
    const std::uint32_t n = graph.n;
    if (n > 4096) throw std::invalid_argument("empirical_graphon: dense kernel too large (n > 4096)");
    std::vector<double> cells(static_cast<std::size_t>(n) * n, 0.0);
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j : graph.neighbors_of(i)) cells[static_cast<std::size_t>(i) * n + j] = 1.0;
    return GraphonKernel::blockwise(static_cast<int>(n), std::move(cells));
}

StepFunction empirical_degree_density(const SampledGraph& graph) {
    StepFunction f(static_cast<int>(graph.n), {""});
    for (std::uint32_t i = 0; i < graph.n; ++i)
        f.at(static_cast<int>(i)) = static_cast<double>(graph.degree(i)) / graph.n;
    return f;
}

void save_edge_list(const SampledGraph& graph, const std::string& path) {
    std::FILE* out = std::fopen(path.c_str(), "w");
    if (!out) throw std::runtime_error("save_edge_list: cannot open " + path);
    std::fprintf(out, "%u %.17g %" PRIu64 " %s\n", graph.n, graph.kappa, graph.seed,
                 to_string(graph.mode).c_str());
    for (std::uint32_t i = 0; i < graph.n; ++i)
        for (std::uint32_t j : graph.neighbors_of(i))
            if (j > i) std::fprintf(out, "%u %u\n", i + 1, j + 1);
    std::fclose(out);
}

SampledGraph load_edge_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_edge_list: cannot open " + path);
    std::uint32_t n = 0;
    double kappa = 0.0;
    std::uint64_t seed = 0;
    std::string mode_str = "grid";
    std::string header;
    std::getline(in, header);
    {
        std::istringstream hs(header);
        hs >> n >> kappa >> seed;
        if (!(hs >> mode_str)) mode_str = "grid";
    }
    VertexMode mode = vertex_mode_from_string(mode_str);
    std::vector<std::vector<std::uint32_t>> rows(n);
    std::uint32_t a = 0, b = 0;
    while (in >> a >> b) {
        if (a < 1 || b < 1 || a > n || b > n || a == b)
            throw std::runtime_error("load_edge_list: bad edge");
        if (a > b) std::swap(a, b);
        rows[a - 1].push_back(b - 1);
    }
    for (auto& r : rows) std::sort(r.begin(), r.end());
    return detail::assemble_graph(n, kappa, seed, mode, detail::draw_positions(n, mode, seed), rows);
}

namespace {

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
}

constexpr std::uint32_t kBinaryMagic = 0x474D4631;  // "GMF1"

}  // namespace

void save_binary(const SampledGraph& graph, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_binary: cannot open " + path);
    write_pod(out, kBinaryMagic);
    write_pod(out, graph.n);
    write_pod(out, graph.kappa);
    write_pod(out, graph.seed);
    std::uint32_t mode = graph.mode == VertexMode::grid ? 0 : 1;
    write_pod(out, mode);
    out.write(reinterpret_cast<const char*>(graph.positions.data()),
              static_cast<std::streamsize>(graph.positions.size() * sizeof(double)));
    std::uint64_t nnz = graph.neighbors.size();
    write_pod(out, nnz);
    out.write(reinterpret_cast<const char*>(graph.offsets.data()),
              static_cast<std::streamsize>(graph.offsets.size() * sizeof(std::uint64_t)));
    out.write(reinterpret_cast<const char*>(graph.neighbors.data()),
              static_cast<std::streamsize>(nnz * sizeof(std::uint32_t)));
}

SampledGraph load_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_binary: cannot open " + path);
    std::uint32_t magic = 0;
    read_pod(in, magic);
    if (magic != kBinaryMagic) throw std::runtime_error("load_binary: bad magic");
    SampledGraph g;
    read_pod(in, g.n);
    read_pod(in, g.kappa);
    read_pod(in, g.seed);
    std::uint32_t mode = 0;
    read_pod(in, mode);
    g.mode = mode == 0 ? VertexMode::grid : VertexMode::ordered_uniform;
    g.positions.resize(g.n);
    in.read(reinterpret_cast<char*>(g.positions.data()),
            static_cast<std::streamsize>(g.positions.size() * sizeof(double)));
    std::uint64_t nnz = 0;
    read_pod(in, nnz);
    g.offsets.resize(g.n + 1);
    in.read(reinterpret_cast<char*>(g.offsets.data()),
            static_cast<std::streamsize>(g.offsets.size() * sizeof(std::uint64_t)));
    g.neighbors.resize(nnz);
    in.read(reinterpret_cast<char*>(g.neighbors.data()),
            static_cast<std::streamsize>(nnz * sizeof(std::uint32_t)));
    if (!in) throw std::runtime_error("load_binary: truncated file");
    return g;
}

}  // namespace graphmf
