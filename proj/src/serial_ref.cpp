#include "graphmf/serial_ref.hpp"

#include <cmath>
#include <stdexcept>

#include "graphmf/rng.hpp"

namespace graphmf::serial {

StepFunction apply_operator(const GraphonKernel& kernel, const StepFunction& f, int quadrature_m) {
    if (quadrature_m <= 0) throw std::domain_error("apply_operator: quadrature grid must be positive");
    int w = common_grid(f.grid_size(), quadrature_m);
    if (kernel.repr() == GraphonKernel::Repr::Blockwise) w = common_grid(w, kernel.block_size());
    StepFunction fw = f.on_grid(w);
    StepFunction out(w, f.state_labels());
    for (int k = 0; k < w; ++k) {
        const double x = (k + 0.5) / w;
        for (int l = 0; l < w; ++l) {
            const double wkl = kernel.evaluate(x, (l + 0.5) / w);
            for (int s = 0; s < f.num_states(); ++s) out.at(k, s) += wkl * fw.at(l, s);
        }
        for (int s = 0; s < f.num_states(); ++s) out.at(k, s) /= w;
    }
    return out.on_grid(quadrature_m);
}

GraphonKernel discretize(const GraphonKernel& kernel, int m) {
    if (m <= 0) throw std::domain_error("discretize: grid must be positive");
    std::vector<double> cells(static_cast<std::size_t>(m) * m);
    for (int k = 0; k < m; ++k)
        for (int l = k; l < m; ++l) {
            double v = kernel.evaluate(static_cast<double>(k + 1) / m, static_cast<double>(l + 1) / m);
            cells[static_cast<std::size_t>(k) * m + l] = v;
            cells[static_cast<std::size_t>(l) * m + k] = v;
        }
    return GraphonKernel::blockwise(m, std::move(cells), kernel.unit_range());
}

StepFunction meanfield_rhs(const GraphonKernel& kernel_disc, const RateModel& model,
                           const StepFunction& v) {
    const int m = v.grid_size();
    const int ns = v.num_states();
    if (kernel_disc.repr() != GraphonKernel::Repr::Blockwise || kernel_disc.block_size() != m)
        throw std::invalid_argument("meanfield_rhs: kernel must be blockwise on the solution grid");
    const auto& cells = kernel_disc.block_values();
    StepFunction out(m, v.state_labels());
    std::vector<double> phi(ns);
    for (int k = 0; k < m; ++k) {
        for (int s = 0; s < ns; ++s) phi[s] = 0.0;
        for (int l = 0; l < m; ++l) {
            const double w = cells[static_cast<std::size_t>(k) * m + l];
            for (int s = 0; s < ns; ++s) phi[s] += w * v.at(l, s);
        }
        for (int s = 0; s < ns; ++s) phi[s] /= m;
        for (int from = 0; from < ns; ++from) {
            const double vf = v.at(k, from);
            for (int to = 0; to < ns; ++to) {
                if (to == from) continue;
                const double flow = model.rate(from, to, phi.data()) * vf;
                out.at(k, to) += flow;
                out.at(k, from) -= flow;
            }
        }
    }
    return out;
}

SampledGraph sample_graph(const GraphonKernel& kernel, std::uint32_t n, double kappa,
                          VertexMode mode, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_graph: need at least one vertex");
    if (!kernel.unit_range()) throw std::invalid_argument("sample_graph: kernel must take values in [0,1]");
    if (kappa <= 0.0 || kappa > 1.0) throw std::invalid_argument("sample_graph: kappa must be in (0,1]");
    std::vector<double> pos = graphmf::detail::draw_positions(n, mode, seed);
    const double pmax = kappa * kernel.max_abs();
    const bool sparse = pmax <= 0.1 && kernel.max_is_exact();
    std::vector<std::vector<std::uint32_t>> rows(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        SplitMix64 rng(stream_seed(seed, "edges", i));
        if (sparse) {
            if (pmax <= 0.0) continue;
            const double log_skip = std::log1p(-pmax);
            std::uint64_t j = i;
            while (true) {
                const double u = rng.uniform();
                j += 1 + static_cast<std::uint64_t>(std::floor(std::log1p(-u) / log_skip));
                if (j >= n) break;
                const double p = kappa * kernel.evaluate(pos[i], pos[j]);
                if (rng.uniform() * pmax < p) rows[i].push_back(static_cast<std::uint32_t>(j));
            }
        } else {
            for (std::uint32_t j = i + 1; j < n; ++j) {
                const double p = kappa * kernel.evaluate(pos[i], pos[j]);
                if (p > 1.0 + 1e-12)
                    throw std::runtime_error("sample_graph: edge probability kappa*W exceeds 1");
                if (rng.uniform() < p) rows[i].push_back(j);
            }
        }
    }
    return graphmf::detail::assemble_graph(n, kappa, seed, mode, std::move(pos), rows);
}

double op2_norm(const GraphonKernel& kernel, int m) {
    GraphonKernel disc = serial::discretize(kernel, m);
    std::vector<double> a = disc.block_values();
    for (double& v : a) v /= m;
    auto matvec = [&](const std::vector<double>& x, std::vector<double>& y) {
        for (int i = 0; i < m; ++i) {
            double acc = 0.0;
            const double* row = a.data() + static_cast<std::size_t>(i) * m;
            for (int j = 0; j < m; ++j) acc += row[j] * x[j];
            y[i] = acc;
        }
    };
    SplitMix64 rng(stream_seed(0x5eedULL, "power-start", static_cast<std::uint64_t>(m)));
    std::vector<double> x(m), ax(m), aax(m);
    for (double& v : x) v = rng.uniform() - 0.5;
    double nrm = 0.0;
    for (double v : x) nrm += v * v;
    nrm = std::sqrt(nrm);
    for (double& v : x) v /= nrm;
    double lambda_sq = 0.0;
    for (int it = 0; it < 10000; ++it) {
        matvec(x, ax);
        matvec(ax, aax);
        double rq = 0.0, nn = 0.0;
        for (int i = 0; i < m; ++i) {
            rq += x[i] * aax[i];
            nn += aax[i] * aax[i];
        }
        nn = std::sqrt(nn);
        if (nn <= 1e-300) return 0.0;
        for (int i = 0; i < m; ++i) x[i] = aax[i] / nn;
        if (std::abs(rq - lambda_sq) <= 1e-10 * std::max(1.0, std::abs(rq))) {
            lambda_sq = rq;
            break;
        }
        lambda_sq = rq;
    }
    return std::sqrt(std::max(lambda_sq, 0.0));
}

double interval_cut_surrogate(const GraphonKernel& kernel, int m) {
    if (m < 1 || m > 60)
        throw std::invalid_argument("serial interval_cut_surrogate: grid must be in 1..60");
    GraphonKernel disc = serial::discretize(kernel, m);
    const auto& cells = disc.block_values();
    double best = 0.0;
    for (int a1 = 0; a1 <= m; ++a1)
        for (int b1 = a1 + 1; b1 <= m; ++b1)
            for (int a2 = 0; a2 <= m; ++a2)
                for (int b2 = a2 + 1; b2 <= m; ++b2) {
                    double acc = 0.0;
                    for (int i = a1; i < b1; ++i)
                        for (int j = a2; j < b2; ++j) acc += cells[static_cast<std::size_t>(i) * m + j];
                    best = std::max(best, std::abs(acc));
                }
    return best / (static_cast<double>(m) * m);
}

}  // namespace graphmf::serial
