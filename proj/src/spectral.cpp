#include "graphmf/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "graphmf/rng.hpp"

namespace graphmf {

namespace {

// Parallel over rows, serial inner sums: results do not depend on the
// thread count.
void matvec(const SymMatrix& m, const std::vector<double>& x, std::vector<double>& y) {
    const int n = m.n;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        const double* row = m.a.data() + static_cast<std::size_t>(i) * n;
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += row[j] * x[j];
        y[i] = acc;
    }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

void normalize(std::vector<double>& x) {
    double nrm = std::sqrt(dot(x, x));
    if (nrm > 0.0)
        for (double& v : x) v /= nrm;
}

}  // namespace

SymMatrix operator_matrix(const GraphonKernel& kernel, int m) {
    GraphonKernel disc = discretize(kernel, m);
    SymMatrix a;
    a.n = m;
    a.a = disc.block_values();
    for (double& v : a.a) v /= m;
    return a;
}

PowerResult power_dominant(const SymMatrix& a, double tol, int max_iters) {
    const int n = a.n;
    PowerResult res;
    res.vec.assign(n, 0.0);
    SplitMix64 rng(stream_seed(0x5eedULL, "power-start", static_cast<std::uint64_t>(n)));
    std::vector<double> x(n), ax(n), aax(n);
    for (double& v : x) v = rng.uniform() - 0.5;
    normalize(x);

    double lambda_sq = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        matvec(a, x, ax);
        matvec(a, ax, aax);
        const double next = dot(x, aax);  // Rayleigh quotient of A^2
        const double nrm = std::sqrt(dot(aax, aax));
        res.iterations = it + 1;
        if (nrm <= 1e-300) {  // x (numerically) annihilated: dominant eigenvalue 0
            res.lambda = 0.0;
            res.vec = x;
            res.converged = true;
            return res;
        }
        for (int i = 0; i < n; ++i) x[i] = aax[i] / nrm;
        if (std::abs(next - lambda_sq) <= tol * std::max(1.0, std::abs(next))) {
            lambda_sq = next;
            res.converged = true;
            break;
        }
        lambda_sq = next;
    }

    const double mag = std::sqrt(std::max(lambda_sq, 0.0));
    matvec(a, x, ax);
    if (mag <= 1e-300) {
        res.lambda = 0.0;
        res.vec = x;
        return res;
    }
    // |x^T A x| near mag means a simple dominant eigenvalue of that sign; a
    // value strictly inside (-mag, mag) means x straddles a +/- tied pair,
    // in which case the positive member is extracted and returned first
    const double lam_signed = dot(x, ax);
    if (std::abs(lam_signed) >= (1.0 - 1e-6) * mag) {
        res.lambda = lam_signed > 0.0 ? mag : -mag;
        res.vec = x;
        return res;
    }
    std::vector<double> vpos(n);
    for (int i = 0; i < n; ++i) vpos[i] = x[i] + ax[i] / mag;
    if (dot(vpos, vpos) > 1e-9) {
        normalize(vpos);
        res.lambda = mag;
        res.vec = std::move(vpos);
    } else {
        res.lambda = -mag;
        res.vec = x;
    }
    return res;
}

std::vector<PowerResult> power_deflation(SymMatrix a, int k, double tol, int max_iters) {
    std::vector<PowerResult> out;
    for (int t = 0; t < k; ++t) {
        PowerResult r = power_dominant(a, tol, max_iters);
        out.push_back(r);
        if (t + 1 == k) break;
        const int n = a.n;
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a.at(i, j) -= r.lambda * r.vec[i] * r.vec[j];
    }
    return out;
}

std::vector<PowerResult> dense_eigen(const SymMatrix& a) {
    const int n = a.n;
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = a.at(i, j);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    if (solver.info() != Eigen::Success) throw std::runtime_error("dense_eigen: eigensolver failed");
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
        double ai = std::abs(solver.eigenvalues()(i)), aj = std::abs(solver.eigenvalues()(j));
        if (ai != aj) return ai > aj;
        return solver.eigenvalues()(i) > solver.eigenvalues()(j);  // positive first on ties
    });
    std::vector<PowerResult> out(n);
    for (int t = 0; t < n; ++t) {
        out[t].lambda = solver.eigenvalues()(order[t]);
        out[t].vec.resize(n);
        for (int i = 0; i < n; ++i) out[t].vec[i] = solver.eigenvectors()(i, order[t]);
        out[t].converged = true;
    }
    return out;
}

namespace {

StepFunction eigvec_to_stepfunction(const std::vector<double>& v, int m) {
    // matrix eigenvector has unit l2 norm; cells scaled by sqrt(m) give a
    // step function with unit L2 norm
    StepFunction f(m, {""});
    const double scale = std::sqrt(static_cast<double>(m));
    int arg = 0;
    for (int i = 1; i < m; ++i)
        if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
    const double sign = v[arg] < 0.0 ? -1.0 : 1.0;
    for (int i = 0; i < m; ++i) f.at(i) = sign * scale * v[i];
    return f;
}

}  // namespace

Spectrum spectrum(const GraphonKernel& kernel, int m, int k) {
    if (k < 1 || m < 1) throw std::domain_error("spectrum: m and k must be positive");
    if (k > m) throw std::domain_error("spectrum: k exceeds grid size");
    SymMatrix a = operator_matrix(kernel, m);
    std::vector<PowerResult> pairs;
    const bool use_power = m > 2000 || 16 * k <= m;
    if (use_power) {
        pairs = power_deflation(std::move(a), k);
    } else {
        pairs = dense_eigen(a);
        pairs.resize(k);
    }
    Spectrum s;
    s.grid_size = m;
    for (int t = 0; t < k; ++t) {
        s.eigenvalues.push_back(pairs[t].lambda);
        s.eigenfunctions.push_back(eigvec_to_stepfunction(pairs[t].vec, m));
    }
    return s;
}

GraphonKernel truncate(const GraphonKernel& kernel, int k, int m) {
    Spectrum s = spectrum(kernel, m, k);
    return GraphonKernel::finite_rank(s.eigenvalues, s.eigenfunctions);
}

double op2_norm(const GraphonKernel& kernel, int m) {
    SymMatrix a = operator_matrix(kernel, m);
    return std::abs(power_dominant(a).lambda);
}

double epidemic_threshold(const GraphonKernel& kernel, int m, double tol) {
    if (!kernel.unit_range()) throw std::invalid_argument("epidemic_threshold: kernel must be in [0,1]");
    SymMatrix a = operator_matrix(kernel, m);
    PowerResult r = power_dominant(a);
    if (r.lambda <= tol) throw std::runtime_error("epidemic_threshold: degenerate kernel (lambda_1 <= 0)");
    return 1.0 / r.lambda;
}

SymMatrix coarsen_matrix(const SymMatrix& a, int target) {
    if (a.n <= target) return a;
    const int c = (a.n + target - 1) / target;  // block edge length
    const int m = (a.n + c - 1) / c;
    SymMatrix out;
    out.n = m;
    out.a.assign(static_cast<std::size_t>(m) * m, 0.0);
#pragma omp parallel for schedule(static)
    for (int bi = 0; bi < m; ++bi) {
        const int i0 = bi * c, i1 = std::min(a.n, i0 + c);
        for (int bj = 0; bj < m; ++bj) {
            const int j0 = bj * c, j1 = std::min(a.n, j0 + c);
            double acc = 0.0;
            for (int i = i0; i < i1; ++i)
                for (int j = j0; j < j1; ++j) acc += a.at(i, j);
            // fine entries are kernel/n; the coarse entry is the block mean
            // of the kernel divided by the coarse cell count m
            out.at(bi, bj) = acc / ((i1 - i0) * (j1 - j0)) * static_cast<double>(a.n) / m;
        }
    }
    return out;
}

}  // namespace graphmf
