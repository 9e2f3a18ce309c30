#pragma once

#include <vector>

#include "graphmf/kernels.hpp"

namespace graphmf {

/// Top eigenpairs of a kernel operator, ordered by descending |lambda|.
/// Eigenfunctions are step functions with unit L2 norm; each is scaled so
/// its cell of largest magnitude is positive.
struct Spectrum {
    std::vector<double> eigenvalues;
    std::vector<StepFunction> eigenfunctions;
    int grid_size = 0;
};

/// Symmetric matrix stored densely (row-major), used for the discretized
/// operator A with entries W(k/m, l/m)/m whose eigenvalues estimate the
/// operator eigenvalues directly.
struct SymMatrix {
    int n = 0;
    std::vector<double> a;
    double& at(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    double at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
};

SymMatrix operator_matrix(const GraphonKernel& kernel, int m);

/// Dominant eigenpair by |lambda|. Iterates on A^2 so that kernels with a
/// +/- tied extreme pair still yield the correct magnitude, then resolves
/// the sign; the positive member is returned on an exact tie.
struct PowerResult {
    double lambda = 0.0;
    std::vector<double> vec;
    int iterations = 0;
    bool converged = false;
};
PowerResult power_dominant(const SymMatrix& a, double tol = 1e-10, int max_iters = 10000);

/// Top-k eigenpairs via repeated power iteration with deflation
/// A <- A - lambda v v^T.
std::vector<PowerResult> power_deflation(SymMatrix a, int k, double tol = 1e-10, int max_iters = 10000);

/// Full symmetric eigendecomposition (dense path), all n pairs by |lambda|.
std::vector<PowerResult> dense_eigen(const SymMatrix& a);

/// Top-K eigenpairs of the kernel operator discretized on the m grid.
/// Dense decomposition for moderate m, power iteration with deflation when
/// m is large or only K << m pairs are needed.
Spectrum spectrum(const GraphonKernel& kernel, int m, int k);

/// Finite-rank truncation from the top-K eigenpairs on the m grid.
GraphonKernel truncate(const GraphonKernel& kernel, int k, int m);

/// |lambda_1| of the discretized operator.
double op2_norm(const GraphonKernel& kernel, int m);

/// Critical SIS infection rate beta_c = 1 / lambda_1. Throws for kernels
/// whose dominant eigenvalue is not positive beyond tolerance.
double epidemic_threshold(const GraphonKernel& kernel, int m, double tol = 1e-12);

/// Block-average a dense symmetric matrix of n cells down to at most
/// target cells (used to keep eigensolves tractable for large graphs).
SymMatrix coarsen_matrix(const SymMatrix& a, int target);

}  // namespace graphmf
