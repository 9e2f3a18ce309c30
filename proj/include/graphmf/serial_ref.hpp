#pragma once

#include "graphmf/dynamics.hpp"
#include "graphmf/kernels.hpp"
#include "graphmf/sampling.hpp"

// Plain single-threaded reference implementations of the hot kernels. They
// are deliberately naive (straight loops, no representation fast paths) and
// are used by the test suite to validate the OpenMP paths and by the
// benchmark tool to measure speedups. Sampling and matvec-style references
// reproduce the parallel results bit-for-bit because both sides consume the
// same per-row RNG streams and sum in the same order.
namespace graphmf::serial {

StepFunction apply_operator(const GraphonKernel& kernel, const StepFunction& f, int quadrature_m);

GraphonKernel discretize(const GraphonKernel& kernel, int m);

StepFunction meanfield_rhs(const GraphonKernel& kernel_disc, const RateModel& model,
                           const StepFunction& v);

SampledGraph sample_graph(const GraphonKernel& kernel, std::uint32_t n, double kappa,
                          VertexMode mode, std::uint64_t seed);

double op2_norm(const GraphonKernel& kernel, int m);

double interval_cut_surrogate(const GraphonKernel& kernel, int m);

}  // namespace graphmf::serial
