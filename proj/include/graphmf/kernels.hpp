#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "graphmf/step_function.hpp"
#include "json.hpp"

namespace graphmf {

/// Symmetric kernel W on [0,1]^2 in one of four representations.
///
/// Blockwise cells are treated as ((k-1)/M, k/M] (with 0 in the first cell),
/// so that point-sampling at grid nodes j/M returns cell j and discretizing a
/// blockwise kernel on its own grid is the identity. This differs from the
/// step-function cell convention only on a null set.
class GraphonKernel {
  public:
    enum class Repr { Evaluable, Blockwise, Separable, FiniteRank };

    static GraphonKernel constant(double p);
    static GraphonKernel product_xy();  // separable with phi(x) = x
    static GraphonKernel blockwise(int m, std::vector<double> row_major_cells, bool unit_range = true);
    static GraphonKernel separable(std::function<double(double)> phi, bool unit_range = true);
    static GraphonKernel separable_poly(std::vector<double> coeffs, bool unit_range = true);
    static GraphonKernel separable_step(const StepFunction& phi, bool unit_range = true);
    static GraphonKernel finite_rank(std::vector<double> lambdas, std::vector<StepFunction> funcs);
    static GraphonKernel evaluable(std::function<double(double, double)> f, bool unit_range);
    /// Pointwise difference a - b (never unit-range).
    static GraphonKernel difference(GraphonKernel a, GraphonKernel b);

    static GraphonKernel from_json(const nlohmann::json& j);
    static GraphonKernel from_file(const std::string& path);
    /// Accepts a shorthand ("constant:0.5", "product_xy", "blockwise:a,b,b,c",
    /// "separable_poly:c0,c1,..."), inline JSON, or a path to a JSON file.
    static GraphonKernel from_spec(const std::string& spec);
    nlohmann::json to_json() const;

    /// W(x,y); throws std::domain_error outside [0,1]^2.
    double evaluate(double x, double y) const;
    double operator()(double x, double y) const { return evaluate(x, y); }

    Repr repr() const;
    bool unit_range() const { return unit_range_; }
    /// Max of |W|; exact for blockwise/finite-rank/step-separable, probed otherwise.
    double max_abs() const { return max_abs_; }
    bool max_is_exact() const { return max_exact_; }

    int block_size() const;
    const std::vector<double>& block_values() const;
    bool is_separable() const { return repr() == Repr::Separable; }
    double separable_phi(double x) const;

  private:
    struct EvaluableRepr {
        std::function<double(double, double)> f;
    };
    struct BlockwiseRepr {
        int m;
        std::vector<double> cells;
    };
    struct SeparableRepr {
        std::function<double(double)> phi;
        std::vector<double> coeffs;  // polynomial coefficients when known; empty if opaque
    };
    struct FiniteRankRepr {
        std::vector<double> lambdas;
        std::vector<StepFunction> funcs;
    };

    GraphonKernel() = default;

    std::variant<EvaluableRepr, BlockwiseRepr, SeparableRepr, FiniteRankRepr> repr_;
    bool unit_range_ = true;
    double max_abs_ = 0.0;
    bool max_exact_ = false;
};

/// Midpoint-quadrature approximation of (Wf)(x) = int W(x,y) f(y) dy on the
/// quadrature_m grid, applied component-wise. Grid mismatches are resolved on
/// the least-common-multiple grid; blockwise kernels are applied exactly on
/// their own grid and then re-gridded, so the result is exact whenever kernel
/// and function are blockwise on grids the quadrature grid refines.
StepFunction apply_operator(const GraphonKernel& kernel, const StepFunction& f, int quadrature_m);

/// d_W on the m grid: apply_operator(kernel, 1, m).
StepFunction degree_function(const GraphonKernel& kernel, int m);

/// Blockwise kernel with cell (k,l) value W(k/m, l/m), k,l = 1..m.
GraphonKernel discretize(const GraphonKernel& kernel, int m);

/// Max of |W^(m) - W| over the probe_m midpoint grid; a lower bound on the
/// true sup, nondecreasing along nested probe grids (odd refinement ratios
/// keep midpoint grids nested). Requires probe_m >= m.
double delta_m(const GraphonKernel& kernel, int m, int probe_m);

/// Kernel L^p norms by midpoint quadrature on the m grid.
double kernel_l1_norm(const GraphonKernel& kernel, int m);
double kernel_l2_norm(const GraphonKernel& kernel, int m);

}  // namespace graphmf
