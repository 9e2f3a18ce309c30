#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace graphmf {

/// Vector-valued piecewise-constant function on the uniform grid of [0,1].
/// Cell k (0-based) covers [k/M, (k+1)/M), the last cell also containing 1.
/// Values are stored row-major: cell-major, state-minor.
class StepFunction {
  public:
    StepFunction() = default;
    StepFunction(int grid_size, std::vector<std::string> labels);
    StepFunction(int grid_size, std::vector<std::string> labels, std::vector<double> values);

    static StepFunction constant(int grid_size, double value);  // scalar, one unnamed component
    static StepFunction constant_vector(int grid_size, std::vector<std::string> labels,
                                        const std::vector<double>& point);

    int grid_size() const { return m_; }
    int num_states() const { return static_cast<int>(labels_.size()); }
    const std::vector<std::string>& state_labels() const { return labels_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    double at(int cell, int s = 0) const { return values_[static_cast<std::size_t>(cell) * labels_.size() + s]; }
    double& at(int cell, int s = 0) { return values_[static_cast<std::size_t>(cell) * labels_.size() + s]; }

    /// Index of the cell containing x; [k/M,(k+1)/M) convention, x=1 -> last.
    int cell_of(double x) const;
    double value_at(double x, int s = 0) const { return at(cell_of(x), s); }

    /// Integral of one component over [0,1] (mean of its cell values).
    double integral(int s = 0) const;
    std::vector<double> integrals() const;

    /// Copy on a grid refined by an integer factor (values repeated).
    StepFunction refined(int factor) const;
    /// Copy on a grid coarsened by an integer factor (cell averages).
    StepFunction coarsened(int factor) const;
    /// Re-grid to target_m, which must share a common refinement with the
    /// current grid; uses refine-then-average so integrals are preserved.
    StepFunction on_grid(int target_m) const;

    StepFunction& operator+=(const StepFunction& o);
    StepFunction& operator*=(double a);

    bool same_shape(const StepFunction& o) const {
        return m_ == o.m_ && labels_ == o.labels_;
    }

  private:
    int m_ = 0;
    std::vector<std::string> labels_;
    std::vector<double> values_;
};

StepFunction operator+(StepFunction a, const StepFunction& b);
StepFunction operator-(const StepFunction& a, const StepFunction& b);
StepFunction operator*(double a, StepFunction f);

/// Least common multiple of two grid sizes (throws if it would overflow).
int common_grid(int a, int b);

}  // namespace graphmf
