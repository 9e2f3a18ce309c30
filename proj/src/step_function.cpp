#include "graphmf/step_function.hpp"

#include <cmath>
#include <numeric>

namespace graphmf {

StepFunction::StepFunction(int grid_size, std::vector<std::string> labels)
    : m_(grid_size),
      labels_(std::move(labels)),
      values_(static_cast<std::size_t>(grid_size) * labels_.size(), 0.0) {
    if (grid_size <= 0) throw std::invalid_argument("StepFunction: grid_size must be positive");
    if (labels_.empty()) throw std::invalid_argument("StepFunction: needs at least one component");
}

StepFunction::StepFunction(int grid_size, std::vector<std::string> labels, std::vector<double> values)
    : StepFunction(grid_size, std::move(labels)) {
    if (values.size() != values_.size())
        throw std::invalid_argument("StepFunction: values size does not match grid_size x states");
    values_ = std::move(values);
}

StepFunction StepFunction::constant(int grid_size, double value) {
    StepFunction f(grid_size, {""});
    for (double& v : f.values_) v = value;
    return f;
}

StepFunction StepFunction::constant_vector(int grid_size, std::vector<std::string> labels,
                                           const std::vector<double>& point) {
    StepFunction f(grid_size, std::move(labels));
    if (point.size() != f.labels_.size())
        throw std::invalid_argument("StepFunction: point size does not match labels");
    for (int k = 0; k < grid_size; ++k)
        for (std::size_t s = 0; s < point.size(); ++s) f.at(k, static_cast<int>(s)) = point[s];
    return f;
}

int StepFunction::cell_of(double x) const {
    if (x < 0.0 || x > 1.0) throw std::domain_error("StepFunction: coordinate outside [0,1]");
    int k = static_cast<int>(std::floor(x * m_));
    return k >= m_ ? m_ - 1 : k;
}

double StepFunction::integral(int s) const {
    double acc = 0.0;
    for (int k = 0; k < m_; ++k) acc += at(k, s);
    return acc / m_;
}

std::vector<double> StepFunction::integrals() const {
    std::vector<double> out(labels_.size(), 0.0);
    for (int k = 0; k < m_; ++k)
        for (int s = 0; s < num_states(); ++s) out[s] += at(k, s);
    for (double& v : out) v /= m_;
    return out;
}

StepFunction StepFunction::refined(int factor) const {
    if (factor <= 0) throw std::invalid_argument("StepFunction: refine factor must be positive");
    StepFunction out(m_ * factor, labels_);
    for (int k = 0; k < m_; ++k)
        for (int r = 0; r < factor; ++r)
            for (int s = 0; s < num_states(); ++s) out.at(k * factor + r, s) = at(k, s);
    return out;
}

StepFunction StepFunction::coarsened(int factor) const {
    if (factor <= 0 || m_ % factor != 0)
        throw std::invalid_argument("StepFunction: coarsen factor must divide grid size");
    StepFunction out(m_ / factor, labels_);
    for (int k = 0; k < out.m_; ++k)
        for (int s = 0; s < num_states(); ++s) {
            double acc = 0.0;
            for (int r = 0; r < factor; ++r) acc += at(k * factor + r, s);
            out.at(k, s) = acc / factor;
        }
    return out;
}

StepFunction StepFunction::on_grid(int target_m) const {
    if (target_m == m_) return *this;
    int w = common_grid(m_, target_m);
    StepFunction fine = refined(w / m_);
    return fine.coarsened(w / target_m);
}

StepFunction& StepFunction::operator+=(const StepFunction& o) {
    if (!same_shape(o)) throw std::invalid_argument("StepFunction: shape mismatch");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
}

StepFunction& StepFunction::operator*=(double a) {
    for (double& v : values_) v *= a;
    return *this;
}

StepFunction operator+(StepFunction a, const StepFunction& b) {
    a += b;
    return a;
}

StepFunction operator-(const StepFunction& a, const StepFunction& b) {
    StepFunction out = a;
    if (!out.same_shape(b)) throw std::invalid_argument("StepFunction: shape mismatch");
    for (std::size_t i = 0; i < out.values().size(); ++i) out.values()[i] -= b.values()[i];
    return out;
}

StepFunction operator*(double a, StepFunction f) {
    f *= a;
    return f;
}

int common_grid(int a, int b) {
    long long g = std::gcd(static_cast<long long>(a), static_cast<long long>(b));
    long long l = static_cast<long long>(a) / g * b;
    if (l > 2'000'000) throw std::invalid_argument("common_grid: incompatible grid sizes");
    return static_cast<int>(l);
}

}  // namespace graphmf
