#include "graphmf/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace graphmf {

namespace {

constexpr double kRangeTol = 1e-12;

// Cell index for kernel lookups: ((k-1)/m, k/m] with 0 in the first cell.
// Coordinates numerically indistinguishable from a grid node j/m are snapped
// onto it so that sampling at nodes is exact despite rounding in x*m.
int kernel_cell(double x, int m) {
    double t = x * m;
    double r = std::nearbyint(t);
    if (std::abs(t - r) <= 1e-9 * std::max(1.0, std::abs(t))) {
        int j = static_cast<int>(r);
        return std::clamp(j, 1, m) - 1;
    }
    int k = static_cast<int>(std::floor(t));
    return std::clamp(k, 0, m - 1);
}

void check_domain(double x, double y) {
    if (x < 0.0 || x > 1.0 || y < 0.0 || y > 1.0)
        throw std::domain_error("GraphonKernel: coordinate outside [0,1]");
}

// step-function lookup under the kernel cell convention, so that kernels
// backed by step functions behave consistently at grid nodes
double kernel_step_value(const StepFunction& f, double x) {
    return f.at(kernel_cell(x, f.grid_size()));
}

double poly_eval(const std::vector<double>& c, double x) {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
    return acc;
}

std::vector<double> parse_csv_doubles(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

}  // namespace

GraphonKernel GraphonKernel::constant(double p) {
    return blockwise(1, {p}, p >= 0.0 && p <= 1.0);
}

GraphonKernel GraphonKernel::product_xy() { return separable_poly({0.0, 1.0}); }

GraphonKernel GraphonKernel::blockwise(int m, std::vector<double> cells, bool unit_range) {
    if (m <= 0 || cells.size() != static_cast<std::size_t>(m) * m)
        throw std::invalid_argument("GraphonKernel: blockwise needs m*m cell values");
    for (int k = 0; k < m; ++k)
        for (int l = k + 1; l < m; ++l)
            if (cells[static_cast<std::size_t>(k) * m + l] != cells[static_cast<std::size_t>(l) * m + k])
                throw std::invalid_argument("GraphonKernel: blockwise matrix not symmetric");
    GraphonKernel k;
    k.repr_ = BlockwiseRepr{m, std::move(cells)};
    double mx = 0.0;
    for (double v : std::get<BlockwiseRepr>(k.repr_).cells) {
        if (unit_range && (v < -kRangeTol || v > 1.0 + kRangeTol))
            throw std::invalid_argument("GraphonKernel: blockwise value outside [0,1]");
        mx = std::max(mx, std::abs(v));
    }
    k.max_abs_ = mx;
    k.max_exact_ = true;
    k.unit_range_ = unit_range;
    return k;
}

GraphonKernel GraphonKernel::separable(std::function<double(double)> phi, bool unit_range) {
    GraphonKernel k;
    k.repr_ = SeparableRepr{std::move(phi), {}};
    const auto& f = std::get<SeparableRepr>(k.repr_).phi;
    double mx = 0.0;
    const int probe = 8192;
    for (int i = 0; i <= probe; ++i) {
        double v = f(static_cast<double>(i) / probe);
        if (unit_range && (v < -kRangeTol || v * v > 1.0 + kRangeTol))
            throw std::invalid_argument("GraphonKernel: separable factor gives values outside [0,1]");
        mx = std::max(mx, std::abs(v));
    }
    k.max_abs_ = mx * mx;
    k.max_exact_ = false;
    k.unit_range_ = unit_range;
    return k;
}

GraphonKernel GraphonKernel::separable_poly(std::vector<double> coeffs, bool unit_range) {
    GraphonKernel k = separable([c = coeffs](double x) { return poly_eval(c, x); }, unit_range);
    std::get<SeparableRepr>(k.repr_).coeffs = std::move(coeffs);
    return k;
}

GraphonKernel GraphonKernel::separable_step(const StepFunction& phi, bool unit_range) {
    if (phi.num_states() != 1)
        throw std::invalid_argument("GraphonKernel: separable factor must be scalar");
    GraphonKernel k = separable([phi](double x) { return kernel_step_value(phi, x); }, unit_range);
    double mx = 0.0;
    for (int i = 0; i < phi.grid_size(); ++i) mx = std::max(mx, std::abs(phi.at(i)));
    k.max_abs_ = mx * mx;
    k.max_exact_ = true;
    return k;
}

GraphonKernel GraphonKernel::finite_rank(std::vector<double> lambdas, std::vector<StepFunction> funcs) {
    if (lambdas.empty() || lambdas.size() != funcs.size())
        throw std::invalid_argument("GraphonKernel: finite_rank needs matching eigenpairs");
    int g = funcs.front().grid_size();
    for (const auto& f : funcs)
        if (f.grid_size() != g || f.num_states() != 1)
            throw std::invalid_argument("GraphonKernel: finite_rank eigenfunctions must be scalar on one grid");
    GraphonKernel k;
    k.repr_ = FiniteRankRepr{std::move(lambdas), std::move(funcs)};
    const auto& fr = std::get<FiniteRankRepr>(k.repr_);
    double mx = 0.0;
    if (g <= 2048) {
        for (int a = 0; a < g; ++a)
            for (int b = a; b < g; ++b) {
                double v = 0.0;
                for (std::size_t t = 0; t < fr.lambdas.size(); ++t)
                    v += fr.lambdas[t] * fr.funcs[t].at(a) * fr.funcs[t].at(b);
                mx = std::max(mx, std::abs(v));
            }
        k.max_exact_ = true;
    } else {
        double fb = 0.0;
        for (std::size_t t = 0; t < fr.lambdas.size(); ++t) {
            double fm = 0.0;
            for (int a = 0; a < g; ++a) fm = std::max(fm, std::abs(fr.funcs[t].at(a)));
            fb += std::abs(fr.lambdas[t]) * fm * fm;
        }
        mx = fb;
        k.max_exact_ = false;
    }
    k.max_abs_ = mx;
    k.unit_range_ = false;  // truncations may leave [0,1]
    return k;
}

GraphonKernel GraphonKernel::evaluable(std::function<double(double, double)> f, bool unit_range) {
    GraphonKernel k;
    k.repr_ = EvaluableRepr{std::move(f)};
    const auto& fn = std::get<EvaluableRepr>(k.repr_).f;
    double mx = 0.0;
    const int probe = 256;
    for (int i = 0; i <= probe; ++i)
        for (int j = i; j <= probe; ++j) {
            double v = fn(static_cast<double>(i) / probe, static_cast<double>(j) / probe);
            if (unit_range && (v < -kRangeTol || v > 1.0 + kRangeTol))
                throw std::invalid_argument("GraphonKernel: evaluable value outside [0,1]");
            mx = std::max(mx, std::abs(v));
        }
    k.max_abs_ = mx;
    k.max_exact_ = false;
    k.unit_range_ = unit_range;
    return k;
}

GraphonKernel GraphonKernel::difference(GraphonKernel a, GraphonKernel b) {
    return evaluable(
        [a = std::move(a), b = std::move(b)](double x, double y) { return a.evaluate(x, y) - b.evaluate(x, y); },
        false);
}

double GraphonKernel::evaluate(double x, double y) const {
    check_domain(x, y);
    if (const auto* bw = std::get_if<BlockwiseRepr>(&repr_)) {
        int k = kernel_cell(x, bw->m);
        int l = kernel_cell(y, bw->m);
        return bw->cells[static_cast<std::size_t>(k) * bw->m + l];
    }
    if (const auto* sp = std::get_if<SeparableRepr>(&repr_)) return sp->phi(x) * sp->phi(y);
    if (const auto* fr = std::get_if<FiniteRankRepr>(&repr_)) {
        double acc = 0.0;
        for (std::size_t t = 0; t < fr->lambdas.size(); ++t)
            acc += fr->lambdas[t] * kernel_step_value(fr->funcs[t], x) * kernel_step_value(fr->funcs[t], y);
        return acc;
    }
    return std::get<EvaluableRepr>(repr_).f(x, y);
}

GraphonKernel::Repr GraphonKernel::repr() const {
    if (std::holds_alternative<BlockwiseRepr>(repr_)) return Repr::Blockwise;
    if (std::holds_alternative<SeparableRepr>(repr_)) return Repr::Separable;
    if (std::holds_alternative<FiniteRankRepr>(repr_)) return Repr::FiniteRank;
    return Repr::Evaluable;
}

int GraphonKernel::block_size() const {
    if (const auto* bw = std::get_if<BlockwiseRepr>(&repr_)) return bw->m;
    throw std::logic_error("GraphonKernel: not blockwise");
}

const std::vector<double>& GraphonKernel::block_values() const {
    if (const auto* bw = std::get_if<BlockwiseRepr>(&repr_)) return bw->cells;
    throw std::logic_error("GraphonKernel: not blockwise");
}

double GraphonKernel::separable_phi(double x) const {
    if (const auto* sp = std::get_if<SeparableRepr>(&repr_)) return sp->phi(x);
    throw std::logic_error("GraphonKernel: not separable");
}

GraphonKernel GraphonKernel::from_json(const nlohmann::json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "constant") return constant(j.at("p").get<double>());
    if (type == "product_xy") return product_xy();
    if (type == "blockwise") {
        auto values = j.at("values").get<std::vector<double>>();
        int m = j.contains("m") ? j.at("m").get<int>()
                                : static_cast<int>(std::llround(std::sqrt(static_cast<double>(values.size()))));
        return blockwise(m, std::move(values), j.value("unit_range", true));
    }
    if (type == "separable_poly")
        return separable_poly(j.at("coeffs").get<std::vector<double>>(), j.value("unit_range", true));
    if (type == "finite_rank") {
        int g = j.at("grid").get<int>();
        std::vector<double> lambdas;
        std::vector<StepFunction> funcs;
        for (const auto& term : j.at("terms")) {
            lambdas.push_back(term.at("lambda").get<double>());
            funcs.emplace_back(g, std::vector<std::string>{""}, term.at("values").get<std::vector<double>>());
        }
        return finite_rank(std::move(lambdas), std::move(funcs));
    }
    if (type == "spec") return from_spec(j.at("spec").get<std::string>());
    throw std::invalid_argument("GraphonKernel: unknown kernel type '" + type + "'");
}

GraphonKernel GraphonKernel::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("GraphonKernel: cannot open " + path);
    nlohmann::json j;
    in >> j;
    return from_json(j);
}

GraphonKernel GraphonKernel::from_spec(const std::string& spec) {
    if (spec.find('{') != std::string::npos) return from_json(nlohmann::json::parse(spec));
    auto colon = spec.find(':');
    std::string name = spec.substr(0, colon);
    std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (name == "constant") return constant(std::stod(args));
    if (name == "product_xy") return product_xy();
    if (name == "blockwise") {
        auto values = parse_csv_doubles(args);
        int m = static_cast<int>(std::llround(std::sqrt(static_cast<double>(values.size()))));
        return blockwise(m, std::move(values));
    }
    if (name == "separable_poly") return separable_poly(parse_csv_doubles(args));
    if (std::ifstream(spec).good()) return from_file(spec);
    throw std::invalid_argument("GraphonKernel: unrecognized kernel spec '" + spec + "'");
}

nlohmann::json GraphonKernel::to_json() const {
    nlohmann::json j;
    switch (repr()) {
        case Repr::Blockwise:
            j["type"] = "blockwise";
            j["m"] = block_size();
            j["values"] = block_values();
            j["unit_range"] = unit_range_;
            break;
        case Repr::Separable: {
            const auto& sp = std::get<SeparableRepr>(repr_);
            if (!sp.coeffs.empty()) {
                j["type"] = "separable_poly";
                j["coeffs"] = sp.coeffs;
                j["unit_range"] = unit_range_;
            } else {
                j["type"] = "separable";  // opaque evaluator; not reloadable
            }
            break;
        }
        case Repr::FiniteRank: {
            const auto& fr = std::get<FiniteRankRepr>(repr_);
            j["type"] = "finite_rank";
            j["grid"] = fr.funcs.front().grid_size();
            for (std::size_t t = 0; t < fr.lambdas.size(); ++t)
                j["terms"].push_back({{"lambda", fr.lambdas[t]}, {"values", fr.funcs[t].values()}});
            break;
        }
        case Repr::Evaluable:
            j["type"] = "evaluable";
            break;
    }
    return j;
}

namespace {

// generic midpoint quadrature on the w grid, parallel over output cells
StepFunction apply_midpoint(const GraphonKernel& kernel, const StepFunction& fw, int w) {
    StepFunction out(w, fw.state_labels());
    const int ns = fw.num_states();
#pragma omp parallel for schedule(static)
    for (int k = 0; k < w; ++k) {
        const double xk = (k + 0.5) / w;
        for (int l = 0; l < w; ++l) {
            const double wkl = kernel.evaluate(xk, (l + 0.5) / w);
            for (int s = 0; s < ns; ++s) out.at(k, s) += wkl * fw.at(l, s);
        }
        for (int s = 0; s < ns; ++s) out.at(k, s) /= w;
    }
    return out;
}

}  // namespace

StepFunction apply_operator(const GraphonKernel& kernel, const StepFunction& f, int quadrature_m) {
    if (quadrature_m <= 0) throw std::domain_error("apply_operator: quadrature grid must be positive");
    switch (kernel.repr()) {
        case GraphonKernel::Repr::Blockwise: {
            const int b = kernel.block_size();
            const auto& cells = kernel.block_values();
            StepFunction fb = f.on_grid(b);
            StepFunction out(b, f.state_labels());
            const int ns = f.num_states();
#pragma omp parallel for schedule(static)
            for (int k = 0; k < b; ++k) {
                for (int l = 0; l < b; ++l) {
                    const double wkl = cells[static_cast<std::size_t>(k) * b + l];
                    for (int s = 0; s < ns; ++s) out.at(k, s) += wkl * fb.at(l, s);
                }
                for (int s = 0; s < ns; ++s) out.at(k, s) /= b;
            }
            return out.on_grid(quadrature_m);
        }
        case GraphonKernel::Repr::Separable: {
            const int w = common_grid(f.grid_size(), quadrature_m);
            StepFunction fw = f.on_grid(w);
            const int ns = f.num_states();
            std::vector<double> phi(w);
            for (int l = 0; l < w; ++l) phi[l] = kernel.separable_phi((l + 0.5) / w);
            std::vector<double> c(ns, 0.0);
            for (int l = 0; l < w; ++l)
                for (int s = 0; s < ns; ++s) c[s] += phi[l] * fw.at(l, s);
            StepFunction out(w, f.state_labels());
            for (int k = 0; k < w; ++k)
                for (int s = 0; s < ns; ++s) out.at(k, s) = phi[k] * c[s] / w;
            return out.on_grid(quadrature_m);
        }
        default: {
            const int w = common_grid(f.grid_size(), quadrature_m);
            return apply_midpoint(kernel, f.on_grid(w), w).on_grid(quadrature_m);
        }
    }
}

StepFunction degree_function(const GraphonKernel& kernel, int m) {
    return apply_operator(kernel, StepFunction::constant(1, 1.0), m);
}

GraphonKernel discretize(const GraphonKernel& kernel, int m) {
    if (m <= 0) throw std::domain_error("discretize: grid must be positive");
    std::vector<double> cells(static_cast<std::size_t>(m) * m);
#pragma omp parallel for schedule(static)
    for (int k = 0; k < m; ++k)
        for (int l = k; l < m; ++l) {
            double v = kernel.evaluate(static_cast<double>(k + 1) / m, static_cast<double>(l + 1) / m);
            cells[static_cast<std::size_t>(k) * m + l] = v;
            cells[static_cast<std::size_t>(l) * m + k] = v;
        }
    return GraphonKernel::blockwise(m, std::move(cells), kernel.unit_range());
}

double delta_m(const GraphonKernel& kernel, int m, int probe_m) {
    if (probe_m < m) throw std::invalid_argument("delta_m: probe grid must refine measurement grid");
    GraphonKernel disc = discretize(kernel, m);
    std::vector<double> row_max(probe_m, 0.0);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < probe_m; ++i) {
        const double x = (i + 0.5) / probe_m;
        double mx = 0.0;
        for (int j = 0; j < probe_m; ++j) {
            const double y = (j + 0.5) / probe_m;
            mx = std::max(mx, std::abs(disc.evaluate(x, y) - kernel.evaluate(x, y)));
        }
        row_max[i] = mx;
    }
    return *std::max_element(row_max.begin(), row_max.end());
}

namespace {

double kernel_lp_norm(const GraphonKernel& kernel, int m, int p) {
    std::vector<double> row(m, 0.0);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
        const double x = (i + 0.5) / m;
        double acc = 0.0;
        for (int j = 0; j < m; ++j) {
            double v = std::abs(kernel.evaluate(x, (j + 0.5) / m));
            acc += p == 1 ? v : v * v;
        }
        row[i] = acc;
    }
    double total = 0.0;
    for (double v : row) total += v;
    total /= static_cast<double>(m) * m;
    return p == 1 ? total : std::sqrt(total);
}

}  // namespace

double kernel_l1_norm(const GraphonKernel& kernel, int m) { return kernel_lp_norm(kernel, m, 1); }
double kernel_l2_norm(const GraphonKernel& kernel, int m) { return kernel_lp_norm(kernel, m, 2); }

}  // namespace graphmf
