#include "defcast/kernel.hpp"

#include <cmath>
#include <string>

#include "defcast/errors.hpp"

namespace defcast {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_finite(std::span<const double> v) {
    for (double e : v) {
        if (!std::isfinite(e)) throw InputError("kernel argument is not finite");
    }
}

void require_same_size(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InputError("kernel arguments have different dimensions");
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double inf_poly_value(double inner, double norm_a_sq, double norm_b_sq, double scale,
                      const std::optional<double>& bound) {
    const double s2 = scale * scale;
    const double na = s2 * norm_a_sq;
    const double nb = s2 * norm_b_sq;
    if (!(na < 1.0) || !(nb < 1.0)) throw DomainError("inf_poly argument outside the unit ball");
    if (bound) {
        const double r2 = *bound * *bound;
        if (na > r2 || nb > r2) throw DomainError("inf_poly argument exceeds the declared norm bound");
    }
    return 1.0 / (1.0 - s2 * inner);
}

double inf_poly_constant(const std::optional<double>& bound) {
    if (!bound) throw UnboundedConstantError("inf_poly needs a declared norm bound r < 1");
    return std::sqrt(1.0 / (1.0 - *bound * *bound));
}

void check_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InputError(std::string(what) + " must be positive");
}

void check_bound(const std::optional<double>& bound) {
    if (bound && !(*bound >= 0.0 && *bound < 1.0)) throw InputError("inf_poly bound must lie in [0, 1)");
}

}  // namespace

ForecastPoint::ForecastPoint(std::vector<double> datum, Simplex forecast, std::size_t outcome)
    : x(std::move(datum)), p(std::move(forecast)), y(outcome) {
    if (y >= p.size()) throw InputError("observation index out of range");
    require_finite(x);
}

CoordinateKernel CoordinateKernel::constant(double c) {
    check_positive(c, "constant kernel value");
    CoordinateKernel k;
    k.kind = Kind::constant;
    k.value = c;
    return k;
}

CoordinateKernel CoordinateKernel::gaussian(double sigma) {
    check_positive(sigma, "gaussian sigma");
    CoordinateKernel k;
    k.kind = Kind::gaussian;
    k.sigma = sigma;
    return k;
}

CoordinateKernel CoordinateKernel::inf_poly(double scale, std::optional<double> bound) {
    check_positive(scale, "inf_poly scale");
    check_bound(bound);
    CoordinateKernel k;
    k.kind = Kind::inf_poly;
    k.scale = scale;
    k.bound = bound;
    return k;
}

double CoordinateKernel::operator()(std::span<const double> a, std::span<const double> b) const {
    switch (kind) {
        case Kind::constant:
            return value;
        case Kind::gaussian:
            require_same_size(a, b);
            return std::exp(-squared_distance(a, b) / (sigma * sigma));
        case Kind::inf_poly:
            require_same_size(a, b);
            return inf_poly_value(dot(a, b), dot(a, a), dot(b, b), scale, bound);
    }
    return 0.0;
}

double CoordinateKernel::imbedding_constant() const {
    switch (kind) {
        case Kind::constant:
            return std::sqrt(value);
        case Kind::gaussian:
            return 1.0;
        case Kind::inf_poly:
            return inf_poly_constant(bound);
    }
    return 0.0;
}

ClassKernel ClassKernel::one_hot_gaussian(double sigma) {
    check_positive(sigma, "one_hot_gaussian sigma");
    ClassKernel k;
    k.kind = Kind::one_hot_gaussian;
    k.sigma = sigma;
    return k;
}

ClassKernel ClassKernel::indicator(std::size_t cls) {
    ClassKernel k;
    k.kind = Kind::indicator;
    k.cls = cls;
    return k;
}

ClassKernel ClassKernel::constant() {
    ClassKernel k;
    k.kind = Kind::constant;
    return k;
}

double ClassKernel::operator()(std::size_t a, std::size_t b) const noexcept {
    switch (kind) {
        case Kind::kronecker:
            return a == b ? 1.0 : 0.0;
        case Kind::one_hot_gaussian:
            return a == b ? 1.0 : std::exp(-2.0 / (sigma * sigma));
        case Kind::indicator:
            return (a == cls && b == cls) ? 1.0 : 0.0;
        case Kind::constant:
            return 1.0;
    }
    return 0.0;
}

KernelSpec KernelSpec::gaussian(double sigma) {
    check_positive(sigma, "gaussian sigma");
    return KernelSpec(Gaussian{sigma});
}

KernelSpec KernelSpec::inf_poly(double scale, std::optional<double> bound) {
    check_positive(scale, "inf_poly scale");
    check_bound(bound);
    return KernelSpec(InfPoly{scale, bound});
}

KernelSpec KernelSpec::constant(double value) {
    check_positive(value, "constant kernel value");
    return KernelSpec(Constant{value});
}

KernelSpec KernelSpec::product(CoordinateKernel x, CoordinateKernel p, ClassKernel y) {
    return KernelSpec(Product{x, p, y});
}

KernelSpec KernelSpec::weighted_sum(std::vector<std::pair<double, KernelSpec>> terms) {
    if (terms.empty()) throw InputError("weighted_sum needs at least one term");
    WeightedSum sum;
    for (auto& [a, k] : terms) {
        if (!(a >= 0.0) || !std::isfinite(a)) throw InputError("weighted_sum weights must be non-negative");
        sum.terms.emplace_back(a, std::make_shared<const KernelSpec>(std::move(k)));
    }
    return KernelSpec(std::move(sum));
}

KernelSpec KernelSpec::scaled(double c, KernelSpec inner) {
    check_positive(c, "scale factor");
    return KernelSpec(Scaled{c, std::make_shared<const KernelSpec>(std::move(inner))});
}

bool operator==(const KernelSpec& a, const KernelSpec& b) {
    if (a.node_.index() != b.node_.index()) return false;
    return std::visit(
        Overloaded{
            [&](const KernelSpec::WeightedSum& s) {
                const auto& t = std::get<KernelSpec::WeightedSum>(b.node_);
                if (s.terms.size() != t.terms.size()) return false;
                for (std::size_t i = 0; i < s.terms.size(); ++i) {
                    if (s.terms[i].first != t.terms[i].first) return false;
                    if (!(*s.terms[i].second == *t.terms[i].second)) return false;
                }
                return true;
            },
            [&](const KernelSpec::Scaled& s) {
                const auto& t = std::get<KernelSpec::Scaled>(b.node_);
                return s.c == t.c && *s.inner == *t.inner;
            },
            [&](const auto& s) { return s == std::get<std::decay_t<decltype(s)>>(b.node_); },
        },
        a.node_);
}

double eval_kernel(const KernelSpec& spec, const PointView& a, const PointView& b) {
    return std::visit(
        Overloaded{
            [&](const KernelSpec::Gaussian& g) {
                require_same_size(a.x, b.x);
                require_same_size(a.p, b.p);
                require_finite(a.x);
                require_finite(b.x);
                const double d2 =
                    squared_distance(a.x, b.x) + squared_distance(a.p, b.p) + (a.y == b.y ? 0.0 : 2.0);
                return std::exp(-d2 / (g.sigma * g.sigma));
            },
            [&](const KernelSpec::InfPoly& k) {
                require_same_size(a.x, b.x);
                require_same_size(a.p, b.p);
                require_finite(a.x);
                require_finite(b.x);
                const double inner = dot(a.x, b.x) + dot(a.p, b.p) + (a.y == b.y ? 1.0 : 0.0);
                const double na = dot(a.x, a.x) + dot(a.p, a.p) + 1.0;
                const double nb = dot(b.x, b.x) + dot(b.p, b.p) + 1.0;
                return inf_poly_value(inner, na, nb, k.scale, k.bound);
            },
            [&](const KernelSpec::Constant& c) { return c.value; },
            [&](const KernelSpec::Product& k) {
                require_finite(a.x);
                require_finite(b.x);
                return k.x(a.x, b.x) * k.p(a.p, b.p) * k.y(a.y, b.y);
            },
            [&](const KernelSpec::WeightedSum& s) {
                double total = 0.0;
                for (const auto& [w, k] : s.terms) total += w * eval_kernel(*k, a, b);
                return total;
            },
            [&](const KernelSpec::Scaled& s) { return s.c * eval_kernel(*s.inner, a, b); },
        },
        spec.node());
}

double imbedding_constant(const KernelSpec& spec) {
    return std::visit(
        Overloaded{
            [](const KernelSpec::Gaussian&) { return 1.0; },
            [](const KernelSpec::InfPoly& k) { return inf_poly_constant(k.bound); },
            [](const KernelSpec::Constant& c) { return std::sqrt(c.value); },
            [](const KernelSpec::Product& k) {
                // every observation factor has unit diagonal
                return k.x.imbedding_constant() * k.p.imbedding_constant();
            },
            [](const KernelSpec::WeightedSum& s) {
                double total = 0.0;
                for (const auto& [w, k] : s.terms) {
                    const double c = imbedding_constant(*k);
                    total += w * c * c;
                }
                return std::sqrt(total);
            },
            [](const KernelSpec::Scaled& s) { return std::sqrt(s.c) * imbedding_constant(*s.inner); },
        },
        spec.node());
}

KernelSpec direct_sum(const KernelSpec& k0, double a0, const KernelSpec& k1, double a1) {
    if (!(a0 > 0.0) || !(a1 > 0.0)) throw InputError("direct_sum weights must be positive");
    return KernelSpec::weighted_sum({{a0, k0}, {a1, k1}});
}

// ---------------------------------------------------------------------------
// JSON

namespace {

using nlohmann::json;

json coord_to_json(const CoordinateKernel& k) {
    switch (k.kind) {
        case CoordinateKernel::Kind::constant:
            return {{"type", "constant"}, {"value", k.value}};
        case CoordinateKernel::Kind::gaussian:
            return {{"type", "gaussian"}, {"sigma", k.sigma}};
        case CoordinateKernel::Kind::inf_poly: {
            json j = {{"type", "inf_poly"}, {"scale", k.scale}};
            if (k.bound) j["bound"] = *k.bound;
            return j;
        }
    }
    return {};
}

json class_to_json(const ClassKernel& k) {
    switch (k.kind) {
        case ClassKernel::Kind::kronecker:
            return {{"type", "kronecker"}};
        case ClassKernel::Kind::one_hot_gaussian:
            return {{"type", "one_hot_gaussian"}, {"sigma", k.sigma}};
        case ClassKernel::Kind::indicator:
            return {{"type", "indicator"}, {"class", k.cls}};
        case ClassKernel::Kind::constant:
            return {{"type", "constant"}};
    }
    return {};
}

std::string type_of(const json& j) {
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
        throw InputError("kernel JSON needs a string \"type\"");
    return j["type"].get<std::string>();
}

std::optional<double> optional_bound(const json& j) {
    if (j.contains("bound") && !j["bound"].is_null()) return j["bound"].get<double>();
    return std::nullopt;
}

CoordinateKernel coord_from_json(const json& j) {
    const std::string t = type_of(j);
    if (t == "constant") return CoordinateKernel::constant(j.value("value", 1.0));
    if (t == "gaussian") return CoordinateKernel::gaussian(j.value("sigma", 1.0));
    if (t == "inf_poly") return CoordinateKernel::inf_poly(j.value("scale", 1.0), optional_bound(j));
    throw InputError("unknown coordinate kernel type: " + t);
}

ClassKernel class_from_json(const json& j) {
    const std::string t = type_of(j);
    if (t == "kronecker") return ClassKernel::kronecker();
    if (t == "one_hot_gaussian") return ClassKernel::one_hot_gaussian(j.value("sigma", 1.0));
    if (t == "indicator") return ClassKernel::indicator(j.value("class", std::size_t{1}));
    if (t == "constant") return ClassKernel::constant();
    throw InputError("unknown observation kernel type: " + t);
}

}  // namespace

nlohmann::json kernel_to_json(const KernelSpec& spec) {
    return std::visit(
        Overloaded{
            [](const KernelSpec::Gaussian& g) -> json { return {{"type", "gaussian"}, {"sigma", g.sigma}}; },
            [](const KernelSpec::InfPoly& k) -> json {
                json j = {{"type", "inf_poly"}, {"scale", k.scale}};
                if (k.bound) j["bound"] = *k.bound;
                return j;
            },
            [](const KernelSpec::Constant& c) -> json { return {{"type", "constant"}, {"value", c.value}}; },
            [](const KernelSpec::Product& k) -> json {
                return {{"type", "product"}, {"x", coord_to_json(k.x)}, {"p", coord_to_json(k.p)},
                        {"y", class_to_json(k.y)}};
            },
            [](const KernelSpec::WeightedSum& s) -> json {
                json terms = json::array();
                for (const auto& [w, k] : s.terms) terms.push_back(json::array({w, kernel_to_json(*k)}));
                return {{"type", "weighted_sum"}, {"terms", terms}};
            },
            [](const KernelSpec::Scaled& s) -> json {
                return {{"type", "scaled"}, {"c", s.c}, {"kernel", kernel_to_json(*s.inner)}};
            },
        },
        spec.node());
}

KernelSpec kernel_from_json(const nlohmann::json& j) {
    try {
        const std::string t = type_of(j);
        if (t == "gaussian") return KernelSpec::gaussian(j.value("sigma", 1.0));
        if (t == "inf_poly") return KernelSpec::inf_poly(j.value("scale", 1.0), optional_bound(j));
        if (t == "constant") return KernelSpec::constant(j.value("value", 1.0));
        if (t == "product") {
            const json one = {{"type", "constant"}, {"value", 1.0}};
            return KernelSpec::product(coord_from_json(j.value("x", one)), coord_from_json(j.value("p", one)),
                                       class_from_json(j.value("y", json{{"type", "kronecker"}})));
        }
        if (t == "weighted_sum") {
            std::vector<std::pair<double, KernelSpec>> terms;
            for (const auto& term : j.at("terms")) {
                if (!term.is_array() || term.size() != 2) throw InputError("weighted_sum term must be [a, spec]");
                terms.emplace_back(term[0].get<double>(), kernel_from_json(term[1]));
            }
            return KernelSpec::weighted_sum(std::move(terms));
        }
        if (t == "scaled") return KernelSpec::scaled(j.at("c").get<double>(), kernel_from_json(j.at("kernel")));
        throw InputError("unknown kernel type: " + t);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed kernel JSON: ") + e.what());
    }
}

}  // namespace defcast
