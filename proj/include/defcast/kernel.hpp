#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "defcast/simplex.hpp"
#include "json.hpp"

namespace defcast {

/// Non-owning view of a (datum, forecast, observation) triple.
struct PointView {
    std::span<const double> x;
    std::span<const double> p;
    std::size_t y = 0;
};

/// Owning (x, P, y) triple; y is validated against the forecast's class count.
struct ForecastPoint {
    std::vector<double> x;
    Simplex p;
    std::size_t y;

    ForecastPoint(std::vector<double> datum, Simplex forecast, std::size_t outcome);

    PointView view() const noexcept { return {x, p.weights(), y}; }
};

/// Kernel on a single coordinate block (the datum block or the forecast block).
struct CoordinateKernel {
    enum class Kind { constant, gaussian, inf_poly };

    Kind kind = Kind::constant;
    double value = 1.0;           // constant
    double sigma = 1.0;           // gaussian width
    double scale = 1.0;           // inf_poly input scaling
    std::optional<double> bound;  // inf_poly: declared bound on the scaled norm

    static CoordinateKernel constant(double c = 1.0);
    static CoordinateKernel gaussian(double sigma);
    static CoordinateKernel inf_poly(double scale = 1.0, std::optional<double> bound = {});

    double operator()(std::span<const double> a, std::span<const double> b) const;
    double imbedding_constant() const;
    bool is_constant() const noexcept { return kind == Kind::constant; }

    bool operator==(const CoordinateKernel&) const = default;
};

/// Kernel on the finite observation space.
struct ClassKernel {
    enum class Kind { kronecker, one_hot_gaussian, indicator, constant };

    Kind kind = Kind::kronecker;
    double sigma = 1.0;    // one_hot_gaussian width
    std::size_t cls = 1;   // indicator: k(a,b) = [a == cls][b == cls]

    static ClassKernel kronecker() { return {}; }
    static ClassKernel one_hot_gaussian(double sigma);
    static ClassKernel indicator(std::size_t cls = 1);
    static ClassKernel constant();

    double operator()(std::size_t a, std::size_t b) const noexcept;

    bool operator==(const ClassKernel&) const = default;
};

/// Immutable description of a forecast-continuous kernel on X x P(Y) x Y.
///
/// `gaussian` and `inf_poly` act on the concatenated embedding
/// (x, p, one_hot(y)); `product` multiplies per-block kernels; `weighted_sum`
/// and `scaled` close the family under the usual kernel algebra.
class KernelSpec {
public:
    struct Gaussian {
        double sigma;
        bool operator==(const Gaussian&) const = default;
    };
    struct InfPoly {
        double scale;
        std::optional<double> bound;
        bool operator==(const InfPoly&) const = default;
    };
    struct Constant {
        double value;
        bool operator==(const Constant&) const = default;
    };
    struct Product {
        CoordinateKernel x;
        CoordinateKernel p;
        ClassKernel y;
        bool operator==(const Product&) const = default;
    };
    struct WeightedSum {
        std::vector<std::pair<double, std::shared_ptr<const KernelSpec>>> terms;
    };
    struct Scaled {
        double c;
        std::shared_ptr<const KernelSpec> inner;
    };
    using Node = std::variant<Gaussian, InfPoly, Constant, Product, WeightedSum, Scaled>;

    static KernelSpec gaussian(double sigma = 1.0);
    static KernelSpec inf_poly(double scale = 1.0, std::optional<double> bound = {});
    static KernelSpec constant(double value = 1.0);
    static KernelSpec product(CoordinateKernel x, CoordinateKernel p, ClassKernel y);
    static KernelSpec weighted_sum(std::vector<std::pair<double, KernelSpec>> terms);
    static KernelSpec scaled(double c, KernelSpec inner);

    const Node& node() const noexcept { return node_; }

    friend bool operator==(const KernelSpec& a, const KernelSpec& b);

private:
    explicit KernelSpec(Node node) : node_(std::move(node)) {}
    Node node_;
};

/// k(a, b). Pure and allocation-free; both arguments are treated identically,
/// so the result is exactly symmetric.
double eval_kernel(const KernelSpec& spec, const PointView& a, const PointView& b);

/// sup over points of sqrt(k(w, w)), computed from the structure.
double imbedding_constant(const KernelSpec& spec);

/// a0 * k0 + a1 * k1: the kernel of the weighted direct sum of the feature maps.
KernelSpec direct_sum(const KernelSpec& k0, double a0, const KernelSpec& k1, double a1);

nlohmann::json kernel_to_json(const KernelSpec& spec);
KernelSpec kernel_from_json(const nlohmann::json& j);

}  // namespace defcast
