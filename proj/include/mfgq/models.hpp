#pragma once

#include "mfgq/measure.hpp"
#include "mfgq/oracles.hpp"

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace mfgq {

/// Largest number of moment functions a factored model may use.
inline constexpr std::size_t kMaxMoments = 4;
using MomentVector = std::array<double, kMaxMoments>;

using Kernel = std::function<double(double x, double y)>;
using OuterMap = std::function<double(double)>;

/// Value and partial derivatives of a factored coefficient c(x, m).
struct CoefficientPartials {
    double value = 0.0;
    double dx = 0.0;
    double dxx = 0.0;
    MomentVector dm{};  ///< d c / d m_i
};

/// Coefficients that depend on the law only through Q(r), r: R -> R^dim.
/// `drift` and `diffusion` already include any outer maps.
struct FactoredForm {
    std::size_t dim = 0;
    /// r(y) and its first two derivatives, componentwise.
    std::function<void(double y, MomentVector& r, MomentVector& dr, MomentVector& d2r)> moment_map;
    std::function<double(double x, const MomentVector& m)> drift;
    std::function<double(double x, const MomentVector& m)> diffusion;
    /// Optional analytic partials; central differences are used when empty.
    std::function<CoefficientPartials(double x, const MomentVector& m)> drift_partials;
    std::function<CoefficientPartials(double x, const MomentVector& m)> diffusion_partials;
};

struct Domain {
    enum class Kind { Line, Circle };
    Kind kind = Kind::Line;
    double period = 0.0;

    static Domain line() { return {}; }
    static Domain circle(double period) { return {Kind::Circle, period}; }
    bool is_circle() const { return kind == Kind::Circle; }
};

/// dX = A(Q(a(X, .))) dt + B(Q(b(X, .))) dW with Q the current law.
struct MeanFieldModel {
    std::string name;
    Kernel drift_kernel;
    Kernel diffusion_kernel;
    OuterMap outer_drift;      ///< identity when empty
    OuterMap outer_diffusion;  ///< identity when empty
    std::optional<FactoredForm> factored;
    Domain domain;
    double lambda_hint = 1.0;
    /// False for ordinary SDEs whose kernels ignore y.
    bool law_dependent = true;
};

struct PointMassLaw {
    double x = 0.0;
};
struct GaussianLaw {
    double mean = 0.0;
    double stddev = 1.0;
    std::size_t n_points = 40;
};
struct ExplicitLaw {
    DiscreteMeasure measure;
};
using InitialLaw = std::variant<PointMassLaw, GaussianLaw, ExplicitLaw>;

/// Discrete initial rule Q_0; wrapped into [0, period) on a circle.
DiscreteMeasure initial_measure(const InitialLaw& law, const Domain& domain = Domain::line());

/// x -> x - period * floor(x / period), landing in [0, period).
double wrap_to_period(double x, double period);

/// A(sum_i w_i a(x, y_i)) via the kernel.
double mean_field_drift(const MeanFieldModel& model, double x, const DiscreteMeasure& q);
/// B(sum_i w_i b(x, y_i)) via the kernel.
double mean_field_diffusion(const MeanFieldModel& model, double x, const DiscreteMeasure& q);

/// Q(r) for a factored model.
MomentVector moments(const FactoredForm& form, const DiscreteMeasure& q);

CoefficientPartials drift_partials(const FactoredForm& form, double x, const MomentVector& m);
CoefficientPartials diffusion_partials(const FactoredForm& form, double x, const MomentVector& m);

/// Central-difference partials of c(x, m); step cbrt(eps) * max(1, |arg|).
CoefficientPartials finite_difference_partials(
    const std::function<double(double, const MomentVector&)>& c, std::size_t dim, double x,
    const MomentVector& m);

using ParameterMap = std::map<std::string, double>;

struct BuiltinProblem {
    MeanFieldModel model;
    InitialLaw initial;
    ReferenceOracle reference;
    ParameterMap parameters;  ///< resolved values, overrides applied
    std::optional<double> radius_hint;  ///< default R, overrides the lambda rule
};

/// gbm, ou_meanfield, polydrift, plane_rotator or burgers.
BuiltinProblem builtin(const std::string& name, const ParameterMap& overrides = {});

std::vector<std::string> builtin_names();

}  // namespace mfgq
