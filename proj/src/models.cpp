#include "mfgq/models.hpp"

#include "mfgq/errors.hpp"
#include "mfgq/gauss.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace mfgq {

double wrap_to_period(double x, double period) {
    double r = x - period * std::floor(x / period);
    if (r >= period) r -= period;
    if (r < 0.0) r = 0.0;
    return r;
}

DiscreteMeasure initial_measure(const InitialLaw& law, const Domain& domain) {
    DiscreteMeasure q = std::visit(
        [](const auto& l) -> DiscreteMeasure {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, PointMassLaw>) {
                return DiscreteMeasure::point_mass(l.x);
            } else if constexpr (std::is_same_v<T, GaussianLaw>) {
                return gauss_hermite(l.n_points, l.mean, l.stddev);
            } else {
                return l.measure;
            }
        },
        law);
    if (q.is_signed() || q.empty()) throw ValidationError("initial law must be a non-empty unsigned measure");
    if (!domain.is_circle()) return q;

    std::vector<double> xs(q.points().begin(), q.points().end());
    std::vector<double> ws(q.weights().begin(), q.weights().end());
    for (double& x : xs) x = wrap_to_period(x, domain.period);
    return DiscreteMeasure::from_atoms(std::move(xs), std::move(ws));
}

double mean_field_drift(const MeanFieldModel& model, double x, const DiscreteMeasure& q) {
    double acc = 0.0;
    const auto y = q.points();
    const auto w = q.weights();
    for (std::size_t j = 0; j < y.size(); ++j) acc += w[j] * model.drift_kernel(x, y[j]);
    return model.outer_drift ? model.outer_drift(acc) : acc;
}

double mean_field_diffusion(const MeanFieldModel& model, double x, const DiscreteMeasure& q) {
    double acc = 0.0;
    const auto y = q.points();
    const auto w = q.weights();
    for (std::size_t j = 0; j < y.size(); ++j) acc += w[j] * model.diffusion_kernel(x, y[j]);
    return model.outer_diffusion ? model.outer_diffusion(acc) : acc;
}

MomentVector moments(const FactoredForm& form, const DiscreteMeasure& q) {
    MomentVector m{}, r{}, dr{}, d2r{};
    if (form.dim == 0) return m;
    const auto y = q.points();
    const auto w = q.weights();
    for (std::size_t j = 0; j < y.size(); ++j) {
        form.moment_map(y[j], r, dr, d2r);
        for (std::size_t i = 0; i < form.dim; ++i) m[i] += w[j] * r[i];
    }
    return m;
}

CoefficientPartials finite_difference_partials(
    const std::function<double(double, const MomentVector&)>& c, std::size_t dim, double x,
    const MomentVector& m) {
    const double eps = std::cbrt(std::numeric_limits<double>::epsilon());
    CoefficientPartials p;
    p.value = c(x, m);
    const double hx = eps * std::max(1.0, std::abs(x));
    const double up = c(x + hx, m);
    const double down = c(x - hx, m);
    p.dx = (up - down) / (2.0 * hx);
    // Second derivative uses a wider step to keep cancellation in check.
    const double h2 = std::sqrt(eps) * std::max(1.0, std::abs(x));
    p.dxx = (c(x + h2, m) - 2.0 * p.value + c(x - h2, m)) / (h2 * h2);
    for (std::size_t i = 0; i < dim; ++i) {
        const double hm = eps * std::max(1.0, std::abs(m[i]));
        MomentVector mp = m, mm = m;
        mp[i] += hm;
        mm[i] -= hm;
        p.dm[i] = (c(x, mp) - c(x, mm)) / (2.0 * hm);
    }
    return p;
}

CoefficientPartials drift_partials(const FactoredForm& form, double x, const MomentVector& m) {
    if (form.drift_partials) return form.drift_partials(x, m);
    return finite_difference_partials(form.drift, form.dim, x, m);
}

CoefficientPartials diffusion_partials(const FactoredForm& form, double x, const MomentVector& m) {
    if (form.diffusion_partials) return form.diffusion_partials(x, m);
    return finite_difference_partials(form.diffusion, form.dim, x, m);
}

namespace {

double take(ParameterMap& params, const std::string& key, double fallback) {
    auto it = params.find(key);
    if (it == params.end()) {
        params[key] = fallback;
        return fallback;
    }
    return it->second;
}

using Factory = BuiltinProblem (*)(ParameterMap);

void reject_unknown(const ParameterMap& given, Factory make, const std::string& model) {
    const ParameterMap defaults = make({}).parameters;
    for (const auto& [key, value] : given) {
        if (!defaults.contains(key))
            throw ValidationError("model " + model + " has no parameter '" + key + "'");
    }
}

BuiltinProblem make_gbm(ParameterMap p) {
    const double alpha = take(p, "alpha", -1.0);
    const double sigma = take(p, "sigma", 0.5);
    const double x0 = take(p, "x0", 1.0);
    const double lambda = take(p, "lambda", 0.25);

    BuiltinProblem out;
    auto& m = out.model;
    m.name = "gbm";
    m.drift_kernel = [alpha](double x, double) { return alpha * x; };
    m.diffusion_kernel = [sigma](double x, double) { return sigma * x; };
    m.lambda_hint = lambda;
    m.law_dependent = false;

    FactoredForm f;
    f.dim = 0;
    f.moment_map = [](double, MomentVector&, MomentVector&, MomentVector&) {};
    f.drift = [alpha](double x, const MomentVector&) { return alpha * x; };
    f.diffusion = [sigma](double x, const MomentVector&) { return sigma * x; };
    f.drift_partials = [alpha](double x, const MomentVector&) {
        return CoefficientPartials{alpha * x, alpha, 0.0, {}};
    };
    f.diffusion_partials = [sigma](double x, const MomentVector&) {
        return CoefficientPartials{sigma * x, sigma, 0.0, {}};
    };
    m.factored = std::move(f);

    out.initial = PointMassLaw{x0};
    out.reference.kind = OracleKind::ClosedForm;
    out.reference.mean_at = [=](double t) { return x0 * std::exp(alpha * t); };
    out.reference.second_moment_at = [=](double t) {
        return x0 * x0 * std::exp((2.0 * alpha + sigma * sigma) * t);
    };
    out.parameters = std::move(p);
    return out;
}

BuiltinProblem make_ou(ParameterMap p) {
    const double alpha = take(p, "alpha", -0.5);
    const double beta = take(p, "beta", 0.8);
    const double sigma2 = take(p, "sigma2", 0.5);
    const double x0 = take(p, "x0", 1.0);
    const double lambda = take(p, "lambda", sigma2);
    const double sigma = std::sqrt(sigma2);

    BuiltinProblem out;
    auto& m = out.model;
    m.name = "ou_meanfield";
    m.drift_kernel = [=](double x, double y) { return alpha * x + beta * y; };
    m.diffusion_kernel = [=](double, double) { return sigma; };
    m.lambda_hint = lambda;

    FactoredForm f;
    f.dim = 1;
    f.moment_map = [](double y, MomentVector& r, MomentVector& dr, MomentVector& d2r) {
        r[0] = y;
        dr[0] = 1.0;
        d2r[0] = 0.0;
    };
    f.drift = [=](double x, const MomentVector& mv) { return alpha * x + beta * mv[0]; };
    f.diffusion = [=](double, const MomentVector&) { return sigma; };
    f.drift_partials = [=](double x, const MomentVector& mv) {
        return CoefficientPartials{alpha * x + beta * mv[0], alpha, 0.0, {beta}};
    };
    f.diffusion_partials = [=](double, const MomentVector&) { return CoefficientPartials{sigma, 0.0, 0.0, {}}; };
    m.factored = std::move(f);

    out.initial = PointMassLaw{x0};
    out.reference.kind = OracleKind::ClosedForm;
    out.reference.mean_at = [=](double t) { return ou_moments(alpha, beta, sigma2, x0, t).mean; };
    out.reference.second_moment_at = [=](double t) { return ou_moments(alpha, beta, sigma2, x0, t).second; };
    out.parameters = std::move(p);
    return out;
}

BuiltinProblem make_polydrift(ParameterMap p) {
    const double alpha = take(p, "alpha", 2.0);
    const double x0 = take(p, "x0", 1.0);
    const double lambda = take(p, "lambda", 1.0);
    const double radius = take(p, "radius", 1000.0);

    BuiltinProblem out;
    out.radius_hint = radius;
    auto& m = out.model;
    m.name = "polydrift";
    m.drift_kernel = [=](double x, double y) { return alpha * x + y - x * y * y; };
    m.diffusion_kernel = [](double x, double) { return x; };
    m.lambda_hint = lambda;

    FactoredForm f;
    f.dim = 2;
    f.moment_map = [](double y, MomentVector& r, MomentVector& dr, MomentVector& d2r) {
        r[0] = y;
        r[1] = y * y;
        dr[0] = 1.0;
        dr[1] = 2.0 * y;
        d2r[0] = 0.0;
        d2r[1] = 2.0;
    };
    f.drift = [=](double x, const MomentVector& mv) { return alpha * x + mv[0] - x * mv[1]; };
    f.diffusion = [](double x, const MomentVector&) { return x; };
    f.drift_partials = [=](double x, const MomentVector& mv) {
        return CoefficientPartials{alpha * x + mv[0] - x * mv[1], alpha - mv[1], 0.0, {1.0, -x}};
    };
    f.diffusion_partials = [](double x, const MomentVector&) { return CoefficientPartials{x, 1.0, 0.0, {}}; };
    m.factored = std::move(f);

    out.initial = PointMassLaw{x0};
    out.reference.kind = OracleKind::ODE;
    out.reference.mean_at = [=](double t) { return polydrift_moments(alpha, x0, t).mean; };
    out.reference.second_moment_at = [=](double t) { return polydrift_moments(alpha, x0, t).second; };
    out.parameters = std::move(p);
    return out;
}

BuiltinProblem make_plane_rotator(ParameterMap p) {
    const double coupling = take(p, "K", 1.0);
    const double kbt = take(p, "kBT", 0.125);
    const double mu0 = take(p, "mu0", std::numbers::pi / 4.0);
    const double var0 = take(p, "var0", 3.0 * std::numbers::pi / 4.0);
    const double n0 = take(p, "n0", 40.0);
    const double lambda = take(p, "lambda", 2.0 * kbt);
    const double noise = std::sqrt(2.0 * kbt);
    if (!(n0 >= 1.0)) throw ValidationError("plane_rotator needs n0 >= 1");

    BuiltinProblem out;
    auto& m = out.model;
    m.name = "plane_rotator";
    m.drift_kernel = [=](double x, double y) { return coupling * std::sin(y - x) - std::sin(x); };
    m.diffusion_kernel = [=](double, double) { return noise; };
    m.lambda_hint = lambda;
    m.domain = Domain::circle(2.0 * std::numbers::pi);

    // K sin(y - x) = K (sin y cos x - cos y sin x), so r = (sin, cos).
    FactoredForm f;
    f.dim = 2;
    f.moment_map = [](double y, MomentVector& r, MomentVector& dr, MomentVector& d2r) {
        const double s = std::sin(y), c = std::cos(y);
        r[0] = s;
        r[1] = c;
        dr[0] = c;
        dr[1] = -s;
        d2r[0] = -s;
        d2r[1] = -c;
    };
    f.drift = [=](double x, const MomentVector& mv) {
        return coupling * (mv[0] * std::cos(x) - mv[1] * std::sin(x)) - std::sin(x);
    };
    f.diffusion = [=](double, const MomentVector&) { return noise; };
    f.drift_partials = [=](double x, const MomentVector& mv) {
        const double s = std::sin(x), c = std::cos(x);
        CoefficientPartials out_p;
        out_p.value = coupling * (mv[0] * c - mv[1] * s) - s;
        out_p.dx = coupling * (-mv[0] * s - mv[1] * c) - c;
        out_p.dxx = coupling * (-mv[0] * c + mv[1] * s) + s;
        out_p.dm = {coupling * c, -coupling * s};
        return out_p;
    };
    f.diffusion_partials = [=](double, const MomentVector&) { return CoefficientPartials{noise, 0.0, 0.0, {}}; };
    m.factored = std::move(f);

    out.initial = GaussianLaw{mu0, std::sqrt(var0), static_cast<std::size_t>(n0)};
    out.reference.kind = OracleKind::SelfConvergence;
    out.parameters = std::move(p);
    return out;
}

BuiltinProblem make_burgers(ParameterMap p) {
    const double sigma2 = take(p, "sigma2", 0.2);
    const double ell = take(p, "ell", 1e-3);
    const double heaviside = take(p, "heaviside", 0.0);
    const double lambda = take(p, "lambda", sigma2);
    if (!(ell > 0.0)) throw ValidationError("burgers needs ell > 0");
    const double sigma = std::sqrt(sigma2);

    BuiltinProblem out;
    auto& m = out.model;
    m.name = "burgers";
    if (heaviside != 0.0) {
        m.drift_kernel = [](double x, double y) { return x - y < 0.0 ? 1.0 : 0.0; };
    } else {
        m.drift_kernel = [ell](double x, double y) { return 0.5 * std::erfc((x - y) / ell); };
    }
    m.diffusion_kernel = [sigma](double, double) { return sigma; };
    m.lambda_hint = lambda;

    out.initial = PointMassLaw{0.0};
    out.reference.kind = OracleKind::ClosedForm;
    out.reference.mean_at = [](double t) { return 0.5 * t; };
    out.reference.second_moment_at = [sigma2](double t) {
        return t > 0.0 ? burgers_exact_second_moment(sigma2, t) : 0.0;
    };
    out.reference.cdf_at = [sigma2](double t, double x) {
        return t > 0.0 ? burgers_exact_cdf(sigma2, t, x) : (x >= 0.0 ? 1.0 : 0.0);
    };
    out.parameters = std::move(p);
    return out;
}

}  // namespace

std::vector<std::string> builtin_names() {
    return {"gbm", "ou_meanfield", "polydrift", "plane_rotator", "burgers"};
}

BuiltinProblem builtin(const std::string& name, const ParameterMap& overrides) {
    Factory make = nullptr;
    if (name == "gbm") make = make_gbm;
    else if (name == "ou_meanfield") make = make_ou;
    else if (name == "polydrift") make = make_polydrift;
    else if (name == "plane_rotator") make = make_plane_rotator;
    else if (name == "burgers") make = make_burgers;
    else throw UnknownModelError(name);
    reject_unknown(overrides, make, name);
    BuiltinProblem out = make(overrides);
    if (!(out.model.lambda_hint > 0.0)) throw ValidationError("lambda must be positive");
    return out;
}

}  // namespace mfgq
