#include "mfgq/harness.hpp"

#include "mfgq/errors.hpp"

#include <cmath>
using std::isnan;  // boost 1.74 pchip calls it unqualified
#include <boost/math/interpolators/pchip.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <optional>
#include <ostream>

namespace mfgq {

std::string to_string(Observable o) {
    switch (o) {
        case Observable::Mean: return "mean";
        case Observable::SecondMoment: return "second_moment";
        case Observable::Sin: return "sin";
        case Observable::Sin2: return "sin2";
    }
    return "?";
}

Observable parse_observable(std::string_view text) {
    if (text == "mean") return Observable::Mean;
    if (text == "second_moment" || text == "m2") return Observable::SecondMoment;
    if (text == "sin") return Observable::Sin;
    if (text == "sin2") return Observable::Sin2;
    throw ValidationError("unknown observable: " + std::string(text));
}

std::function<double(double)> observable_function(Observable o) {
    switch (o) {
        case Observable::Mean: return [](double x) { return x; };
        case Observable::SecondMoment: return [](double x) { return x * x; };
        case Observable::Sin: return [](double x) { return std::sin(x); };
        case Observable::Sin2: return [](double x) {
            const double s = std::sin(x);
            return s * s;
        };
    }
    throw ValidationError("unknown observable");
}

namespace {

const SlopeFit* find_fit(const std::vector<SlopeFit>& fits, const std::string& method, Observable o) {
    for (const auto& f : fits)
        if (f.method == method && f.observable == o) return &f;
    return nullptr;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

const SlopeFit* ConvergenceReport::error_slope(const std::string& method, Observable o) const {
    return find_fit(error_slopes, method, o);
}

const SlopeFit* ConvergenceReport::work_slope(const std::string& method, Observable o) const {
    return find_fit(work_slopes, method, o);
}

std::vector<const ConvergenceRow*> ConvergenceReport::rows_for(const std::string& method, Observable o) const {
    std::vector<const ConvergenceRow*> out;
    for (const auto& r : rows)
        if (r.method == method && r.observable == o) out.push_back(&r);
    return out;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ValidationError("slope fit needs two or more paired values");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) throw ValidationError("slope fit needs distinct abscissae");
    return sxy / sxx;
}

SlopeFit fit_log_slope(const std::vector<const ConvergenceRow*>& rows, bool against_work, bool relative) {
    SlopeFit fit;
    if (!rows.empty()) {
        fit.method = rows.front()->method;
        fit.observable = rows.front()->observable;
    }
    const double eps = std::numeric_limits<double>::epsilon();
    std::vector<double> x, y;
    for (const auto* r : rows) {
        if (r->abs_error <= 1e2 * eps * std::abs(r->reference) || r->abs_error == 0.0) continue;
        const double e = relative ? r->rel_error : r->abs_error;
        const double h = against_work ? r->work : r->dt;
        if (!(e > 0.0) || !(h > 0.0)) continue;
        x.push_back(std::log(h));
        y.push_back(std::log(e));
    }
    fit.rows_used = x.size();
    fit.degenerate = x.size() < 3;
    if (x.size() >= 2) {
        try {
            fit.slope = least_squares_slope(x, y);
        } catch (const ValidationError&) {
            fit.degenerate = true;
        }
    }
    if (fit.degenerate && x.size() < 2) fit.slope = std::numeric_limits<double>::quiet_NaN();
    return fit;
}

namespace {

StepperConfig config_for(const BuiltinProblem& problem, const StepperConfig& base, Scheme scheme, double dt) {
    StepperConfig cfg = base;
    cfg.dt = dt;
    cfg.order = scheme == Scheme::GQ1 ? 1 : 2;
    if (!cfg.radius_override && problem.radius_hint) cfg.radius_override = problem.radius_hint;
    return cfg;
}

std::vector<double> evaluate(const DiscreteMeasure& m, const std::vector<Observable>& observables) {
    std::vector<double> v;
    v.reserve(observables.size());
    for (auto o : observables) v.push_back(expectation(m, observable_function(o)));
    return v;
}

bool needs_run(const ReferenceOracle& ref, Observable o) {
    if (o == Observable::Mean) return !ref.mean_at;
    if (o == Observable::SecondMoment) return !ref.second_moment_at;
    return true;
}

std::vector<double> gq2_reference(const BuiltinProblem& problem, const std::vector<Observable>& observables,
                                  const StepperConfig& base, double dt_ref) {
    StepperConfig cfg = config_for(problem, base, Scheme::GQ2, dt_ref);
    cfg.validate();
    const auto q0 = initial_measure(problem.initial, problem.model.domain);
    const auto run = propagate(problem.model, q0, cfg, Scheme::GQ2);
    return evaluate(run.measure, observables);
}

}  // namespace

std::vector<double> reference_values(const BuiltinProblem& problem, const std::vector<Observable>& observables,
                                     const StepperConfig& base, double dt_ref) {
    const auto& ref = problem.reference;
    std::vector<double> out(observables.size(), 0.0);
    std::optional<std::vector<double>> computed;
    for (std::size_t i = 0; i < observables.size(); ++i) {
        const Observable o = observables[i];
        if (!needs_run(ref, o)) {
            out[i] = o == Observable::Mean ? ref.mean_at(base.horizon) : ref.second_moment_at(base.horizon);
            continue;
        }
        if (!computed) computed = gq2_reference(problem, observables, base, dt_ref);
        out[i] = (*computed)[i];
    }
    return out;
}

std::vector<double> self_convergence_reference(const BuiltinProblem& problem,
                                               const std::vector<Observable>& observables,
                                               const StepperConfig& base, double dt_min) {
    return gq2_reference(problem, observables, base, dt_min / 8.0);
}

namespace {

struct JobResult {
    std::vector<double> values;
    double work = 0.0;
    double sum_m_cubed = 0.0;
    std::size_t points = 0;
    std::size_t rule_points = 0;
    std::size_t max_m = 0;
    std::size_t bound_violations = 0;
    double mass_error = 0.0;
    double wall_time = 0.0;
};

void scan_diagnostics(const std::vector<StepDiagnostics>& diags, const StepperConfig& cfg, double lambda,
                      bool check_bound, JobResult& out) {
    const double T = cfg.horizon;
    for (const auto& d : diags) {
        if (!d.compressed) continue;
        out.max_m = std::max(out.max_m, d.m);
        out.rule_points = std::max(out.rule_points, d.points_out);
        if (check_bound && d.t < T && static_cast<double>(d.m) > perstep_point_bound(cfg.dt, d.t / T, lambda))
            ++out.bound_violations;
    }
}

// Size of the last compressed rule in a run.
std::size_t last_rule(const std::vector<StepDiagnostics>& diags) {
    for (auto it = diags.rbegin(); it != diags.rend(); ++it)
        if (it->compressed) return it->points_out;
    return 0;
}

JobResult run_job(const BuiltinProblem& problem, const std::vector<Observable>& observables,
                  const StepperConfig& cfg, Scheme scheme) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto q0 = initial_measure(problem.initial, problem.model.domain);
    const double lambda = cfg.lambda.value_or(problem.model.lambda_hint);
    const bool check_bound =
        cfg.selection.mode == SelectionMode::PerStep && !problem.model.domain.is_circle();

    JobResult out;
    double mass_error = std::abs(q0.total_mass() - 1.0);
    StepObserver watch = [&mass_error](std::size_t, double, const DiscreteMeasure& q) {
        mass_error = std::max(mass_error, std::abs(q.total_mass() - 1.0));
    };

    if (scheme == Scheme::GQ1e) {
        auto r = propagate_extrapolated(problem.model, q0, cfg, watch);
        StepperConfig half = cfg;
        half.dt = cfg.dt / 2.0;
        scan_diagnostics(r.coarse.diagnostics, cfg, lambda, check_bound, out);
        scan_diagnostics(r.fine.diagnostics, half, lambda, check_bound, out);
        out.rule_points = std::max(last_rule(r.coarse.diagnostics), last_rule(r.fine.diagnostics));
        out.values = evaluate(r.measure, observables);
        out.work = static_cast<double>(r.work());
        out.sum_m_cubed = r.coarse.sum_m_cubed + r.fine.sum_m_cubed;
        out.points = r.measure.size();
        mass_error = std::max(mass_error, std::abs(r.measure.total_mass() - 1.0));
    } else {
        auto r = propagate(problem.model, q0, cfg, scheme, watch);
        scan_diagnostics(r.diagnostics, cfg, lambda, check_bound, out);
        out.rule_points = last_rule(r.diagnostics);
        out.values = evaluate(r.measure, observables);
        out.work = static_cast<double>(r.work());
        out.sum_m_cubed = r.sum_m_cubed;
        out.points = r.measure.size();
    }
    out.mass_error = mass_error;
    out.wall_time = elapsed(t0);
    return out;
}

void fit_all(ConvergenceReport& report, const std::vector<std::string>& methods,
             const std::vector<Observable>& observables) {
    for (const auto& method : methods) {
        for (auto o : observables) {
            const auto rows = report.rows_for(method, o);
            if (rows.empty()) continue;
            report.error_slopes.push_back(fit_log_slope(rows, false, report.relative_errors));
            report.work_slopes.push_back(fit_log_slope(rows, true, report.relative_errors));
        }
    }
}

}  // namespace

ConvergenceReport run_convergence(const BuiltinProblem& problem, const ConvergenceOptions& options) {
    const auto& grid = options.dt_grid;
    if (grid.empty()) throw ValidationError("empty dt grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0)) throw ValidationError("dt must be positive");
        if (i > 0 && !(grid[i] < grid[i - 1])) throw ValidationError("dt grid must be strictly decreasing");
    }
    if (options.schemes.empty() || options.observables.empty()) throw ValidationError("nothing to run");
    for (auto s : options.schemes) {
        for (double dt : grid) config_for(problem, options.base, s, dt).validate();
        if (s == Scheme::GQ2 && !problem.model.factored) throw MissingFactoredFormError();
    }

    const auto reference = reference_values(problem, options.observables, options.base, grid.back() / 8.0);

    struct Job {
        Scheme scheme;
        double dt;
    };
    std::vector<Job> jobs;
    for (auto s : options.schemes)
        for (double dt : grid) jobs.push_back({s, dt});
    std::vector<JobResult> results(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());

    const auto nj = static_cast<std::ptrdiff_t>(jobs.size());
#pragma omp parallel for schedule(dynamic) if (options.parallel_rows)
    for (std::ptrdiff_t j = 0; j < nj; ++j) {
        const auto& job = jobs[static_cast<std::size_t>(j)];
        try {
            results[static_cast<std::size_t>(j)] = run_job(
                problem, options.observables, config_for(problem, options.base, job.scheme, job.dt), job.scheme);
        } catch (...) {
            errors[static_cast<std::size_t>(j)] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    ConvergenceReport report;
    report.model = problem.model.name;
    report.parameters = problem.parameters;
    report.selection = options.base.selection.to_string();
    report.relative_errors = options.relative_slopes;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        const auto& r = results[j];
        for (std::size_t k = 0; k < options.observables.size(); ++k) {
            ConvergenceRow row;
            row.method = to_string(jobs[j].scheme);
            row.observable = options.observables[k];
            row.dt = jobs[j].dt;
            row.value = r.values[k];
            row.reference = reference[k];
            row.abs_error = std::abs(row.value - row.reference);
            row.rel_error = row.reference != 0.0 ? row.abs_error / std::abs(row.reference) : row.abs_error;
            row.work = r.work;
            row.sum_m_cubed = r.sum_m_cubed;
            row.points = r.points;
            row.rule_points = r.rule_points;
            row.max_m = r.max_m;
            row.bound_violations = r.bound_violations;
            row.mass_error = r.mass_error;
            row.wall_time = r.wall_time;
            report.rows.push_back(std::move(row));
        }
    }
    std::vector<std::string> methods;
    for (auto s : options.schemes) methods.push_back(to_string(s));
    fit_all(report, methods, options.observables);
    return report;
}

struct CdfSpline::Impl {
    std::optional<boost::math::interpolators::pchip<std::vector<double>>> spline;
    std::vector<double> x, f;  // nodes, used directly when too few for the spline
    double mass = 0.0;
};

CdfSpline::CdfSpline(const DiscreteMeasure& m) {
    if (m.empty()) throw EmptyMeasureError();
    if (m.is_signed()) throw SignedMeasureError();
    auto impl = std::make_shared<Impl>();
    const auto p = m.points();
    const auto w = m.weights();
    const double h_left = p.size() > 1 ? p[1] - p[0] : 1.0;
    const double h_right = p.size() > 1 ? p[p.size() - 1] - p[p.size() - 2] : 1.0;

    impl->x.push_back(p.front() - h_left);
    impl->f.push_back(0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        impl->x.push_back(p[i]);
        impl->f.push_back(acc + 0.5 * w[i]);
        acc += w[i];
    }
    impl->x.push_back(p.back() + h_right);
    impl->f.push_back(acc);
    impl->mass = acc;
    if (impl->x.size() >= 4) {
        auto xs = impl->x;
        auto fs = impl->f;
        impl->spline.emplace(std::move(xs), std::move(fs));
    }
    impl_ = std::move(impl);
}

double CdfSpline::operator()(double x) const {
    const auto& s = *impl_;
    if (x <= s.x.front()) return 0.0;
    if (x >= s.x.back()) return s.mass;
    if (s.spline) return (*s.spline)(x);
    const auto it = std::upper_bound(s.x.begin(), s.x.end(), x);
    const auto i = static_cast<std::size_t>(it - s.x.begin());
    const double u = (x - s.x[i - 1]) / (s.x[i] - s.x[i - 1]);
    return s.f[i - 1] + u * (s.f[i] - s.f[i - 1]);
}

double CdfSpline::derivative(double x) const {
    const auto& s = *impl_;
    if (x <= s.x.front() || x >= s.x.back()) return 0.0;
    if (s.spline) return s.spline->prime(x);
    const auto it = std::upper_bound(s.x.begin(), s.x.end(), x);
    const auto i = static_cast<std::size_t>(it - s.x.begin());
    return (s.f[i] - s.f[i - 1]) / (s.x[i] - s.x[i - 1]);
}

namespace {

template <typename F>
double trapezoid(F&& f, double lo, double hi, std::size_t n) {
    const double h = (hi - lo) / static_cast<double>(n - 1);
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double v = f(lo + h * static_cast<double>(k));
        acc += (k == 0 || k + 1 == n) ? 0.5 * v : v;
    }
    return acc * h;
}

}  // namespace

BurgersResult run_burgers(double dt, double ell, Scheme scheme, const StepperConfig& base,
                          const ParameterMap& overrides) {
    if (!(dt > 0.0)) throw ValidationError("dt must be positive");
    if (!(ell > 0.0)) throw ValidationError("ell must be positive");
    ParameterMap params = overrides;
    params["ell"] = ell;
    const auto problem = builtin("burgers", params);
    const double T = base.horizon;
    const double steps = std::max(1.0, std::round(T / dt));

    StepperConfig cfg = config_for(problem, base, scheme, T / steps);
    cfg.validate();
    const auto q0 = initial_measure(problem.initial);
    const auto exact = [&](double x) { return problem.reference.cdf_at(T, x); };
    constexpr double lo = -3.0, hi = 4.0;
    constexpr std::size_t nodes = 20001;

    BurgersResult out;
    out.dt = cfg.dt;
    DiscreteMeasure final_measure;
    if (scheme == Scheme::GQ1e) {
        auto r = propagate_extrapolated(problem.model, q0, cfg);
        const CdfSpline fine(r.fine.measure), coarse(r.coarse.measure);
        out.l1_error = trapezoid(
            [&](double x) { return std::abs(2.0 * fine(x) - coarse(x) - exact(x)); }, lo, hi, nodes);
        out.l1_step_error = trapezoid(
            [&](double x) { return std::abs(2.0 * cdf(r.fine.measure, x) - cdf(r.coarse.measure, x) - exact(x)); },
            lo, hi, nodes);
        final_measure = std::move(r.measure);
    } else {
        auto r = propagate(problem.model, q0, cfg, scheme);
        const CdfSpline s(r.measure);
        out.l1_error = trapezoid([&](double x) { return std::abs(s(x) - exact(x)); }, lo, hi, nodes);
        out.l1_step_error = cdf_l1_distance(r.measure, exact, lo, hi, nodes);
        final_measure = std::move(r.measure);
    }
    out.n_points = final_measure.size();
    out.mean_error = std::abs(expectation(final_measure, [](double x) { return x; }) - problem.reference.mean_at(T));
    out.second_moment_error = std::abs(expectation(final_measure, [](double x) { return x * x; }) -
                                       problem.reference.second_moment_at(T));
    return out;
}

ConvergenceReport compare_mlmc(const MlmcComparisonOptions& options, const ParameterMap& overrides) {
    const auto problem = builtin("gbm", overrides);
    ConvergenceOptions conv;
    conv.dt_grid = options.dt_grid;
    conv.observables = {Observable::Mean};
    conv.base = options.base;
    conv.relative_slopes = true;
    ConvergenceReport report = run_convergence(problem, conv);
    report.seed = options.mlmc.seed;

    const auto* law = std::get_if<PointMassLaw>(&problem.initial);
    if (!law) throw ValidationError("MLMC comparison needs a point-mass initial law");
    MlmcOptions mopt = options.mlmc;
    mopt.horizon = options.base.horizon;
    const double exact = problem.reference.mean_at(options.base.horizon);

    const auto t0 = std::chrono::steady_clock::now();
    const auto estimates =
        mlmc_estimate(problem.model, law->x, observable_function(Observable::Mean), options.tolerances, mopt);
    const double wall = elapsed(t0);

    double scale = 1.0;
    const auto gq1 = report.rows_for("gq1", Observable::Mean);
    if (!gq1.empty() && !estimates.empty() && estimates.front().mean_work() > 0.0)
        scale = gq1.front()->work / estimates.front().mean_work();

    for (const auto& e : estimates) {
        ConvergenceRow row;
        row.method = "mlmc";
        row.observable = Observable::Mean;
        row.dt = e.tolerance;
        row.value = e.mean_estimate();
        row.reference = exact;
        row.abs_error = e.rms_error(exact);
        row.rel_error = row.abs_error / std::abs(exact);
        row.work = e.mean_work() * scale;
        row.wall_time = wall / static_cast<double>(estimates.size());
        report.rows.push_back(row);
    }
    fit_all(report, {"mlmc"}, {Observable::Mean});
    return report;
}

void write_report_csv(std::ostream& os, const ConvergenceReport& report, bool include_wall_time) {
    os << "method,observable,dt,value,reference,abs_error,rel_error,work,sum_m3,points,rule_points,max_m";
    if (include_wall_time) os << ",wall_time";
    os << '\n';
    for (const auto& r : report.rows) {
        os << r.method << ',' << to_string(r.observable) << ',' << fmt(r.dt) << ',' << fmt(r.value) << ','
           << fmt(r.reference) << ',' << fmt(r.abs_error) << ',' << fmt(r.rel_error) << ',' << fmt(r.work) << ','
           << fmt(r.sum_m_cubed) << ',' << r.points << ',' << r.rule_points << ',' << r.max_m;
        if (include_wall_time) os << ',' << fmt(r.wall_time);
        os << '\n';
    }
}

void write_slopes_csv(std::ostream& os, const ConvergenceReport& report) {
    os << "kind,method,observable,slope,rows_used,degenerate\n";
    auto emit = [&](const char* kind, const std::vector<SlopeFit>& fits) {
        for (const auto& f : fits)
            os << kind << ',' << f.method << ',' << to_string(f.observable) << ',' << fmt(f.slope) << ','
               << f.rows_used << ',' << (f.degenerate ? 1 : 0) << '\n';
    };
    emit("error", report.error_slopes);
    emit("work", report.work_slopes);
}

std::vector<ChartSeries> error_series(const ConvergenceReport& report, Observable o, bool against_work) {
    std::vector<ChartSeries> out;
    for (const auto& r : report.rows) {
        if (r.observable != o) continue;
        auto it = std::find_if(out.begin(), out.end(), [&](const ChartSeries& s) { return s.label == r.method; });
        if (it == out.end()) {
            out.push_back({r.method, {}, {}});
            it = out.end() - 1;
        }
        it->x.push_back(against_work ? r.work : r.dt);
        it->y.push_back(report.relative_errors ? r.rel_error : r.abs_error);
    }
    return out;
}

void write_svg_chart(std::ostream& os, const std::vector<ChartSeries>& series, const std::string& title,
                     const std::string& x_label, const std::string& y_label) {
    constexpr double W = 640, H = 480, left = 80, right = 140, top = 40, bottom = 60;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0)) continue;
            x0 = std::min(x0, std::log10(s.x[i]));
            x1 = std::max(x1, std::log10(s.x[i]));
            y0 = std::min(y0, std::log10(s.y[i]));
            y1 = std::max(y1, std::log10(s.y[i]));
        }
    if (!(x1 >= x0)) x0 = 0, x1 = 1;
    if (!(y1 >= y0)) y0 = 0, y1 = 1;
    x0 = std::floor(x0), x1 = std::max(std::ceil(x1), x0 + 1);
    y0 = std::floor(y0), y1 = std::max(std::ceil(y1), y0 + 1);
    const double pw = W - left - right, ph = H - top - bottom;
    auto px = [&](double v) { return left + (std::log10(v) - x0) / (x1 - x0) * pw; };
    auto py = [&](double v) { return top + (y1 - std::log10(v)) / (y1 - y0) * ph; };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title << "</text>\n";
    os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double e = x0; e <= x1; e += 1.0) {
        const double x = left + (e - x0) / (x1 - x0) * pw;
        os << "<line x1=\"" << x << "\" y1=\"" << top << "\" x2=\"" << x << "\" y2=\"" << top + ph
           << "\" stroke=\"#ddd\"/>\n<text x=\"" << x << "\" y=\"" << top + ph + 18
           << "\" text-anchor=\"middle\" font-size=\"11\">1e" << e << "</text>\n";
    }
    for (double e = y0; e <= y1; e += 1.0) {
        const double y = top + (y1 - e) / (y1 - y0) * ph;
        os << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << left + pw << "\" y2=\"" << y
           << "\" stroke=\"#ddd\"/>\n<text x=\"" << left - 6 << "\" y=\"" << y + 4
           << "\" text-anchor=\"end\" font-size=\"11\">1e" << e << "</text>\n";
    }
    os << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 16 << "\" text-anchor=\"middle\" font-size=\"13\">"
       << x_label << "</text>\n";
    os << "<text x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
       << top + ph / 2 << ")\">" << y_label << "</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* c = colors[k % std::size(colors)];
        os << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
            if (s.x[i] > 0.0 && s.y[i] > 0.0) os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
        os << "\"/>\n";
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
            if (s.x[i] > 0.0 && s.y[i] > 0.0)
                os << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"3\" fill=\"" << c
                   << "\"/>\n";
        const double ly = top + 16 + 18 * static_cast<double>(k);
        os << "<line x1=\"" << W - right + 12 << "\" y1=\"" << ly << "\" x2=\"" << W - right + 36 << "\" y2=\""
           << ly << "\" stroke=\"" << c << "\" stroke-width=\"2\"/>\n<text x=\"" << W - right + 42 << "\" y=\""
           << ly + 4 << "\" font-size=\"12\">" << s.label << "</text>\n";
    }
    os << "</svg>\n";
}

void write_density_csv(std::ostream& os, const DiscreteMeasure& m, double lo, double hi, std::size_t n) {
    if (n < 2 || !(hi > lo)) throw ValidationError("density grid needs n >= 2 and hi > lo");
    const CdfSpline s(m);
    os << "x,cdf,pdf\n";
    const double h = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t k = 0; k < n; ++k) {
        const double x = lo + h * static_cast<double>(k);
        os << fmt(x) << ',' << fmt(s(x)) << ',' << fmt(s.derivative(x)) << '\n';
    }
}

}  // namespace mfgq
