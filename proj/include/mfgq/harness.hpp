#pragma once

#include "mfgq/mlmc.hpp"
#include "mfgq/models.hpp"
#include "mfgq/stepper.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace mfgq {

enum class Observable { Mean, SecondMoment, Sin, Sin2 };

std::string to_string(Observable o);
Observable parse_observable(std::string_view text);
std::function<double(double)> observable_function(Observable o);

struct ConvergenceRow {
    std::string method;  ///< gq1 | gq1e | gq2 | mlmc
    Observable observable = Observable::Mean;
    double dt = 0.0;  ///< step size, or tolerance for mlmc
    double value = 0.0;
    double reference = 0.0;
    double abs_error = 0.0;
    double rel_error = 0.0;
    double work = 0.0;
    double sum_m_cubed = 0.0;
    std::size_t points = 0;       ///< size of the final measure
    std::size_t rule_points = 0;  ///< size of the last compressed rule (0 if none)
    std::size_t max_m = 0;
    std::size_t bound_violations = 0;  ///< steps with m_n above the per-step ceiling
    double mass_error = 0.0;           ///< max |mass - 1| over the run
    double wall_time = 0.0;
};

struct SlopeFit {
    std::string method;
    Observable observable = Observable::Mean;
    double slope = 0.0;
    std::size_t rows_used = 0;
    bool degenerate = false;  ///< fewer than 3 usable rows
};

struct ConvergenceReport {
    std::string model;
    ParameterMap parameters;
    std::uint64_t seed = 0;
    std::string selection;
    bool relative_errors = false;  ///< slopes fitted on rel_error
    std::vector<ConvergenceRow> rows;
    std::vector<SlopeFit> error_slopes;  ///< log error against log dt
    std::vector<SlopeFit> work_slopes;   ///< log error against log work

    const SlopeFit* error_slope(const std::string& method, Observable o) const;
    const SlopeFit* work_slope(const std::string& method, Observable o) const;
    std::vector<const ConvergenceRow*> rows_for(const std::string& method, Observable o) const;
};

/// Least-squares slope of y on x.
double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Slope of log error on log x, skipping rows whose error is below the noise
/// floor 1e2 * eps * |reference|.
SlopeFit fit_log_slope(const std::vector<const ConvergenceRow*>& rows, bool against_work, bool relative = false);

struct ConvergenceOptions {
    std::vector<double> dt_grid;  ///< strictly decreasing
    std::vector<Scheme> schemes{Scheme::GQ1, Scheme::GQ1e, Scheme::GQ2};
    std::vector<Observable> observables{Observable::Mean, Observable::SecondMoment};
    StepperConfig base;  ///< dt is overwritten; order follows the scheme
    bool relative_slopes = false;  ///< fit on rel_error instead of abs_error
    bool parallel_rows = true;
};

/// Reference values at the horizon: from the oracle, or a GQ2 run at dt_ref.
std::vector<double> reference_values(const BuiltinProblem& problem, const std::vector<Observable>& observables,
                                     const StepperConfig& base, double dt_ref);

ConvergenceReport run_convergence(const BuiltinProblem& problem, const ConvergenceOptions& options);

/// GQ2 at dt_min / 8, as used for problems without a closed-form oracle.
std::vector<double> self_convergence_reference(const BuiltinProblem& problem,
                                               const std::vector<Observable>& observables,
                                               const StepperConfig& base, double dt_min);

/// Monotone piecewise-cubic interpolant of the cdf of an unsigned measure
/// through the jump midpoints (x_i, F(x_i) - w_i / 2), flat outside the hull.
class CdfSpline {
public:
    explicit CdfSpline(const DiscreteMeasure& m);
    double operator()(double x) const;
    double derivative(double x) const;

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

struct BurgersResult {
    double dt = 0.0;  ///< step actually used (1 / round(1 / dt))
    double l1_error = 0.0;       ///< spline cdf against the exact cdf on [-3, 4]
    double l1_step_error = 0.0;  ///< right-continuous step cdf against the exact cdf
    std::size_t n_points = 0;
    double mean_error = 0.0;
    double second_moment_error = 0.0;
};

BurgersResult run_burgers(double dt, double ell, Scheme scheme = Scheme::GQ1e, const StepperConfig& base = {},
                          const ParameterMap& overrides = {});

struct MlmcComparisonOptions {
    std::vector<double> dt_grid;
    std::vector<double> tolerances;
    StepperConfig base;  ///< selection for the quadrature runs
    MlmcOptions mlmc;
};

/// GQ1 / GQ1e / GQ2 and MLMC on geometric Brownian motion, errors relative to
/// e^-1. MLMC work is rescaled so its first point matches GQ1's first point.
ConvergenceReport compare_mlmc(const MlmcComparisonOptions& options, const ParameterMap& overrides = {});

/// Header: method,observable,dt,value,reference,abs_error,rel_error,work,sum_m3,points,rule_points,max_m[,wall_time]
void write_report_csv(std::ostream& os, const ConvergenceReport& report, bool include_wall_time = true);
/// Header: kind,method,observable,slope,rows_used,degenerate
void write_slopes_csv(std::ostream& os, const ConvergenceReport& report);

struct ChartSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Log-log line chart.
void write_svg_chart(std::ostream& os, const std::vector<ChartSeries>& series, const std::string& title,
                     const std::string& x_label, const std::string& y_label);

/// Error against dt, one series per method, for a single observable.
std::vector<ChartSeries> error_series(const ConvergenceReport& report, Observable o, bool against_work);

/// Header `x,cdf,pdf` on n equispaced nodes of [lo, hi].
void write_density_csv(std::ostream& os, const DiscreteMeasure& m, double lo, double hi, std::size_t n);

}  // namespace mfgq
