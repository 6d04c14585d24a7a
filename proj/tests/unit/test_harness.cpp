#include "mfgq/errors.hpp"
#include "mfgq/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace mfgq;

namespace {

BuiltinProblem still_problem() {
    BuiltinProblem p;
    p.model.name = "still";
    p.model.drift_kernel = [](double, double) { return 0.0; };
    p.model.diffusion_kernel = [](double, double) { return 0.0; };
    FactoredForm f;
    f.dim = 1;
    f.moment_map = [](double y, MomentVector& r, MomentVector& dr, MomentVector& d2r) {
        r[0] = y;
        dr[0] = 1.0;
        d2r[0] = 0.0;
    };
    f.drift = [](double, const MomentVector&) { return 0.0; };
    f.diffusion = [](double, const MomentVector&) { return 0.0; };
    p.model.factored = f;
    p.initial = PointMassLaw{1.0};
    p.reference.mean_at = [](double) { return 1.0; };
    p.reference.second_moment_at = [](double) { return 1.0; };
    return p;
}

std::vector<double> dyadic(int from, int to) {
    std::vector<double> out;
    for (int e = from; e <= to; ++e) out.push_back(std::ldexp(1.0, -e));
    return out;
}

}  // namespace

TEST_CASE("slope fitting") {
    CHECK(least_squares_slope({0.0, 1.0, 2.0}, {1.0, 3.0, 5.0}) == doctest::Approx(2.0));
    CHECK_THROWS_AS(least_squares_slope({1.0}, {1.0}), ValidationError);
    CHECK_THROWS_AS(least_squares_slope({1.0, 1.0}, {1.0, 2.0}), ValidationError);

    std::vector<ConvergenceRow> rows;
    for (int k = 0; k < 5; ++k) {
        ConvergenceRow r;
        r.method = "gq1";
        r.dt = std::ldexp(1.0, -k);
        r.reference = 2.0;
        r.abs_error = 0.3 * r.dt * r.dt;
        r.rel_error = r.abs_error / 2.0;
        r.work = 1.0 / r.dt;
        rows.push_back(r);
    }
    rows.back().abs_error = 1e-18;  // below the noise floor
    std::vector<const ConvergenceRow*> ptr;
    for (const auto& r : rows) ptr.push_back(&r);
    const auto fit = fit_log_slope(ptr, false);
    CHECK(fit.slope == doctest::Approx(2.0));
    CHECK(fit.rows_used == 4);
    CHECK_FALSE(fit.degenerate);
    CHECK(fit_log_slope(ptr, true, true).slope == doctest::Approx(-2.0));
    ptr.resize(2);
    CHECK(fit_log_slope(ptr, false).degenerate);
}

TEST_CASE("motionless model reports zero error and degenerate fits") {
    ConvergenceOptions opt;
    opt.dt_grid = dyadic(2, 5);
    const auto report = run_convergence(still_problem(), opt);
    CHECK(report.rows.size() == 3 * 4 * 2);
    for (const auto& r : report.rows) CHECK(r.abs_error <= 1e-15);
    for (const auto& f : report.error_slopes) CHECK(f.degenerate);
}

TEST_CASE("OU convergence orders on a short grid") {
    ConvergenceOptions opt;
    opt.dt_grid = dyadic(3, 6);
    const auto report = run_convergence(builtin("ou_meanfield"), opt);
    const auto* g1 = report.error_slope("gq1", Observable::Mean);
    const auto* g2 = report.error_slope("gq2", Observable::SecondMoment);
    const auto* ge = report.error_slope("gq1e", Observable::Mean);
    REQUIRE(g1);
    REQUIRE(g2);
    REQUIRE(ge);
    CHECK(g1->slope == doctest::Approx(1.0).epsilon(0.2));
    CHECK(g2->slope == doctest::Approx(2.0).epsilon(0.2));
    CHECK(ge->slope == doctest::Approx(2.0).epsilon(0.2));
    for (const auto& r : report.rows) CHECK(r.mass_error <= 1e-10);

    std::ostringstream a, b;
    write_report_csv(a, report, false);
    write_report_csv(b, run_convergence(builtin("ou_meanfield"), opt), false);
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("method,observable,dt,value,reference,abs_error,rel_error,work,sum_m3,points,rule_points,max_m\n", 0) == 0);

    std::ostringstream s;
    write_slopes_csv(s, report);
    CHECK(s.str().rfind("kind,method,observable,slope,rows_used,degenerate\n", 0) == 0);

    std::ostringstream svg;
    write_svg_chart(svg, error_series(report, Observable::Mean, false), "ou", "dt", "error");
    CHECK(svg.str().find("<svg") == 0);
    CHECK(svg.str().find("polyline") != std::string::npos);
    CHECK(error_series(report, Observable::Mean, true).size() == 3);
}

TEST_CASE("convergence input checks") {
    ConvergenceOptions opt;
    opt.dt_grid = {0.125, 0.25};
    CHECK_THROWS_AS(run_convergence(builtin("ou_meanfield"), opt), ValidationError);
    opt.dt_grid = {0.3};
    CHECK_THROWS_AS(run_convergence(builtin("ou_meanfield"), opt), ValidationError);
    opt.dt_grid = {0.125};
    CHECK_THROWS_AS(run_convergence(builtin("burgers"), opt), MissingFactoredFormError);
    CHECK_THROWS_AS(parse_observable("kurtosis"), ValidationError);
    CHECK(to_string(parse_observable("sin2")) == "sin2");
}

TEST_CASE("self-convergence reference") {
    const auto pr = builtin("plane_rotator");
    StepperConfig base;
    const std::vector<Observable> obs{Observable::Sin, Observable::Sin2};
    const auto a = self_convergence_reference(pr, obs, base, 0.25);
    const auto b = reference_values(pr, obs, base, 0.25 / 8.0);
    CHECK(a == b);
    CHECK((a[1] > 0.0 && a[1] < 1.0));
}

TEST_CASE("cdf spline") {
    const auto m = DiscreteMeasure::from_atoms({0.0, 1.0, 2.0, 4.0}, {0.1, 0.4, 0.3, 0.2});
    const CdfSpline s(m);
    CHECK(s(-10.0) == 0.0);
    CHECK(s(10.0) == doctest::Approx(1.0));
    CHECK(s(1.0) == doctest::Approx(0.3));
    CHECK(s(2.0) == doctest::Approx(0.65));
    double prev = 0.0;
    for (double x = -2.0; x <= 7.0; x += 0.01) {
        CHECK(s(x) >= prev - 1e-15);
        CHECK(s.derivative(x) >= -1e-12);
        prev = s(x);
    }
    const CdfSpline single(DiscreteMeasure::point_mass(1.0));
    CHECK(single(1.0) == doctest::Approx(0.5));
    CHECK(single(0.5) == doctest::Approx(0.25));
    CHECK(single.derivative(1.5) == doctest::Approx(0.5));
    CHECK_THROWS_AS(CdfSpline(DiscreteMeasure{}), EmptyMeasureError);
    CHECK_THROWS_AS(CdfSpline(DiscreteMeasure::from_atoms({0.0, 1.0}, {2.0, -1.0})), SignedMeasureError);

    std::ostringstream os;
    write_density_csv(os, m, -1.0, 5.0, 11);
    CHECK(os.str().rfind("x,cdf,pdf\n", 0) == 0);
    CHECK_THROWS_AS(write_density_csv(os, m, 1.0, 0.0, 11), ValidationError);
}

TEST_CASE("Burgers soliton centre with the first-order scheme") {
    const auto r = run_burgers(0.05, 1e-3, Scheme::GQ1);
    CHECK(r.mean_error < 1e-6);
    CHECK(r.dt == doctest::Approx(0.05));
    CHECK(r.l1_error < 0.1);
    CHECK(r.n_points > 0);
    CHECK_THROWS_AS(run_burgers(0.0, 1e-3), ValidationError);
    CHECK_THROWS_AS(run_burgers(0.05, -1.0), ValidationError);
}

TEST_CASE("MLMC comparison report") {
    MlmcComparisonOptions opt;
    opt.dt_grid = dyadic(3, 5);
    opt.tolerances = {0.04, 0.02};
    opt.mlmc.replicates = 2;
    const auto report = compare_mlmc(opt);
    for (const auto* m : {"gq1", "gq1e", "gq2", "mlmc"}) CHECK_FALSE(report.rows_for(m, Observable::Mean).empty());
    CHECK(report.relative_errors);
    const auto gq1 = report.rows_for("gq1", Observable::Mean);
    const auto ml = report.rows_for("mlmc", Observable::Mean);
    CHECK(ml.front()->work == doctest::Approx(gq1.front()->work));
    std::ostringstream a, b;
    write_report_csv(a, report, false);
    write_report_csv(b, compare_mlmc(opt), false);
    CHECK(a.str() == b.str());
}
