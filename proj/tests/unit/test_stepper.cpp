#include "brute.hpp"

#include "mfgq/errors.hpp"
#include "mfgq/stepper.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace mfgq;

namespace {

MeanFieldModel still_model() {
    MeanFieldModel m;
    m.name = "still";
    m.drift_kernel = [](double, double) { return 0.0; };
    m.diffusion_kernel = [](double, double) { return 0.0; };
    FactoredForm f;
    f.dim = 1;
    f.moment_map = [](double y, MomentVector& r, MomentVector& dr, MomentVector& d2r) {
        r[0] = y;
        dr[0] = 1.0;
        d2r[0] = 0.0;
    };
    f.drift = [](double, const MomentVector&) { return 0.0; };
    f.diffusion = [](double, const MomentVector&) { return 0.0; };
    m.factored = f;
    return m;
}

MeanFieldModel ordinary_ou(double alpha, double sigma) {
    MeanFieldModel m;
    m.drift_kernel = [alpha](double x, double) { return alpha * x; };
    m.diffusion_kernel = [sigma](double, double) { return sigma; };
    m.law_dependent = false;
    FactoredForm f;
    f.dim = 1;
    f.moment_map = [](double y, MomentVector& r, MomentVector& dr, MomentVector& d2r) {
        r[0] = y;
        dr[0] = 1.0;
        d2r[0] = 0.0;
    };
    f.drift = [alpha](double x, const MomentVector&) { return alpha * x; };
    f.diffusion = [sigma](double, const MomentVector&) { return sigma; };
    m.factored = f;
    return m;
}

}  // namespace

TEST_CASE("config validation and parsing") {
    StepperConfig c;
    c.dt = 0.1;
    CHECK(c.steps() == 10);
    c.dt = 0.3;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c.dt = -1.0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c.dt = 0.25;
    c.compression_period = 0;
    CHECK_THROWS_AS(c.validate(), ValidationError);

    CHECK(Selection::parse("fixed:12").fixed_points == 12);
    CHECK(Selection::parse("perstep").mode == SelectionMode::PerStep);
    CHECK(Selection::parse("meanfield").to_string() == "meanfield");
    CHECK(Selection::fixed(7).to_string() == "fixed:7");
    CHECK_THROWS_AS(Selection::parse("fixed:x"), ValidationError);
    CHECK_THROWS_AS(Selection::parse("sometimes"), ValidationError);
    CHECK(parse_scheme("gq1e") == Scheme::GQ1e);
    CHECK(to_string(Scheme::GQ2) == "gq2");
    CHECK_THROWS_AS(parse_scheme("gq3"), ValidationError);
}

TEST_CASE("point-count selection") {
    CHECK(select_m(Selection::fixed(12), 0.01, 0.5, 1.0, 1) == 12);

    // Smooth: (p + 1/2)|log dt| + (2m - 1)/2 log(16 |log dt| / lambda) against log (2m)!
    const double dt = 1e-3, lambda = 0.25;
    for (int p : {1, 2}) {
        const double L = -std::log(dt);
        std::size_t expected = 1;
        while (brute::log_factorial_2m(expected) <
               (p + 0.5) * L + (2.0 * expected - 1.0) / 2.0 * std::log(16.0 * L / lambda))
            ++expected;
        CHECK(select_m(Selection{SelectionMode::Smooth}, dt, 0.0, lambda, p) == expected);
    }

    for (double h : {0.25, 1e-2, 1e-4, 1e-6})
        for (double t : {0.0, 0.5, 0.9, 0.999})
            for (double lam : {0.1, 1.0, 4.0}) {
                const auto m = select_m(Selection{SelectionMode::PerStep}, h, t, lam, 1);
                CHECK(static_cast<double>(m) <= perstep_point_bound(h, t, lam));
                CHECK(m >= 1);
            }

    CHECK(select_m(Selection{SelectionMode::MeanField}, 0.01, 0.0, 1.0, 1, 40) >= 40);
    CHECK(select_m(Selection{SelectionMode::MeanField}, 0.01, 0.0, 1.0, 1) >=
          select_m(Selection{SelectionMode::Smooth}, 0.01, 0.0, 1.0, 1));
    CHECK_THROWS_AS(select_m(Selection{SelectionMode::PerStep}, 0.01, 1.0, 1.0, 1), ValidationError);
    CHECK_THROWS_AS(select_m(Selection{SelectionMode::Smooth}, 0.01, 0.0, -1.0, 1), ValidationError);
    CHECK_THROWS_AS(select_m(Selection{SelectionMode::Smooth}, 0.01, 0.0, 1e-300, 1), NoSolutionError);

    CHECK(support_radius(0.01, 1.0) == doctest::Approx(std::sqrt(4.0 * std::log(100.0))));
    CHECK(clamped_log_dt(0.9) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("Euler-Maruyama branching") {
    const auto still = still_model();
    std::mt19937_64 rng(1);
    const auto q = brute::random_measure(rng, 30, -1.0, 1.0, true);
    CHECK(em_branch_step(q, still, 0.1) == q);

    const double alpha = -0.4, sigma = 0.7, x = 1.5, dt = 0.04;
    const auto one = em_branch_step(DiscreteMeasure::point_mass(x), ordinary_ou(alpha, sigma), dt);
    REQUIRE(one.size() == 2);
    CHECK(one.points()[0] == doctest::Approx(x + alpha * x * dt - sigma * std::sqrt(dt)));
    CHECK(one.points()[1] == doctest::Approx(x + alpha * x * dt + sigma * std::sqrt(dt)));
    CHECK(one.weights()[0] == 0.5);

    const auto ou = builtin("ou_meanfield");
    const auto step = em_branch_step(DiscreteMeasure::point_mass(1.0), ou.model, 0.1);
    CHECK(expectation(step, [](double v) { return v; }) == doctest::Approx(1.0 + (-0.5 + 0.8) * 0.1));

    std::uint64_t evals = 0;
    const auto big = em_branch_step(q, builtin("burgers").model, 0.01, Exec::Serial, &evals);
    CHECK(evals > 0);
    CHECK(big.total_mass() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(em_branch_step(q, builtin("burgers").model, 0.01, Exec::Parallel) == big);
}

TEST_CASE("second-order branching") {
    const auto still = still_model();
    std::mt19937_64 rng(2);
    const auto q = brute::random_measure(rng, 20, -1.0, 1.0, true);
    const auto same = gq2_step(q, still, 0.1);
    REQUIRE(same.size() == q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        CHECK(same.points()[i] == q.points()[i]);
        CHECK(same.weights()[i] == doctest::Approx(q.weights()[i]).epsilon(1e-15));
    }

    const double alpha = -0.6, sigma = 0.5, x = 0.8, dt = 0.05;
    const auto kids = gq2_step(DiscreteMeasure::point_mass(x), ordinary_ou(alpha, sigma), dt);
    REQUIRE(kids.size() == 3);
    const double xi[] = {-std::sqrt(3.0), 0.0, std::sqrt(3.0)};
    const double w[] = {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0};
    for (int i = 0; i < 3; ++i) {
        const double dw = std::sqrt(dt) * xi[i];
        const double expect = x + alpha * x * dt + sigma * dw + 0.5 * alpha * sigma * dw * dt +
                              0.5 * alpha * alpha * x * dt * dt;
        CHECK(kids.points()[static_cast<std::size_t>(i)] == doctest::Approx(expect).epsilon(1e-13));
        CHECK(kids.weights()[static_cast<std::size_t>(i)] == doctest::Approx(w[i]));
    }

    // one-step mean defect against exp((alpha + beta) dt) is O(dt^3)
    const auto ou = builtin("ou_meanfield");
    auto defect = [&](double h) {
        const auto s = gq2_step(DiscreteMeasure::point_mass(1.0), ou.model, h);
        return std::abs(expectation(s, [](double v) { return v; }) - std::exp(0.3 * h));
    };
    const double ratio = defect(0.1) / defect(0.05);
    CHECK(ratio == doctest::Approx(8.0).epsilon(0.05));

    CHECK_THROWS_AS(gq2_step(q, builtin("burgers").model, 0.1), MissingFactoredFormError);
}

TEST_CASE("support reduction") {
    const auto q = DiscreteMeasure::from_atoms({-5.0, 0.0, 5.0}, {0.25, 0.5, 0.25});
    const auto r = support_reduce(q, 1.0);
    CHECK(r.measure == DiscreteMeasure::from_atoms({-1.0, 0.0, 1.0}, {0.25, 0.5, 0.25}));
    CHECK(r.tail_mass == 0.5);
    CHECK(support_reduce(q, 10.0).measure == q);
    CHECK(support_reduce(q, 10.0).tail_mass == 0.0);
    CHECK_THROWS_AS(support_reduce(q, 0.0), ValidationError);
}

TEST_CASE("compression step") {
    const auto small = DiscreteMeasure::from_atoms({-0.5, 0.0, 0.5}, {0.25, 0.5, 0.25});
    CHECK(compress_step(small, 5, 3.0, Domain::line()).measure == small);

    std::mt19937_64 rng(12);
    const auto q = brute::random_measure(rng, 128, -4.0, 4.0, true);
    const double R = 3.0;
    const std::size_t m = 6;
    const auto c = compress_step(q, m, R, Domain::line());
    CHECK(c.compressed);
    CHECK(c.measure.size() <= m + 2);
    CHECK(c.measure.total_mass() == doctest::Approx(1.0).epsilon(1e-13));

    std::vector<double> ix, iw;
    for (std::size_t i = 0; i < q.size(); ++i)
        if (std::abs(q.points()[i]) < R) {
            ix.push_back(q.points()[i]);
            iw.push_back(q.weights()[i]);
        }
    const auto interior = DiscreteMeasure::from_atoms(ix, iw);
    std::vector<double> cx, cw;
    for (std::size_t i = 0; i < c.measure.size(); ++i)
        if (std::abs(c.measure.points()[i]) < R) {
            cx.push_back(c.measure.points()[i]);
            cw.push_back(c.measure.weights()[i]);
        }
    const auto out = DiscreteMeasure::from_atoms(cx, cw);
    for (int k = 0; k < 2 * static_cast<int>(m); ++k) {
        const long double a = brute::moment(out, k), b = brute::moment(interior, k);
        CHECK(static_cast<double>(std::abs(a - b)) <= 1e-9 * static_cast<double>(std::max(std::abs(b), 1e-3L)));
    }

    const double period = 2.0 * std::numbers::pi;
    const auto wrapped = compress_step(DiscreteMeasure::point_mass(period + 0.3), 3, 1.0, Domain::circle(period));
    REQUIRE(wrapped.measure.size() == 1);
    CHECK(wrapped.measure.points()[0] == doctest::Approx(0.3));
    CHECK(wrapped.measure.weights()[0] == 1.0);

    const auto circ = compress_step(brute::random_measure(rng, 200, 0.0, period, true), 4, 1.0,
                                    Domain::circle(period), 10);
    CHECK(circ.measure.size() <= 40);
    CHECK(circ.measure.total_mass() == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("propagation") {
    const auto still = still_model();
    std::mt19937_64 rng(4);
    const auto q0 = brute::random_measure(rng, 12, -1.0, 1.0, true);
    StepperConfig cfg;
    cfg.dt = 0.125;
    CHECK(propagate(still, q0, cfg, Scheme::GQ1).measure == q0);
    const auto still2 = propagate(still, q0, cfg, Scheme::GQ2).measure;
    REQUIRE(still2.size() == q0.size());
    for (std::size_t i = 0; i < q0.size(); ++i)
        CHECK(still2.weights()[i] == doctest::Approx(q0.weights()[i]).epsilon(1e-14));
    const auto ex = propagate_extrapolated(still, q0, cfg);
    for (double p : {1.0, 2.0, 3.0}) {
        const auto f = [p](double x) { return std::pow(x, p); };
        CHECK(expectation(ex.measure, f) == doctest::Approx(expectation(q0, f)));
    }

    // first-order decay of the GBM mean error with a fixed rule size
    const auto gbm = builtin("gbm");
    const auto x0 = initial_measure(gbm.initial);
    auto err = [&](double h) {
        StepperConfig c;
        c.dt = h;
        c.selection = Selection::fixed(20);
        return std::abs(expectation(propagate(gbm.model, x0, c, Scheme::GQ1).measure, [](double v) { return v; }) -
                        std::exp(-1.0));
    };
    CHECK(err(1.0 / 64) / err(1.0 / 128) == doctest::Approx(2.0).epsilon(0.05));

    // serial and parallel paths produce identical results
    const auto ou = builtin("ou_meanfield");
    StepperConfig s, p;
    s.dt = p.dt = 1.0 / 32;
    s.exec = Exec::Serial;
    const auto o0 = initial_measure(ou.initial);
    const auto rs = propagate(ou.model, o0, s, Scheme::GQ2);
    const auto rp = propagate(ou.model, o0, p, Scheme::GQ2);
    CHECK(rs.measure == rp.measure);
    CHECK(rs.work() == rp.work());

    std::size_t seen = 0;
    double worst = 0.0;
    propagate(ou.model, o0, s, Scheme::GQ1, [&](std::size_t, double, const DiscreteMeasure& q) {
        ++seen;
        worst = std::max(worst, std::abs(q.total_mass() - 1.0));
    });
    CHECK(seen == 32);
    CHECK(worst <= 1e-12);
    CHECK(rs.diagnostics.size() == 32);
    CHECK_FALSE(rs.diagnostics.back().compressed);
    for (const auto& d : rs.diagnostics) CHECK(d.m >= 1);

    std::ostringstream os;
    write_diagnostics_csv(os, rs.diagnostics);
    CHECK(os.str().rfind("n,t,m_n,R,points_out,tail_mass,kernel_evals\n", 0) == 0);

    CHECK_THROWS_AS(propagate(ou.model, o0, s, Scheme::GQ1e), ValidationError);
    CHECK_THROWS_AS(propagate(builtin("burgers").model, o0, s, Scheme::GQ2), MissingFactoredFormError);
    const auto signed_q = DiscreteMeasure::from_atoms({0.0, 1.0}, {2.0, -1.0});
    CHECK_THROWS_AS(propagate(ou.model, signed_q, s, Scheme::GQ1), ValidationError);

    const auto run = run_scheme(ou.model, o0, s, Scheme::GQ1e);
    CHECK(run.measure.is_signed());
    CHECK(run.work > 0);
}
