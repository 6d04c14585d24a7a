#include "brute.hpp"

#include "mfgq/errors.hpp"
#include "mfgq/kernels.hpp"
#include "mfgq/models.hpp"
#include "mfgq/oracles.hpp"

#include <doctest.h>

#include <boost/numeric/odeint.hpp>

#include <cmath>
#include <numbers>

using namespace mfgq;

TEST_CASE("mean-field coefficients on simple laws") {
    MeanFieldModel m;
    m.drift_kernel = [](double x, double) { return -0.7 * x; };
    m.diffusion_kernel = [](double x, double) { return x; };
    std::mt19937_64 rng(3);
    const auto q = brute::random_measure(rng, 10, -1.0, 1.0, true);
    CHECK(mean_field_drift(m, 2.0, q) == doctest::Approx(-1.4));
    CHECK(mean_field_diffusion(m, 2.0, q) == doctest::Approx(2.0));

    const auto ou = builtin("ou_meanfield");
    const auto sym = DiscreteMeasure::from_atoms({-1.0, 1.0}, {0.5, 0.5});
    CHECK(mean_field_drift(ou.model, 0.3, sym) == doctest::Approx(-0.5 * 0.3));
    CHECK(mean_field_diffusion(ou.model, 0.3, sym) == doctest::Approx(std::sqrt(0.5)));

    const auto pr = builtin("plane_rotator");
    CHECK(mean_field_drift(pr.model, 0.9, DiscreteMeasure::point_mass(0.9)) == doctest::Approx(-std::sin(0.9)));

    const auto bg = builtin("burgers");
    CHECK(mean_field_diffusion(bg.model, 1.0, sym) == doctest::Approx(std::sqrt(0.2)));

    MeanFieldModel outer = m;
    outer.outer_drift = [](double a) { return a * a; };
    CHECK(mean_field_drift(outer, 2.0, q) == doctest::Approx(1.96));
}

TEST_CASE("factored forms agree with the kernels") {
    std::mt19937_64 rng(41);
    for (const auto* name : {"gbm", "ou_meanfield", "polydrift", "plane_rotator"}) {
        CAPTURE(name);
        const auto p = builtin(name);
        REQUIRE(p.model.factored);
        const auto& f = *p.model.factored;
        const auto q = brute::random_measure(rng, 25, -1.5, 1.5, true);
        const auto mv = moments(f, q);
        for (double x : {-1.2, 0.1, 0.8}) {
            CHECK(f.drift(x, mv) == doctest::Approx(mean_field_drift(p.model, x, q)).epsilon(1e-12));
            CHECK(f.diffusion(x, mv) == doctest::Approx(mean_field_diffusion(p.model, x, q)).epsilon(1e-12));
            const auto a = drift_partials(f, x, mv);
            const auto fd = finite_difference_partials(f.drift, f.dim, x, mv);
            CHECK(a.value == doctest::Approx(fd.value));
            CHECK(a.dx == doctest::Approx(fd.dx).epsilon(1e-6).scale(1.0));
            CHECK(a.dxx == doctest::Approx(fd.dxx).epsilon(1e-3).scale(1.0));
            for (std::size_t i = 0; i < f.dim; ++i) CHECK(a.dm[i] == doctest::Approx(fd.dm[i]).epsilon(1e-6).scale(1.0));
            const auto b = diffusion_partials(f, x, mv);
            const auto fb = finite_difference_partials(f.diffusion, f.dim, x, mv);
            CHECK(b.dx == doctest::Approx(fb.dx).epsilon(1e-6).scale(1.0));
        }
        // moment map derivatives against differences of r
        MomentVector r0, r1, r2, dr, d2r, tmp;
        const double y = 0.37, h = 1e-5;
        f.moment_map(y, r0, dr, d2r);
        f.moment_map(y + h, r1, tmp, tmp);
        f.moment_map(y - h, r2, tmp, tmp);
        for (std::size_t i = 0; i < f.dim; ++i) {
            CHECK(dr[i] == doctest::Approx((r1[i] - r2[i]) / (2 * h)).epsilon(1e-7).scale(1.0));
            CHECK(d2r[i] == doctest::Approx((r1[i] - 2 * r0[i] + r2[i]) / (h * h)).epsilon(1e-3).scale(1.0));
        }
    }
}

TEST_CASE("builtin problems") {
    CHECK(builtin("gbm").reference.mean_at(1.0) == doctest::Approx(std::exp(-1.0)));
    const auto ou = builtin("ou_meanfield");
    for (double t : {0.0, 0.4, 1.0}) CHECK(ou.reference.mean_at(t) == doctest::Approx(std::exp(0.3 * t)));
    const auto pr = builtin("plane_rotator");
    const auto q0 = initial_measure(pr.initial, pr.model.domain);
    CHECK(q0.size() == 40);
    CHECK(q0.total_mass() == doctest::Approx(1.0).epsilon(1e-14));
    for (double x : q0.points()) CHECK((x >= 0.0 && x < 2.0 * std::numbers::pi));
    CHECK(builtin("polydrift").radius_hint.value() == 1000.0);
    CHECK(builtin("ou_meanfield", {{"alpha", -1.0}}).parameters.at("alpha") == -1.0);
    CHECK(builtin_names().size() == 5);
    CHECK_THROWS_AS(builtin("heat"), UnknownModelError);
    CHECK_THROWS_AS(builtin("gbm", {{"nonsense", 1.0}}), ValidationError);
    CHECK_THROWS_AS(builtin("burgers", {{"ell", 0.0}}), ValidationError);
    CHECK_THROWS_AS(builtin("gbm", {{"lambda", -1.0}}), ValidationError);
}

TEST_CASE("initial laws and wrapping") {
    CHECK(initial_measure(PointMassLaw{2.0}) == DiscreteMeasure::point_mass(2.0));
    const auto g = initial_measure(GaussianLaw{1.0, 2.0, 7});
    CHECK(g.size() == 7);
    CHECK(expectation(g, [](double x) { return x; }) == doctest::Approx(1.0));
    CHECK(wrap_to_period(2.0 * std::numbers::pi + 0.3, 2.0 * std::numbers::pi) == doctest::Approx(0.3));
    CHECK(wrap_to_period(-0.5, 2.0) == doctest::Approx(1.5));
    CHECK_THROWS_AS(initial_measure(ExplicitLaw{}), ValidationError);
}

TEST_CASE("OU moment formula") {
    const auto z = ou_moments(-0.5, 0.8, 0.5, 1.0, 0.0);
    CHECK(z.mean == 1.0);
    CHECK(z.second == 1.0);
    const auto one = ou_moments(-0.5, 0.8, 0.5, 1.0, 1.0);
    CHECK(one.mean == doctest::Approx(std::exp(0.3)));
    CHECK(one.second == doctest::Approx(std::exp(0.6) + 0.5 * (1.0 - std::exp(-1.0))));
    const auto decay = ou_moments(-2.0, 0.0, 0.0, 3.0, 0.7);
    CHECK(decay.mean == doctest::Approx(3.0 * std::exp(-1.4)));

    // moment ODEs m1' = (a + b) m1, m2' = 2a m2 + 2b m1^2 + s2, integrated independently
    using state = std::vector<double>;
    const double a = -0.5, b = 0.8, s2 = 0.5;
    state y{1.0, 1.0};
    boost::numeric::odeint::integrate_adaptive(
        boost::numeric::odeint::make_controlled<boost::numeric::odeint::runge_kutta_dopri5<state>>(1e-12, 1e-12),
        [&](const state& m, state& dm, double) {
            dm[0] = (a + b) * m[0];
            dm[1] = 2 * a * m[1] + 2 * b * m[0] * m[0] + s2;
        },
        y, 0.0, 1.0, 1e-3);
    CHECK(one.mean == doctest::Approx(y[0]).epsilon(1e-9));
    CHECK(one.second == doctest::Approx(y[1]).epsilon(1e-9));
    CHECK_THROWS_AS(ou_moments(0.0, 1.0, 1.0, 1.0, 1.0), ValidationError);
}

TEST_CASE("polynomial drift moment ODEs") {
    const auto z = polydrift_moments(2.0, 1.0, 0.0);
    CHECK(z.mean == 1.0);
    CHECK(z.second == 1.0);

    // dX = (2X + E X - X E X^2) dt + X dW gives m1' = 3 m1 - m1 m2, m2' = 5 m2 + 2 m1^2 - 2 m2^2
    using state = std::vector<double>;
    state y{1.0, 1.0};
    boost::numeric::odeint::integrate_adaptive(
        boost::numeric::odeint::make_controlled<boost::numeric::odeint::runge_kutta_dopri5<state>>(1e-13, 1e-13),
        [](const state& m, state& dm, double) {
            dm[0] = 3 * m[0] - m[0] * m[1];
            dm[1] = 5 * m[1] + 2 * m[0] * m[0] - 2 * m[1] * m[1];
        },
        y, 0.0, 1.0, 1e-3);
    const auto r = polydrift_moments(2.0, 1.0, 1.0);
    CHECK(r.mean == doctest::Approx(y[0]).epsilon(1e-10));
    CHECK(r.second == doctest::Approx(y[1]).epsilon(1e-10));
    CHECK_THROWS_AS(polydrift_moments(2.0, 1.0, -1.0), ValidationError);
}

TEST_CASE("Burgers exact law") {
    const double s2 = 0.2;
    double prev = -1.0;
    for (int k = 0; k <= 10000; ++k) {
        const double v = burgers_exact_cdf(s2, 1.0, -3.0 + 7.0 * k / 10000.0);
        CHECK(v >= prev);
        CHECK((v >= 0.0 && v <= 1.0));
        prev = v;
    }
    CHECK(burgers_exact_cdf(s2, 1.0, -50.0) < 1e-12);
    CHECK(burgers_exact_cdf(s2, 1.0, 50.0) > 1.0 - 1e-12);
    CHECK(burgers_exact_cdf(s2, 1.0, -1e4) == 0.0);
    CHECK(burgers_exact_cdf(s2, 1.0, 1e4) == 1.0);

    // E[X] = int_0^inf (1 - F) - int_-inf^0 F, equal to t / 2
    double mean = 0.0;
    const double h = 1e-3;
    for (double x = -10.0 + h / 2; x < 10.0; x += h) {
        const double f = burgers_exact_cdf(s2, 1.0, x);
        mean += x >= 0.0 ? (1.0 - f) * h : -f * h;
    }
    CHECK(mean == doctest::Approx(0.5).epsilon(1e-6));
    const double m2 = burgers_exact_second_moment(s2, 1.0);
    CHECK(m2 > 0.25);
    CHECK(builtin("burgers").reference.mean_at(1.0) == 0.5);
    CHECK_THROWS_AS(burgers_exact_cdf(s2, 0.0, 0.0), ValidationError);
}

TEST_CASE("serial and parallel kernels agree bit for bit") {
    std::mt19937_64 rng(77);
    const auto q = brute::random_measure(rng, 700, -2.0, 2.0, true);
    for (const auto* name : {"burgers", "ou_meanfield", "plane_rotator"}) {
        const auto p = builtin(name);
        std::vector<double> a1(q.size()), b1(q.size()), a2(q.size()), b2(q.size());
        const auto e1 = kernels::kernel_sums(p.model, q, q.points(), a1, b1, Exec::Serial);
        const auto e2 = kernels::kernel_sums(p.model, q, q.points(), a2, b2, Exec::Parallel);
        CHECK(e1 == e2);
        CHECK(a1 == a2);
        CHECK(b1 == b2);
        kernels::mean_field_coefficients(p.model, q, q.points(), a2, b2, Exec::Parallel);
        for (std::size_t i = 0; i < q.size(); ++i) {
            CHECK(a2[i] == doctest::Approx(a1[i]).epsilon(1e-11).scale(1.0));
            CHECK(b2[i] == doctest::Approx(b1[i]).epsilon(1e-11).scale(1.0));
        }
    }
    std::vector<double> small(2);
    CHECK_THROWS_AS(kernels::kernel_sums(builtin("gbm").model, q, q.points(), small, small, Exec::Serial),
                    ValidationError);
}
