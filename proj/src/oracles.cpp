#include "mfgq/oracles.hpp"

#include "mfgq/errors.hpp"

#include <cmath>

namespace mfgq {

Moments ou_moments(double alpha, double beta, double sigma2, double x, double t) {
    if (alpha == 0.0) throw ValidationError("ou_moments needs alpha != 0");
    const double g = std::exp((alpha + beta) * t);
    return {x * g, x * x * g * g + sigma2 / (2.0 * alpha) * std::expm1(2.0 * alpha * t)};
}

Moments polydrift_rhs(double alpha, Moments m) {
    return {(alpha + 1.0) * m.mean - m.mean * m.second,
            (2.0 * alpha + 1.0) * m.second + 2.0 * m.mean * m.mean - 2.0 * m.second * m.second};
}

Moments polydrift_moments(double alpha, double x, double t, double step) {
    if (t < 0.0) throw ValidationError("polydrift_moments needs t >= 0");
    if (!(step > 0.0)) throw ValidationError("RK4 step must be positive");
    Moments y{x, x * x};
    if (t == 0.0) return y;
    const auto n = static_cast<std::size_t>(std::ceil(t / step - 1e-9));
    const double h = t / static_cast<double>(n);
    auto axpy = [](Moments a, double s, Moments b) { return Moments{a.mean + s * b.mean, a.second + s * b.second}; };
    for (std::size_t i = 0; i < n; ++i) {
        const Moments k1 = polydrift_rhs(alpha, y);
        const Moments k2 = polydrift_rhs(alpha, axpy(y, 0.5 * h, k1));
        const Moments k3 = polydrift_rhs(alpha, axpy(y, 0.5 * h, k2));
        const Moments k4 = polydrift_rhs(alpha, axpy(y, h, k3));
        y.mean += h / 6.0 * (k1.mean + 2.0 * k2.mean + 2.0 * k3.mean + k4.mean);
        y.second += h / 6.0 * (k1.second + 2.0 * k2.second + 2.0 * k3.second + k4.second);
    }
    return y;
}

double burgers_exact_cdf(double sigma2, double t, double x) {
    if (!(t > 0.0)) throw ValidationError("burgers_exact_cdf needs t > 0");
    const double r = std::sqrt(2.0 * sigma2 * t);
    const double left = std::erfc(-x / r);
    const double tail = 2.0 - std::erfc((t - x) / r);
    if (tail == 0.0) return 1.0;
    // Work in logs: the exponential overflows long before the ratio saturates.
    const double log_ratio = (t - 2.0 * x) / (2.0 * sigma2) + std::log(tail) - std::log(left);
    if (left == 0.0 || log_ratio > 700.0) return 0.0;
    return 1.0 / (1.0 + std::exp(log_ratio));
}

double burgers_exact_second_moment(double sigma2, double t) {
    // E[X^2] = int_0^inf 2x (1 - u) dx + int_-inf^0 2|x| u dx, Simpson on a wide window.
    const double spread = std::sqrt(2.0 * sigma2 * t);
    const double lo = -12.0 * spread - 1.0;
    const double hi = t + 12.0 * spread + 1.0;
    const std::size_t n = 200000;
    const double h = (hi - lo) / static_cast<double>(n);
    auto integrand = [&](double x) {
        const double u = burgers_exact_cdf(sigma2, t, x);
        return x >= 0.0 ? 2.0 * x * (1.0 - u) : -2.0 * x * u;
    };
    double acc = integrand(lo) + integrand(hi);
    for (std::size_t i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * integrand(lo + h * static_cast<double>(i));
    return acc * h / 3.0;
}

}  // namespace mfgq
