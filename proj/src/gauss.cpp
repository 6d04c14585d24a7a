#include "mfgq/gauss.hpp"

#include "mfgq/errors.hpp"

#include <algorithm>
#include <cmath>

namespace mfgq {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

}  // namespace

RecurrenceCoefficients tridiagonalize(const DiscreteMeasure& m, std::size_t max_order) {
    if (m.is_signed()) throw SignedMeasureError();
    if (m.empty()) throw EmptyMeasureError();
    if (max_order == 0) throw ValidationError("max_order must be at least 1");

    const auto y = m.points();
    const auto v = m.weights();
    const std::size_t n = y.size();
    const double mass = m.total_mass();

    // Shift to the weighted mean so the Krylov vectors see a centred spectrum.
    double centre = 0.0;
    for (std::size_t i = 0; i < n; ++i) centre += v[i] * y[i];
    centre /= mass;
    std::vector<double> shifted(n);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        shifted[i] = y[i] - centre;
        scale = std::max(scale, std::abs(shifted[i]));
    }
    const double cutoff = kBetaCutoff * scale * scale;

    const std::size_t order = std::min(max_order, n);
    std::vector<double> basis;  // row j holds Lanczos vector j
    basis.reserve(order * n);
    for (std::size_t i = 0; i < n; ++i) basis.push_back(std::sqrt(v[i] / mass));

    RecurrenceCoefficients rc;
    rc.mass = mass;
    std::vector<double> u(n);
    for (std::size_t j = 0;; ++j) {
        std::span<const double> qj(basis.data() + j * n, n);
        for (std::size_t i = 0; i < n; ++i) u[i] = shifted[i] * qj[i];
        const double a = dot(qj, u);
        for (std::size_t i = 0; i < n; ++i) u[i] -= a * qj[i];
        if (j > 0) {
            const double off = std::sqrt(rc.beta.back());
            std::span<const double> qprev(basis.data() + (j - 1) * n, n);
            for (std::size_t i = 0; i < n; ++i) u[i] -= off * qprev[i];
        }
        // Two passes of classical Gram-Schmidt against every stored vector.
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t k = 0; k <= j; ++k) {
                std::span<const double> qk(basis.data() + k * n, n);
                const double c = dot(qk, u);
                for (std::size_t i = 0; i < n; ++i) u[i] -= c * qk[i];
            }
        }
        double b = dot(u, u);
        rc.alpha.push_back(a + centre);

        const bool exhausted = j + 1 == n || b < cutoff;
        if (exhausted) b = 0.0;
        rc.beta.push_back(b);
        if (exhausted || j + 1 == order) break;

        const double norm = std::sqrt(b);
        for (std::size_t i = 0; i < n; ++i) basis.push_back(u[i] / norm);
    }
    return rc;
}

DiscreteMeasure golub_welsch(const RecurrenceCoefficients& rc, std::size_t m) {
    if (m == 0 || m > rc.order()) throw OrderTooLargeError(m, rc.order());

    std::vector<double> off(m - 1);
    for (std::size_t j = 0; j + 1 < m; ++j) off[j] = std::sqrt(std::max(rc.beta[j], 0.0));
    const auto spectrum = tridiag_eigen(std::span<const double>(rc.alpha.data(), m), off);

    std::vector<double> points = spectrum.eigenvalues;
    std::vector<double> weights(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double c = spectrum.first_components[i];
        weights[i] = rc.mass * c * c;
    }
    // Eigenvalues closer than 1e-13 * span collapse into one atom.
    constexpr double kTieTol = 1e-13;
    const double span = points.back() - points.front();
    double tie = kTieTol * span;
    if (span == 0.0) tie = 0.0;
    std::vector<double> px, pw;
    px.reserve(m);
    pw.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (!px.empty() && points[i] - px.back() <= tie) {
            pw.back() += weights[i];
            continue;
        }
        px.push_back(points[i]);
        pw.push_back(weights[i]);
    }
    return DiscreteMeasure::from_atoms(std::move(px), std::move(pw), 0.0);
}

DiscreteMeasure gauss_compress(const DiscreteMeasure& m, std::size_t target_points) {
    if (m.is_signed()) throw SignedMeasureError();
    if (m.empty()) throw EmptyMeasureError();
    if (target_points == 0) throw ValidationError("target_points must be at least 1");
    if (m.size() <= target_points) return m;
    const auto rc = tridiagonalize(m, target_points);
    return golub_welsch(rc, std::min(target_points, rc.order()));
}

DiscreteMeasure gauss_hermite(std::size_t n, double mean, double stddev) {
    if (n == 0) throw ValidationError("Gauss-Hermite rule needs n >= 1");
    if (!(stddev > 0.0)) throw ValidationError("Gauss-Hermite rule needs stddev > 0");
    RecurrenceCoefficients rc;
    rc.mass = 1.0;
    rc.alpha.assign(n, mean);
    rc.beta.resize(n);
    const double var = stddev * stddev;
    for (std::size_t j = 0; j < n; ++j) rc.beta[j] = static_cast<double>(j + 1) * var;
    return golub_welsch(rc, n);
}

}  // namespace mfgq
