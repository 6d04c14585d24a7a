#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace mfgq {

/// Default relative merge tolerance used when a measure is normalized.
inline constexpr double kDefaultMergeTol = 1e-14;

/// Weighted point set on the real line, stored with strictly ascending points.
///
/// Construction always normalizes: atoms are sorted, atoms closer than
/// tol * max(1, span) are merged with their weights summed, and atoms whose
/// merged weight is exactly zero are dropped. Weights may be negative, in
/// which case the measure is flagged as signed.
class DiscreteMeasure {
public:
    DiscreteMeasure() = default;

    static DiscreteMeasure from_atoms(std::vector<double> points, std::vector<double> weights,
                                      double merge_tol = kDefaultMergeTol);
    static DiscreteMeasure point_mass(double x, double weight = 1.0);

    std::span<const double> points() const { return points_; }
    std::span<const double> weights() const { return weights_; }
    std::size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }
    bool is_signed() const { return signed_; }

    /// Left-to-right sum of the weights in ascending point order.
    double total_mass() const;
    /// max point - min point, 0 for empty or single-atom measures.
    double width() const;

    bool operator==(const DiscreteMeasure&) const = default;

private:
    std::vector<double> points_;
    std::vector<double> weights_;
    bool signed_ = false;
};

/// A real test function with a polynomial growth exponent (metadata only).
struct TestFunction {
    std::function<double(double)> evaluator;
    unsigned growth_exponent = 0;

    double operator()(double x) const { return evaluator(x); }
};

double expectation(const DiscreteMeasure& m, const TestFunction& f);

template <typename F>
    requires std::is_invocable_r_v<double, F, double>
double expectation(const DiscreteMeasure& m, F&& f) {
    double acc = 0.0;
    const auto x = m.points();
    const auto w = m.weights();
    for (std::size_t i = 0; i < x.size(); ++i) acc += w[i] * f(x[i]);
    return acc;
}

/// Merge atoms closer than tol * max(1, span). Total mass is preserved exactly.
DiscreteMeasure merge_close_points(const DiscreteMeasure& m, double tol);

/// Right-continuous distribution function: sum of weights at points <= x.
double cdf(const DiscreteMeasure& m, double x);

/// Trapezoid approximation of the L1 distance between cdf(m, .) and a
/// reference distribution function over [lo, hi] using n_nodes equispaced nodes.
double cdf_l1_distance(const DiscreteMeasure& m, const std::function<double(double)>& reference_cdf,
                       double lo, double hi, std::size_t n_nodes);

/// CSV with header `x,w`, 17 significant digits.
void write_csv(std::ostream& os, const DiscreteMeasure& m);
DiscreteMeasure read_csv(std::istream& is);

}  // namespace mfgq
