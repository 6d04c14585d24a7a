#include "mfgq/measure.hpp"

#include "mfgq/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

namespace mfgq {

namespace {

struct Atoms {
    std::vector<double> points;
    std::vector<double> weights;
};

// Input must already be sorted by point.
Atoms merge_sorted(std::span<const double> x, std::span<const double> w, double tol) {
    Atoms out;
    if (x.empty()) return out;
    const double span = x.back() - x.front();
    const double gap = tol * std::max(1.0, span);

    out.points.reserve(x.size());
    out.weights.reserve(x.size());

    std::size_t i = 0;
    while (i < x.size()) {
        std::size_t j = i + 1;
        double mass = w[i];
        bool all_positive = w[i] > 0.0;
        while (j < x.size() && x[j] - x[j - 1] < gap) {
            mass += w[j];
            all_positive = all_positive && w[j] > 0.0;
            ++j;
        }
        double position = x[i];
        if (j - i > 1 && all_positive) {
            double moment = 0.0;
            for (std::size_t k = i; k < j; ++k) moment += w[k] * x[k];
            position = std::clamp(moment / mass, x[i], x[j - 1]);
        }
        if (mass != 0.0) {
            out.points.push_back(position);
            out.weights.push_back(mass);
        }
        i = j;
    }
    return out;
}

}  // namespace

DiscreteMeasure DiscreteMeasure::from_atoms(std::vector<double> points, std::vector<double> weights,
                                            double merge_tol) {
    if (points.size() != weights.size())
        throw ValidationError("points and weights differ in length");
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!std::isfinite(points[i]) || !std::isfinite(weights[i]))
            throw ValidationError("measure atoms must be finite");
    }

    const bool sorted = std::is_sorted(points.begin(), points.end());
    if (!sorted) {
        std::vector<std::size_t> order(points.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
        std::vector<double> xs(points.size()), ws(points.size());
        for (std::size_t k = 0; k < order.size(); ++k) {
            xs[k] = points[order[k]];
            ws[k] = weights[order[k]];
        }
        points = std::move(xs);
        weights = std::move(ws);
    }

    Atoms merged = merge_sorted(points, weights, merge_tol);
    DiscreteMeasure m;
    m.points_ = std::move(merged.points);
    m.weights_ = std::move(merged.weights);
    m.signed_ = std::any_of(m.weights_.begin(), m.weights_.end(), [](double v) { return v < 0.0; });
    return m;
}

DiscreteMeasure DiscreteMeasure::point_mass(double x, double weight) {
    return from_atoms({x}, {weight});
}

double DiscreteMeasure::total_mass() const {
    double acc = 0.0;
    for (double v : weights_) acc += v;
    return acc;
}

double DiscreteMeasure::width() const {
    return points_.empty() ? 0.0 : points_.back() - points_.front();
}

double expectation(const DiscreteMeasure& m, const TestFunction& f) {
    return expectation(m, f.evaluator);
}

DiscreteMeasure merge_close_points(const DiscreteMeasure& m, double tol) {
    if (tol < 0.0) throw ValidationError("merge tolerance must be non-negative");
    Atoms merged = merge_sorted(m.points(), m.weights(), tol);
    return DiscreteMeasure::from_atoms(std::move(merged.points), std::move(merged.weights), 0.0);
}

double cdf(const DiscreteMeasure& m, double x) {
    if (m.is_signed()) throw SignedMeasureError();
    const auto pts = m.points();
    const auto w = m.weights();
    const auto end = std::upper_bound(pts.begin(), pts.end(), x);
    double acc = 0.0;
    for (auto it = pts.begin(); it != end; ++it) acc += w[static_cast<std::size_t>(it - pts.begin())];
    return acc;
}

double cdf_l1_distance(const DiscreteMeasure& m, const std::function<double(double)>& reference_cdf,
                       double lo, double hi, std::size_t n_nodes) {
    if (m.is_signed()) throw SignedMeasureError();
    if (!(lo < hi)) throw ValidationError("cdf_l1_distance needs lo < hi");
    if (n_nodes < 2) throw ValidationError("cdf_l1_distance needs at least two nodes");

    // Walk the atoms once alongside the ascending node grid.
    const auto pts = m.points();
    const auto w = m.weights();
    std::size_t next = 0;
    double running = 0.0;
    const double h = (hi - lo) / static_cast<double>(n_nodes - 1);

    double acc = 0.0;
    for (std::size_t k = 0; k < n_nodes; ++k) {
        const double x = (k + 1 == n_nodes) ? hi : lo + h * static_cast<double>(k);
        while (next < pts.size() && pts[next] <= x) running += w[next++];
        const double diff = std::abs(running - reference_cdf(x));
        acc += (k == 0 || k + 1 == n_nodes) ? 0.5 * diff : diff;
    }
    return acc * h;
}

void write_csv(std::ostream& os, const DiscreteMeasure& m) {
    os << "x,w\n";
    char buf[64];
    const auto x = m.points();
    const auto w = m.weights();
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", x[i], w[i]);
        os << buf;
    }
}

DiscreteMeasure read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("x,w", 0) != 0)
        throw ValidationError("measure CSV must start with header x,w");
    std::vector<double> xs, ws;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ValidationError("malformed measure CSV row: " + line);
        try {
            xs.push_back(std::stod(line.substr(0, comma)));
            ws.push_back(std::stod(line.substr(comma + 1)));
        } catch (const std::logic_error&) {
            throw ValidationError("malformed measure CSV row: " + line);
        }
    }
    return DiscreteMeasure::from_atoms(std::move(xs), std::move(ws), 0.0);
}

}  // namespace mfgq
