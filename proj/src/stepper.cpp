#include "mfgq/stepper.hpp"

#include "mfgq/errors.hpp"
#include "mfgq/gauss.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

namespace mfgq {

std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::GQ1: return "gq1";
        case Scheme::GQ1e: return "gq1e";
        case Scheme::GQ2: return "gq2";
    }
    return "?";
}

Scheme parse_scheme(std::string_view text) {
    if (text == "gq1") return Scheme::GQ1;
    if (text == "gq1e") return Scheme::GQ1e;
    if (text == "gq2") return Scheme::GQ2;
    throw ValidationError("unknown scheme: " + std::string(text));
}

Selection Selection::parse(std::string_view text) {
    if (text == "perstep") return {SelectionMode::PerStep, 0};
    if (text == "meanfield") return {SelectionMode::MeanField, 0};
    if (text == "smooth") return {SelectionMode::Smooth, 0};
    if (text.starts_with("fixed:")) {
        const std::string digits(text.substr(6));
        std::size_t used = 0;
        long long m = 0;
        try {
            m = std::stoll(digits, &used);
        } catch (const std::logic_error&) {
            used = 0;
        }
        if (used != digits.size() || digits.empty() || m < 1)
            throw ValidationError("fixed selection needs a positive integer: " + std::string(text));
        return fixed(static_cast<std::size_t>(m));
    }
    throw ValidationError("unknown selection mode: " + std::string(text));
}

std::string Selection::to_string() const {
    switch (mode) {
        case SelectionMode::PerStep: return "perstep";
        case SelectionMode::MeanField: return "meanfield";
        case SelectionMode::Smooth: return "smooth";
        case SelectionMode::Fixed: return "fixed:" + std::to_string(fixed_points);
    }
    return "?";
}

void StepperConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be positive");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ValidationError("horizon must be positive");
    const double ratio = horizon / dt;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
        throw ValidationError("horizon / dt must be a positive integer");
    if (compression_period < 1) throw ValidationError("compression period must be >= 1");
    if (order != 1 && order != 2) throw ValidationError("order must be 1 or 2");
    if (selection.mode == SelectionMode::Fixed && selection.fixed_points < 1)
        throw ValidationError("fixed selection needs at least one point");
    if (radius_override && !(*radius_override > 0.0)) throw ValidationError("radius must be positive");
    if (lambda && !(*lambda > 0.0)) throw ValidationError("lambda must be positive");
    if (circle_subintervals < 1) throw ValidationError("circle needs at least one sub-interval");
}

std::size_t StepperConfig::steps() const {
    validate();
    return static_cast<std::size_t>(std::round(horizon / dt));
}

void write_diagnostics_csv(std::ostream& os, const std::vector<StepDiagnostics>& diags) {
    os << "n,t,m_n,R,points_out,tail_mass,kernel_evals\n";
    char buf[256];
    for (const auto& d : diags) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%zu,%.17g,%zu,%.17g,%llu\n", d.n, d.t, d.m, d.radius,
                      d.points_out, d.tail_mass, static_cast<unsigned long long>(d.kernel_evals));
        os << buf;
    }
}

double clamped_log_dt(double dt) {
    return std::max(std::abs(std::log(dt)), std::numbers::ln2);
}

double support_radius(double dt, double lambda) {
    return std::sqrt(4.0 / lambda * clamped_log_dt(dt));
}

double selection_threshold(SelectionMode mode, std::size_t m, double dt, double t_next, double lambda, int p) {
    const double log_dt = clamped_log_dt(dt);
    const double md = static_cast<double>(m);
    const double spread = (2.0 * md - 1.0) / 2.0 * std::log(std::abs(16.0 / lambda * log_dt));
    switch (mode) {
        case SelectionMode::PerStep:
            return (p + 0.5) * log_dt + spread + (md - 2.0) * std::abs(std::log1p(-t_next));
        case SelectionMode::MeanField:
            return (p + md - 1.5) * log_dt + spread;
        case SelectionMode::Smooth:
            return (p + 0.5) * log_dt + spread;
        case SelectionMode::Fixed:
            break;
    }
    return 0.0;
}

std::size_t select_m(const Selection& selection, double dt, double t_next, double lambda, int p,
                     std::size_t m_floor) {
    if (selection.mode == SelectionMode::Fixed) {
        if (selection.fixed_points < 1) throw ValidationError("fixed selection needs at least one point");
        return selection.fixed_points;
    }
    if (!(dt > 0.0)) throw ValidationError("select_m needs dt > 0");
    if (!(lambda > 0.0)) throw ValidationError("select_m needs lambda > 0");
    if (p != 1 && p != 2) throw ValidationError("select_m needs p in {1, 2}");
    if (selection.mode == SelectionMode::PerStep && !(t_next >= 0.0 && t_next < 1.0))
        throw ValidationError("per-step selection needs 0 <= t < 1");

    constexpr std::size_t kCap = 1'000'000;
    for (std::size_t m = std::max<std::size_t>(1, m_floor); m <= kCap; ++m) {
        const double lhs = std::lgamma(2.0 * static_cast<double>(m) + 1.0);
        if (lhs >= selection_threshold(selection.mode, m, dt, t_next, lambda, p)) return m;
    }
    throw NoSolutionError("no point count below 1e6 satisfies the selection inequality");
}

double perstep_point_bound(double dt, double t, double lambda) {
    const double log_dt = clamped_log_dt(dt);
    const double e2 = std::exp(2.0);
    return 1.0 + std::max(0.75 * log_dt, e2 / 2.0 * std::sqrt(16.0 * log_dt / (lambda * (1.0 - t))));
}

DiscreteMeasure em_branch_step(const DiscreteMeasure& q, const MeanFieldModel& model, double dt, Exec exec,
                               std::uint64_t* kernel_evals) {
    if (q.is_signed()) throw SignedMeasureError();
    const auto x = q.points();
    const auto w = q.weights();
    const std::size_t n = x.size();

    std::vector<double> drift(n), diffusion(n);
    const auto evals = kernels::mean_field_coefficients(model, q, x, drift, diffusion, exec);
    if (kernel_evals) *kernel_evals += evals;

    const double sq = std::sqrt(dt);
    std::vector<double> px(2 * n), pw(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        const double centre = x[i] + drift[i] * dt;
        const double spread = diffusion[i] * sq;
        px[2 * i] = centre - spread;
        px[2 * i + 1] = centre + spread;
        pw[2 * i] = 0.5 * w[i];
        pw[2 * i + 1] = 0.5 * w[i];
    }
    return DiscreteMeasure::from_atoms(std::move(px), std::move(pw));
}

DiscreteMeasure gq2_step(const DiscreteMeasure& q, const MeanFieldModel& model, double dt, Exec exec,
                         std::uint64_t* kernel_evals) {
    if (!model.factored) throw MissingFactoredFormError();
    if (q.is_signed()) throw SignedMeasureError();
    const FactoredForm& f = *model.factored;
    const auto y = q.points();
    const auto w = q.weights();
    const std::size_t n = y.size();

    const MomentVector m = moments(f, q);

    // Time derivative of the moments: Q(r' a + r'' b^2 / 2), frozen at Q_n.
    MomentVector moment_rate{};
    if (f.dim > 0) {
        MomentVector r{}, dr{}, d2r{};
        for (std::size_t j = 0; j < n; ++j) {
            f.moment_map(y[j], r, dr, d2r);
            const double a = f.drift(y[j], m);
            const double b = f.diffusion(y[j], m);
            for (std::size_t i = 0; i < f.dim; ++i) moment_rate[i] += w[j] * (dr[i] * a + 0.5 * d2r[i] * b * b);
        }
    }

    const double sq = std::sqrt(dt);
    constexpr double kRoot3 = 1.7320508075688772;
    const double increments[3] = {-kRoot3 * sq, 0.0, kRoot3 * sq};
    const double fractions[3] = {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0};

    std::vector<double> px(3 * n), pw(3 * n);
    auto child = [&](std::size_t j) {
        const double x = y[j];
        const CoefficientPartials A = drift_partials(f, x, m);
        const CoefficientPartials B = diffusion_partials(f, x, m);
        const double a = A.value, b = B.value;
        double grad_a = A.dx * a, grad_b = B.dx * a;
        for (std::size_t i = 0; i < f.dim; ++i) {
            grad_a += A.dm[i] * moment_rate[i];
            grad_b += B.dm[i] * moment_rate[i];
        }
        const double c_w2 = 0.5 * B.dx * b;
        const double c_wdt = 0.5 * (A.dx * b + grad_b + 0.5 * B.dxx * b * b);
        const double c_dt2 = 0.5 * (grad_a + 0.5 * A.dxx * b * b);
        for (int k = 0; k < 3; ++k) {
            const double dw = increments[k];
            px[3 * j + k] = x + a * dt + b * dw + c_w2 * (dw * dw - dt) + c_wdt * dw * dt + c_dt2 * dt * dt;
            pw[3 * j + k] = fractions[k] * w[j];
        }
    };
    const auto count = static_cast<std::ptrdiff_t>(n);
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static) if (count > 256)
        for (std::ptrdiff_t j = 0; j < count; ++j) child(static_cast<std::size_t>(j));
    } else {
        for (std::ptrdiff_t j = 0; j < count; ++j) child(static_cast<std::size_t>(j));
    }
    if (kernel_evals) *kernel_evals += 3ull * n + 2ull * n;
    return DiscreteMeasure::from_atoms(std::move(px), std::move(pw));
}

ReducedMeasure support_reduce(const DiscreteMeasure& q, double radius) {
    if (!(radius > 0.0)) throw ValidationError("support radius must be positive");
    if (q.is_signed()) throw SignedMeasureError();
    const auto x = q.points();
    const auto w = q.weights();
    double lower = 0.0, upper = 0.0;
    std::vector<double> px, pw;
    px.reserve(x.size() + 2);
    pw.reserve(x.size() + 2);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] <= -radius) lower += w[i];
        else if (x[i] >= radius) upper += w[i];
        else {
            px.push_back(x[i]);
            pw.push_back(w[i]);
        }
    }
    if (lower > 0.0) {
        px.insert(px.begin(), -radius);
        pw.insert(pw.begin(), lower);
    }
    if (upper > 0.0) {
        px.push_back(radius);
        pw.push_back(upper);
    }
    return {DiscreteMeasure::from_atoms(std::move(px), std::move(pw), 0.0), lower + upper};
}

namespace {

struct Piece {
    std::vector<double> points;
    std::vector<double> weights;
};

Piece compress_piece(std::vector<double> px, std::vector<double> pw, std::size_t m_target,
                     std::uint64_t& work, double& m_cubed, bool& compressed) {
    if (px.size() <= m_target) return {std::move(px), std::move(pw)};
    const std::size_t n = px.size();
    const auto rule = gauss_compress(DiscreteMeasure::from_atoms(std::move(px), std::move(pw), 0.0), m_target);
    const auto m = static_cast<std::uint64_t>(m_target);
    work += n * m * m + m * m;
    m_cubed += static_cast<double>(m * m * m);
    compressed = true;
    return {std::vector<double>(rule.points().begin(), rule.points().end()),
            std::vector<double>(rule.weights().begin(), rule.weights().end())};
}

CompressedMeasure compress_line(const DiscreteMeasure& q, std::size_t m_target, double radius) {
    CompressedMeasure out;
    const auto reduced = support_reduce(q, radius);
    out.tail_mass = reduced.tail_mass;

    const auto x = reduced.measure.points();
    const auto w = reduced.measure.weights();
    std::vector<double> ix, iw, bx, bw;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::abs(x[i]) < radius) {
            ix.push_back(x[i]);
            iw.push_back(w[i]);
        } else {
            bx.push_back(x[i]);
            bw.push_back(w[i]);
        }
    }
    Piece interior = ix.empty() ? Piece{}
                                : compress_piece(std::move(ix), std::move(iw), m_target, out.gauss_work,
                                                 out.m_cubed, out.compressed);
    interior.points.insert(interior.points.end(), bx.begin(), bx.end());
    interior.weights.insert(interior.weights.end(), bw.begin(), bw.end());
    out.measure = DiscreteMeasure::from_atoms(std::move(interior.points), std::move(interior.weights));
    return out;
}

CompressedMeasure compress_circle(const DiscreteMeasure& q, std::size_t m_target, double period,
                                  std::size_t arcs, Exec exec) {
    constexpr double kNegligibleArc = 1e-15;
    CompressedMeasure out;
    const double width = period / static_cast<double>(arcs);

    std::vector<Piece> pieces(arcs);
    const auto x = q.points();
    const auto w = q.weights();
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xi = wrap_to_period(x[i], period);
        const auto arc = std::min(arcs - 1, static_cast<std::size_t>(xi / width));
        pieces[arc].points.push_back(xi);
        pieces[arc].weights.push_back(w[i]);
    }

    std::vector<std::uint64_t> work(arcs, 0);
    std::vector<double> cubes(arcs, 0.0);
    std::vector<char> touched(arcs, 0);
    double dropped = 0.0;
    for (auto& p : pieces) {
        double mass = 0.0;
        for (double v : p.weights) mass += v;
        if (!p.points.empty() && mass < kNegligibleArc) {
            dropped += mass;
            p = Piece{};
        }
    }

    auto run_arc = [&](std::size_t a) {
        if (pieces[a].points.empty()) return;
        bool done = false;
        pieces[a] = compress_piece(std::move(pieces[a].points), std::move(pieces[a].weights), m_target, work[a],
                                   cubes[a], done);
        touched[a] = done ? 1 : 0;
    };
    const auto count = static_cast<std::ptrdiff_t>(arcs);
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t a = 0; a < count; ++a) run_arc(static_cast<std::size_t>(a));
    } else {
        for (std::ptrdiff_t a = 0; a < count; ++a) run_arc(static_cast<std::size_t>(a));
    }

    std::vector<double> px, pw;
    for (std::size_t a = 0; a < arcs; ++a) {
        px.insert(px.end(), pieces[a].points.begin(), pieces[a].points.end());
        pw.insert(pw.end(), pieces[a].weights.begin(), pieces[a].weights.end());
        out.gauss_work += work[a];
        out.m_cubed += cubes[a];
        out.compressed = out.compressed || touched[a];
    }
    if (dropped > 0.0) {
        double kept = 0.0;
        for (double v : pw) kept += v;
        const double scale = (kept + dropped) / kept;
        for (double& v : pw) v *= scale;
    }
    out.tail_mass = dropped;
    out.measure = DiscreteMeasure::from_atoms(std::move(px), std::move(pw));
    return out;
}

DiscreteMeasure wrap_measure(const DiscreteMeasure& q, double period) {
    std::vector<double> px(q.points().begin(), q.points().end());
    std::vector<double> pw(q.weights().begin(), q.weights().end());
    for (double& v : px) v = wrap_to_period(v, period);
    return DiscreteMeasure::from_atoms(std::move(px), std::move(pw));
}

}  // namespace

CompressedMeasure compress_step(const DiscreteMeasure& q, std::size_t m_target, double radius,
                                const Domain& domain, std::size_t circle_subintervals, Exec exec) {
    if (q.is_signed()) throw SignedMeasureError();
    if (m_target < 1) throw ValidationError("compression target must be at least 1");
    if (domain.is_circle()) {
        if (circle_subintervals < 1) throw ValidationError("circle needs at least one sub-interval");
        return compress_circle(q, m_target, domain.period, circle_subintervals, exec);
    }
    return compress_line(q, m_target, radius);
}

PropagationResult propagate(const MeanFieldModel& model, const DiscreteMeasure& q0, const StepperConfig& cfg,
                            Scheme scheme, const StepObserver& observer) {
    if (scheme == Scheme::GQ1e) throw ValidationError("use propagate_extrapolated for gq1e");
    if (scheme == Scheme::GQ2 && !model.factored) throw MissingFactoredFormError();
    if (q0.is_signed() || q0.empty()) throw ValidationError("initial measure must be non-empty and unsigned");
    const std::size_t steps = cfg.steps();
    const double lambda = cfg.lambda.value_or(model.lambda_hint);
    if (!(lambda > 0.0)) throw ValidationError("lambda must be positive");

    const bool circle = model.domain.is_circle();
    const double radius = cfg.radius_override.value_or(support_radius(cfg.dt, lambda));

    // Arcs on the circle use the smooth rule unless a fixed count is requested.
    Selection selection = cfg.selection;
    if (circle && selection.mode != SelectionMode::Fixed) selection.mode = SelectionMode::Smooth;
    std::size_t m_floor = 1;
    if (!circle && (selection.mode == SelectionMode::MeanField || selection.mode == SelectionMode::Smooth))
        m_floor = q0.size();

    PropagationResult result;
    DiscreteMeasure q = circle ? wrap_measure(q0, model.domain.period) : q0;
    result.diagnostics.reserve(steps);
    std::size_t m = std::max<std::size_t>(1, m_floor);

    for (std::size_t n = 0; n < steps; ++n) {
        StepDiagnostics diag;
        diag.n = n + 1;
        diag.t = cfg.dt * static_cast<double>(n + 1);
        diag.radius = circle ? 0.0 : radius;

        q = scheme == Scheme::GQ1 ? em_branch_step(q, model, cfg.dt, cfg.exec, &diag.kernel_evals)
                                  : gq2_step(q, model, cfg.dt, cfg.exec, &diag.kernel_evals);
        if (circle) q = wrap_measure(q, model.domain.period);

        const bool final_step = n + 1 == steps;
        if (!final_step) {
            m = select_m(selection, cfg.dt, diag.t / cfg.horizon, lambda, cfg.order, m_floor);
            if ((n + 1) % cfg.compression_period == 0) {
                auto c = compress_step(q, m, radius, model.domain, cfg.circle_subintervals, cfg.exec);
                q = std::move(c.measure);
                diag.tail_mass = c.tail_mass;
                diag.gauss_work = c.gauss_work;
                diag.compressed = c.compressed;
                result.sum_m_cubed += c.m_cubed;
            }
        }
        diag.m = m;
        diag.points_out = q.size();
        result.kernel_evals += diag.kernel_evals;
        result.gauss_work += diag.gauss_work;
        result.diagnostics.push_back(diag);
        if (observer) observer(n + 1, diag.t, q);
    }
    result.measure = std::move(q);
    return result;
}

ExtrapolatedResult propagate_extrapolated(const MeanFieldModel& model, const DiscreteMeasure& q0,
                                          const StepperConfig& cfg, const StepObserver& observer) {
    StepperConfig half = cfg;
    half.dt = cfg.dt / 2.0;
    ExtrapolatedResult out;
    out.coarse = propagate(model, q0, cfg, Scheme::GQ1, observer);
    out.fine = propagate(model, q0, half, Scheme::GQ1, observer);

    std::vector<double> px, pw;
    px.reserve(out.coarse.measure.size() + out.fine.measure.size());
    pw.reserve(px.capacity());
    for (std::size_t i = 0; i < out.fine.measure.size(); ++i) {
        px.push_back(out.fine.measure.points()[i]);
        pw.push_back(2.0 * out.fine.measure.weights()[i]);
    }
    for (std::size_t i = 0; i < out.coarse.measure.size(); ++i) {
        px.push_back(out.coarse.measure.points()[i]);
        pw.push_back(-out.coarse.measure.weights()[i]);
    }
    out.measure = DiscreteMeasure::from_atoms(std::move(px), std::move(pw));
    return out;
}

SchemeRun run_scheme(const MeanFieldModel& model, const DiscreteMeasure& q0, const StepperConfig& cfg,
                     Scheme scheme) {
    SchemeRun out;
    if (scheme == Scheme::GQ1e) {
        auto r = propagate_extrapolated(model, q0, cfg);
        out.measure = std::move(r.measure);
        out.work = r.work();
        out.sum_m_cubed = r.coarse.sum_m_cubed + r.fine.sum_m_cubed;
        out.diagnostics = std::move(r.coarse.diagnostics);
        return out;
    }
    auto r = propagate(model, q0, cfg, scheme);
    out.measure = std::move(r.measure);
    out.work = r.work();
    out.sum_m_cubed = r.sum_m_cubed;
    out.diagnostics = std::move(r.diagnostics);
    return out;
}

}  // namespace mfgq
