#pragma once

#include "mfgq/kernels.hpp"
#include "mfgq/measure.hpp"
#include "mfgq/models.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mfgq {

enum class Scheme { GQ1, GQ1e, GQ2 };

std::string to_string(Scheme s);
Scheme parse_scheme(std::string_view text);

/// How the number of Gauss points is chosen at each compression.
enum class SelectionMode { PerStep, MeanField, Smooth, Fixed };

struct Selection {
    SelectionMode mode = SelectionMode::Smooth;
    std::size_t fixed_points = 0;  ///< used by Fixed only

    static Selection fixed(std::size_t m) { return {SelectionMode::Fixed, m}; }
    /// perstep | meanfield | smooth | fixed:M
    static Selection parse(std::string_view text);
    std::string to_string() const;
};

struct StepperConfig {
    double dt = 0.01;
    double horizon = 1.0;
    std::size_t compression_period = 1;
    Selection selection;
    int order = 1;  ///< p in the selection formulas
    std::optional<double> radius_override;
    std::optional<double> lambda;  ///< defaults to the model's hint
    std::size_t circle_subintervals = 10;
    Exec exec = Exec::Parallel;

    /// Throws ValidationError unless horizon / dt is a positive integer.
    void validate() const;
    std::size_t steps() const;
};

struct StepDiagnostics {
    std::size_t n = 0;  ///< index of the measure produced by this step
    double t = 0.0;
    std::size_t m = 1;  ///< selected Gauss point count (per arc on a circle)
    double radius = 0.0;
    std::size_t points_out = 0;
    double tail_mass = 0.0;
    std::uint64_t kernel_evals = 0;
    std::uint64_t gauss_work = 0;  ///< Lanczos + eigensolver operation count
    bool compressed = false;
};

/// CSV header `n,t,m_n,R,points_out,tail_mass,kernel_evals` plus one row per step.
void write_diagnostics_csv(std::ostream& os, const std::vector<StepDiagnostics>& diags);

/// |log dt| clamped below by log 2 so radius and selection stay finite for dt >= 1/2.
double clamped_log_dt(double dt);

/// sqrt((4 / lambda) |log dt|).
double support_radius(double dt, double lambda);

/// Right-hand side M(m, dt, t) of the selection inequality log Gamma(2m+1) >= M.
double selection_threshold(SelectionMode mode, std::size_t m, double dt, double t_next, double lambda, int p);

/// Smallest m >= max(1, m_floor) satisfying the selection inequality.
/// t_next is the time (as a fraction of the horizon) of the measure being compressed.
std::size_t select_m(const Selection& selection, double dt, double t_next, double lambda, int p,
                     std::size_t m_floor = 1);

/// Closed-form ceiling on the per-step point count:
/// 1 + max(3/4 |log dt|, e^2/2 sqrt(16 |log dt| / (lambda (1 - t)))).
double perstep_point_bound(double dt, double t, double lambda);

/// Two-point Euler-Maruyama branching with mean-field integrals frozen at q.
DiscreteMeasure em_branch_step(const DiscreteMeasure& q, const MeanFieldModel& model, double dt,
                               Exec exec = Exec::Parallel, std::uint64_t* kernel_evals = nullptr);

/// Second-order Ito-Taylor branching on the three-point Gauss-Hermite increment.
DiscreteMeasure gq2_step(const DiscreteMeasure& q, const MeanFieldModel& model, double dt,
                         Exec exec = Exec::Parallel, std::uint64_t* kernel_evals = nullptr);

struct ReducedMeasure {
    DiscreteMeasure measure;
    double tail_mass = 0.0;
};

/// Collapse the mass at |x| >= R onto atoms at -R and +R.
ReducedMeasure support_reduce(const DiscreteMeasure& q, double radius);

struct CompressedMeasure {
    DiscreteMeasure measure;
    double tail_mass = 0.0;  ///< collapsed tail (line) or dropped arc mass (circle)
    std::uint64_t gauss_work = 0;
    double m_cubed = 0.0;
    bool compressed = false;
};

/// Support reduction plus Gauss compression of the interior (line), or
/// wrap-around plus per-arc compression (circle).
CompressedMeasure compress_step(const DiscreteMeasure& q, std::size_t m_target, double radius,
                                const Domain& domain, std::size_t circle_subintervals = 10,
                                Exec exec = Exec::Parallel);

using StepObserver = std::function<void(std::size_t n, double t, const DiscreteMeasure& q)>;

struct PropagationResult {
    DiscreteMeasure measure;
    std::vector<StepDiagnostics> diagnostics;
    std::uint64_t kernel_evals = 0;
    std::uint64_t gauss_work = 0;
    double sum_m_cubed = 0.0;  ///< over the steps that compressed

    std::uint64_t work() const { return kernel_evals + gauss_work; }
};

/// Time-march q0 to the horizon with GQ1 or GQ2. Compression runs every
/// compression_period steps and never on the final step.
PropagationResult propagate(const MeanFieldModel& model, const DiscreteMeasure& q0, const StepperConfig& cfg,
                            Scheme scheme, const StepObserver& observer = {});

struct ExtrapolatedResult {
    DiscreteMeasure measure;  ///< 2 Q^{dt/2} - Q^{dt}, signed
    PropagationResult coarse;
    PropagationResult fine;

    std::uint64_t work() const { return coarse.work() + fine.work(); }
};

ExtrapolatedResult propagate_extrapolated(const MeanFieldModel& model, const DiscreteMeasure& q0,
                                          const StepperConfig& cfg, const StepObserver& observer = {});

/// Uniform entry point for all three schemes.
struct SchemeRun {
    DiscreteMeasure measure;
    std::uint64_t work = 0;
    double sum_m_cubed = 0.0;
    std::vector<StepDiagnostics> diagnostics;  ///< coarse run for GQ1e
};

SchemeRun run_scheme(const MeanFieldModel& model, const DiscreteMeasure& q0, const StepperConfig& cfg,
                     Scheme scheme);

}  // namespace mfgq
