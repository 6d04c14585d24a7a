#pragma once

#include "mfgq/kernels.hpp"
#include "mfgq/models.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace mfgq {

struct MlmcOptions {
    std::uint64_t seed = 20240601;
    double horizon = 1.0;
    std::size_t initial_samples = 1000;  ///< N0 on each new level
    std::size_t min_levels = 2;
    std::size_t max_levels = 20;
    std::size_t replicates = 10;  ///< independent estimates per tolerance
    std::size_t chunk = 4096;     ///< samples per RNG stream
    Exec exec = Exec::Parallel;
};

struct MlmcLevel {
    std::size_t samples = 0;
    double mean = 0.0;      ///< E[P_l - P_{l-1}]
    double variance = 0.0;  ///< V[P_l - P_{l-1}]
};

struct MlmcRun {
    double estimate = 0.0;
    double std_error = 0.0;  ///< sqrt(sum V_l / N_l)
    std::uint64_t work = 0;  ///< sum_l N_l 2^l fine steps
    std::vector<MlmcLevel> levels;
};

struct MlmcEstimate {
    double tolerance = 0.0;
    std::vector<MlmcRun> replicates;

    double mean_estimate() const;
    double mean_work() const;
    /// Root mean square of (estimate - exact) over the replicates.
    double rms_error(double exact) const;
};

/// Drift and diffusion of the ordinary SDE behind a law-independent model.
double sde_drift(const MeanFieldModel& model, double x);
double sde_diffusion(const MeanFieldModel& model, double x);

/// One MLMC estimate of E[phi(X(T))] to root-mean-square tolerance `tol`.
/// `stream` separates independent runs that share the master seed.
MlmcRun mlmc_run(const MeanFieldModel& model, double x0, const std::function<double(double)>& phi, double tol,
                 const MlmcOptions& options, std::uint64_t stream = 0);

/// Replicated estimates for every tolerance. Throws MeanFieldNotSupportedError
/// when the model depends on its own law.
std::vector<MlmcEstimate> mlmc_estimate(const MeanFieldModel& model, double x0,
                                        const std::function<double(double)>& phi,
                                        const std::vector<double>& tolerances, const MlmcOptions& options = {});

}  // namespace mfgq
