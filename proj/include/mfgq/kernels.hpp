#pragma once

#include "mfgq/measure.hpp"
#include "mfgq/models.hpp"

#include <cstdint>
#include <span>

namespace mfgq {

/// Serial is the reference path kept for testing; Parallel uses OpenMP when
/// the library was built with it and falls back to serial otherwise.
enum class Exec { Serial, Parallel };

/// True when the library was compiled with OpenMP.
bool parallel_available();

namespace kernels {

/// Mean-field drift and diffusion at every node of `at`, all integrals taken
/// against the frozen measure `q`. Uses the factored moments when the model
/// has them, otherwise the O(|at| * |q|) kernel sums. Returns the number of
/// coefficient evaluations performed.
std::uint64_t mean_field_coefficients(const MeanFieldModel& model, const DiscreteMeasure& q,
                                      std::span<const double> at, std::span<double> drift,
                                      std::span<double> diffusion, Exec exec);

/// Kernel-sum route only, regardless of any factored form.
std::uint64_t kernel_sums(const MeanFieldModel& model, const DiscreteMeasure& q, std::span<const double> at,
                          std::span<double> drift, std::span<double> diffusion, Exec exec);

}  // namespace kernels
}  // namespace mfgq
