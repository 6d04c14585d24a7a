#pragma once

#include "mfgq/measure.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace mfgq {

/// Three-term recurrence of the monic orthogonal polynomials of a measure.
///
/// The Jacobi matrix has diagonal `alpha` and off-diagonal sqrt(beta[j]);
/// beta[j] couples rows j and j+1. `beta` has the same length as `alpha`:
/// its last entry is the first coefficient that was not used, and a zero
/// there means the source measure has exactly alpha.size() atoms.
struct RecurrenceCoefficients {
    std::vector<double> alpha;
    std::vector<double> beta;
    double mass = 0.0;

    std::size_t order() const { return alpha.size(); }
};

/// Relative threshold below which a recurrence coefficient is treated as zero.
inline constexpr double kBetaCutoff = 1e-28;

/// Lanczos reduction of diag(points) started from sqrt(weights / mass), with
/// full reorthogonalization. Stops early once beta falls below
/// kBetaCutoff * scale^2 (scale = largest distance from the weighted mean).
RecurrenceCoefficients tridiagonalize(const DiscreteMeasure& m, std::size_t max_order);

/// m-point Gauss rule from the leading m x m Jacobi matrix.
DiscreteMeasure golub_welsch(const RecurrenceCoefficients& rc, std::size_t m);

/// Replace `m` by its target_points-point Gauss rule; a no-op when `m`
/// already has at most that many atoms.
DiscreteMeasure gauss_compress(const DiscreteMeasure& m, std::size_t target_points);

/// n-point Gauss rule for N(mean, stddev^2).
DiscreteMeasure gauss_hermite(std::size_t n, double mean, double stddev);

struct TridiagonalSpectrum {
    std::vector<double> eigenvalues;       ///< ascending
    std::vector<double> first_components;  ///< of the matching unit eigenvectors
};

/// Implicit-shift QL on a symmetric tridiagonal matrix, accumulating only the
/// first row of the eigenvector matrix. At most 50 sweeps per eigenvalue.
TridiagonalSpectrum tridiag_eigen(std::span<const double> diag, std::span<const double> offdiag);

}  // namespace mfgq
