#pragma once

#include <functional>

namespace mfgq {

enum class OracleKind { ClosedForm, ODE, SelfConvergence };

/// Reference values for a benchmark problem on t in [0, 1].
/// Self-convergence oracles leave the moment callbacks empty; the harness
/// fills in reference values from a fine second-order run instead.
struct ReferenceOracle {
    OracleKind kind = OracleKind::ClosedForm;
    std::function<double(double t)> mean_at;
    std::function<double(double t)> second_moment_at;
    std::function<double(double t, double x)> cdf_at;  ///< may be empty
};

struct Moments {
    double mean = 0.0;
    double second = 0.0;
};

/// First two moments of dX = (alpha X + beta E[X]) dt + sigma dW, X(0) = x.
Moments ou_moments(double alpha, double beta, double sigma2, double x, double t);

/// Moment ODEs of the polynomial-drift model, classical RK4 from (x, x^2).
Moments polydrift_moments(double alpha, double x, double t, double step = 1e-5);

/// Right-hand side of the polynomial-drift moment ODEs.
Moments polydrift_rhs(double alpha, Moments m);

/// Exact cdf at time t of the Burgers mean-field SDE started from delta_0.
double burgers_exact_cdf(double sigma2, double t, double x);

/// Second moment of the exact Burgers law, by quadrature of the cdf.
double burgers_exact_second_moment(double sigma2, double t);

}  // namespace mfgq
