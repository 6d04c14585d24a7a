#include "mfgq/kernels.hpp"

#include "mfgq/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mfgq {

bool parallel_available() {
#ifdef _OPENMP
    return true;
#else
    return false;
#endif
}

namespace kernels {

namespace {

void check_sizes(std::span<const double> at, std::span<double> drift, std::span<double> diffusion) {
    if (drift.size() != at.size() || diffusion.size() != at.size())
        throw ValidationError("output spans must match the node count");
}

// One node of the kernel sum; the inner loop stays serial so the result does
// not depend on the thread count.
inline void kernel_node(const MeanFieldModel& model, std::span<const double> y, std::span<const double> w,
                        double x, double& drift, double& diffusion) {
    double a = 0.0, b = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) {
        a += w[j] * model.drift_kernel(x, y[j]);
        b += w[j] * model.diffusion_kernel(x, y[j]);
    }
    drift = model.outer_drift ? model.outer_drift(a) : a;
    diffusion = model.outer_diffusion ? model.outer_diffusion(b) : b;
}

}  // namespace

std::uint64_t kernel_sums(const MeanFieldModel& model, const DiscreteMeasure& q, std::span<const double> at,
                          std::span<double> drift, std::span<double> diffusion, Exec exec) {
    check_sizes(at, drift, diffusion);
    const auto y = q.points();
    const auto w = q.weights();
    const auto n = static_cast<std::ptrdiff_t>(at.size());

    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static) if (n > 32)
        for (std::ptrdiff_t i = 0; i < n; ++i) kernel_node(model, y, w, at[i], drift[i], diffusion[i]);
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i) kernel_node(model, y, w, at[i], drift[i], diffusion[i]);
    }
    return 2ull * at.size() * y.size();
}

std::uint64_t mean_field_coefficients(const MeanFieldModel& model, const DiscreteMeasure& q,
                                      std::span<const double> at, std::span<double> drift,
                                      std::span<double> diffusion, Exec exec) {
    if (!model.factored) return kernel_sums(model, q, at, drift, diffusion, exec);

    check_sizes(at, drift, diffusion);
    const FactoredForm& form = *model.factored;
    const MomentVector m = moments(form, q);
    const auto n = static_cast<std::ptrdiff_t>(at.size());
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static) if (n > 256)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            drift[i] = form.drift(at[i], m);
            diffusion[i] = form.diffusion(at[i], m);
        }
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            drift[i] = form.drift(at[i], m);
            diffusion[i] = form.diffusion(at[i], m);
        }
    }
    return q.size() + 2ull * at.size();
}

}  // namespace kernels
}  // namespace mfgq
