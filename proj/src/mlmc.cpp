#include "mfgq/mlmc.hpp"

#include "mfgq/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace mfgq {

double MlmcEstimate::mean_estimate() const {
    if (replicates.empty()) return 0.0;
    double s = 0.0;
    for (const auto& r : replicates) s += r.estimate;
    return s / static_cast<double>(replicates.size());
}

double MlmcEstimate::mean_work() const {
    if (replicates.empty()) return 0.0;
    double s = 0.0;
    for (const auto& r : replicates) s += static_cast<double>(r.work);
    return s / static_cast<double>(replicates.size());
}

double MlmcEstimate::rms_error(double exact) const {
    if (replicates.empty()) return 0.0;
    double s = 0.0;
    for (const auto& r : replicates) s += (r.estimate - exact) * (r.estimate - exact);
    return std::sqrt(s / static_cast<double>(replicates.size()));
}

double sde_drift(const MeanFieldModel& model, double x) {
    const double a = model.drift_kernel(x, x);
    return model.outer_drift ? model.outer_drift(a) : a;
}

double sde_diffusion(const MeanFieldModel& model, double x) {
    const double b = model.diffusion_kernel(x, x);
    return model.outer_diffusion ? model.outer_diffusion(b) : b;
}

namespace {

struct Sums {
    double s1 = 0.0;
    double s2 = 0.0;
};

struct LevelSampler {
    const MeanFieldModel& model;
    double x0;
    const std::function<double(double)>& phi;
    const MlmcOptions& opt;
    std::uint64_t stream;

    // One coupled sample of P_l - P_{l-1} (just P_0 on level 0).
    double sample(std::size_t level, std::mt19937_64& rng, std::normal_distribution<double>& normal) const {
        const std::size_t fine_steps = std::size_t{1} << level;
        const double h = opt.horizon / static_cast<double>(fine_steps);
        const double sh = std::sqrt(h);
        double xf = x0;
        if (level == 0) {
            const double dw = sh * normal(rng);
            xf += sde_drift(model, xf) * h + sde_diffusion(model, xf) * dw;
            return phi(xf);
        }
        double xc = x0;
        for (std::size_t n = 0; n < fine_steps / 2; ++n) {
            const double dw1 = sh * normal(rng);
            const double dw2 = sh * normal(rng);
            xf += sde_drift(model, xf) * h + sde_diffusion(model, xf) * dw1;
            xf += sde_drift(model, xf) * h + sde_diffusion(model, xf) * dw2;
            xc += sde_drift(model, xc) * 2.0 * h + sde_diffusion(model, xc) * (dw1 + dw2);
        }
        return phi(xf) - phi(xc);
    }

    Sums chunk(std::size_t level, std::size_t batch, std::size_t index, std::size_t count) const {
        std::seed_seq seq{static_cast<std::uint32_t>(opt.seed), static_cast<std::uint32_t>(opt.seed >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                          static_cast<std::uint32_t>(level), static_cast<std::uint32_t>(batch),
                          static_cast<std::uint32_t>(index)};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> normal;
        Sums s;
        for (std::size_t i = 0; i < count; ++i) {
            const double d = sample(level, rng, normal);
            s.s1 += d;
            s.s2 += d * d;
        }
        return s;
    }

    // Chunks are combined in index order, so the totals do not depend on threading.
    Sums run(std::size_t level, std::size_t batch, std::size_t count) const {
        const std::size_t chunk = std::max<std::size_t>(1, opt.chunk);
        const std::size_t n_chunks = (count + chunk - 1) / chunk;
        std::vector<Sums> parts(n_chunks);
        const auto nc = static_cast<std::ptrdiff_t>(n_chunks);
        auto one = [&](std::ptrdiff_t c) {
            const auto i = static_cast<std::size_t>(c);
            parts[i] = this->chunk(level, batch, i, std::min(chunk, count - i * chunk));
        };
        if (opt.exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic) if (nc > 1)
            for (std::ptrdiff_t c = 0; c < nc; ++c) one(c);
        } else {
            for (std::ptrdiff_t c = 0; c < nc; ++c) one(c);
        }
        Sums total;
        for (const auto& p : parts) {
            total.s1 += p.s1;
            total.s2 += p.s2;
        }
        return total;
    }
};

}  // namespace

MlmcRun mlmc_run(const MeanFieldModel& model, double x0, const std::function<double(double)>& phi, double tol,
                 const MlmcOptions& opt, std::uint64_t stream) {
    if (model.law_dependent) throw MeanFieldNotSupportedError();
    if (!(tol > 0.0)) throw ValidationError("MLMC tolerance must be positive");
    if (!(opt.horizon > 0.0)) throw ValidationError("MLMC horizon must be positive");
    if (opt.initial_samples < 2) throw ValidationError("MLMC needs at least 2 initial samples");
    if (opt.min_levels < 2 || opt.max_levels < opt.min_levels || opt.max_levels > 40) throw ValidationError("bad MLMC level range");

    constexpr double alpha = 1.0;
    constexpr double beta = 1.0;
    const LevelSampler sampler{model, x0, phi, opt, stream};

    std::size_t L = opt.min_levels;
    std::vector<std::size_t> N(L + 1, 0), dN(L + 1, opt.initial_samples), batches(L + 1, 0);
    std::vector<Sums> sums(L + 1);
    std::vector<double> ml, vl;
    auto cost = [](std::size_t l) { return std::ldexp(1.0, static_cast<int>(l)); };

    auto optimal_counts = [&]() {
        double s = 0.0;
        for (std::size_t l = 0; l <= L; ++l) s += std::sqrt(vl[l] * cost(l));
        for (std::size_t l = 0; l <= L; ++l) {
            double ns = std::ceil(2.0 / (tol * tol) * std::sqrt(vl[l] / cost(l)) * s);
            if (N[l] == 0) ns = std::max(ns, 2.0);  // a zero-variance level still needs samples
            dN[l] = ns > static_cast<double>(N[l]) ? static_cast<std::size_t>(ns) - N[l] : 0;
        }
    };

    while (std::accumulate(dN.begin(), dN.end(), std::size_t{0}) > 0) {
        for (std::size_t l = 0; l <= L; ++l) {
            if (dN[l] == 0) continue;
            const Sums s = sampler.run(l, batches[l]++, dN[l]);
            sums[l].s1 += s.s1;
            sums[l].s2 += s.s2;
            N[l] += dN[l];
        }
        ml.assign(L + 1, 0.0);
        vl.assign(L + 1, 0.0);
        for (std::size_t l = 0; l <= L; ++l) {
            const double n = static_cast<double>(N[l]);
            ml[l] = std::abs(sums[l].s1 / n);
            vl[l] = std::max(0.0, sums[l].s2 / n - ml[l] * ml[l]);
        }
        // Guard against accidentally tiny estimates on the finer levels.
        for (std::size_t l = 2; l <= L; ++l) {
            ml[l] = std::max(ml[l], 0.5 * ml[l - 1] / std::pow(2.0, alpha));
            vl[l] = std::max(vl[l], 0.5 * vl[l - 1] / std::pow(2.0, beta));
        }
        optimal_counts();

        bool settled = true;
        for (std::size_t l = 0; l <= L; ++l)
            if (static_cast<double>(dN[l]) > 0.01 * static_cast<double>(N[l])) settled = false;
        if (!settled) continue;

        const double a2 = std::pow(2.0, alpha);
        const double rem =
            std::max({ml[L - 2] / (a2 * a2), ml[L - 1] / a2, ml[L]}) / (a2 - 1.0);
        if (rem > tol / std::sqrt(2.0) && L < opt.max_levels) {
            ++L;
            N.push_back(0);
            batches.push_back(0);
            sums.push_back({});
            ml.push_back(0.0);
            vl.push_back(vl[L - 1] / std::pow(2.0, beta));
            dN.assign(L + 1, 0);
            optimal_counts();
        }
    }

    MlmcRun run;
    double var = 0.0;
    for (std::size_t l = 0; l <= L; ++l) {
        const double n = static_cast<double>(N[l]);
        const double mean = sums[l].s1 / n;
        const double v = std::max(0.0, sums[l].s2 / n - mean * mean);
        run.estimate += mean;
        var += v / n;
        run.work += static_cast<std::uint64_t>(N[l]) << l;
        run.levels.push_back({N[l], mean, v});
    }
    run.std_error = std::sqrt(var);
    return run;
}

std::vector<MlmcEstimate> mlmc_estimate(const MeanFieldModel& model, double x0,
                                        const std::function<double(double)>& phi,
                                        const std::vector<double>& tolerances, const MlmcOptions& options) {
    if (model.law_dependent) throw MeanFieldNotSupportedError();
    if (options.replicates < 1) throw ValidationError("MLMC needs at least one replicate");
    std::vector<MlmcEstimate> out;
    out.reserve(tolerances.size());
    for (std::size_t t = 0; t < tolerances.size(); ++t) {
        MlmcEstimate e;
        e.tolerance = tolerances[t];
        for (std::size_t r = 0; r < options.replicates; ++r)
            e.replicates.push_back(mlmc_run(model, x0, phi, tolerances[t], options, (std::uint64_t{t} << 32) | r));
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace mfgq
