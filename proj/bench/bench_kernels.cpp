#include "mfgq/gauss.hpp"
#include "mfgq/kernels.hpp"
#include "mfgq/mlmc.hpp"
#include "mfgq/stepper.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace mfgq;

DiscreteMeasure random_measure(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> x;
    std::uniform_real_distribution<double> w(0.1, 1.0);
    std::vector<double> px(n), pw(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        px[i] = x(rng);
        pw[i] = w(rng);
        total += pw[i];
    }
    for (auto& v : pw) v /= total;
    return DiscreteMeasure::from_atoms(std::move(px), std::move(pw));
}

void kernel_sums_bench(benchmark::State& state, Exec exec) {
    const auto problem = builtin("burgers");
    const auto q = random_measure(static_cast<std::size_t>(state.range(0)), 7);
    std::vector<double> a(q.size()), b(q.size());
    for (auto _ : state) {
        kernels::kernel_sums(problem.model, q, q.points(), a, b, exec);
        benchmark::DoNotOptimize(a.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

void BM_KernelSumsSerial(benchmark::State& s) { kernel_sums_bench(s, Exec::Serial); }
void BM_KernelSumsParallel(benchmark::State& s) { kernel_sums_bench(s, Exec::Parallel); }
BENCHMARK(BM_KernelSumsSerial)->RangeMultiplier(4)->Range(64, 4096);
BENCHMARK(BM_KernelSumsParallel)->RangeMultiplier(4)->Range(64, 4096);

void BM_GaussCompress(benchmark::State& state) {
    const auto q = random_measure(static_cast<std::size_t>(state.range(0)), 11);
    for (auto _ : state) benchmark::DoNotOptimize(gauss_compress(q, 30));
}
BENCHMARK(BM_GaussCompress)->RangeMultiplier(4)->Range(64, 4096);

void propagate_bench(benchmark::State& state, Exec exec) {
    const auto problem = builtin("plane_rotator");
    const auto q0 = initial_measure(problem.initial, problem.model.domain);
    StepperConfig cfg;
    cfg.dt = 1.0 / 32.0;
    cfg.exec = exec;
    for (auto _ : state) benchmark::DoNotOptimize(propagate(problem.model, q0, cfg, Scheme::GQ1).measure.size());
}

void BM_PlaneRotatorSerial(benchmark::State& s) { propagate_bench(s, Exec::Serial); }
void BM_PlaneRotatorParallel(benchmark::State& s) { propagate_bench(s, Exec::Parallel); }
BENCHMARK(BM_PlaneRotatorSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PlaneRotatorParallel)->Unit(benchmark::kMillisecond);

void mlmc_bench(benchmark::State& state, Exec exec) {
    const auto problem = builtin("gbm");
    MlmcOptions opt;
    opt.exec = exec;
    for (auto _ : state)
        benchmark::DoNotOptimize(mlmc_run(problem.model, 1.0, [](double x) { return x; }, 0.005, opt).estimate);
}

void BM_MlmcSerial(benchmark::State& s) { mlmc_bench(s, Exec::Serial); }
void BM_MlmcParallel(benchmark::State& s) { mlmc_bench(s, Exec::Parallel); }
BENCHMARK(BM_MlmcSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MlmcParallel)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
