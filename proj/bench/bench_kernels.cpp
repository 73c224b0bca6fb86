// Serial reference path vs OpenMP path for the parallel kernels.
#include <benchmark/benchmark.h>

#include "pnbound/estimator.hpp"
#include "pnbound/mcrb.hpp"
#include "pnbound/phase_noise.hpp"

using namespace pnbound;

namespace {

OfdmConfig frame(std::size_t n, std::size_t m) {
    OfdmConfig cfg;
    cfg.num_subcarriers = n;
    cfg.num_symbols = m;
    return cfg;
}

const TargetTruth kTarget = TargetTruth::from_range_velocity(50.0, 20.0);
const OscillatorModel kFro = OscillatorModel::fro(100e3);
const NoiseModel kNoise{snr_to_sigma_sq(100.0, {1.0, 0.0})};

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::Parallel : Exec::Serial; }

void BM_BuildCovariance(benchmark::State& state) {
    const SampleTimeGrid grid(OfdmConfig::nr_fr2());
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_covariance(kFro, grid, kTarget.delay_s, {}, exec_of(state)));
    }
}

void BM_AveragedLb(benchmark::State& state) {
    const OfdmConfig cfg = frame(64, 8);
    const auto x = SymbolGrid::qpsk(cfg, 7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(averaged_lb(cfg, x, kTarget, kNoise, kFro, 32, 1, exec_of(state)));
    }
}

void BM_RmseCampaign(benchmark::State& state) {
    const OfdmConfig cfg = frame(64, 8);
    const auto x = SymbolGrid::qpsk(cfg, 7);
    CampaignSpec spec;
    spec.n_trials = 64;
    for (auto _ : state) {
        benchmark::DoNotOptimize(rmse_campaign(cfg, x, kTarget, kNoise, kFro, spec, exec_of(state)));
    }
}

} // namespace

BENCHMARK(BM_BuildCovariance)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AveragedLb)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RmseCampaign)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
