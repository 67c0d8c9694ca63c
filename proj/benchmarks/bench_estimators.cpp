#include <benchmark/benchmark.h>

#include "plfe/bandwidth.hpp"
#include "plfe/bootstrap_scb.hpp"
#include "plfe/fe_estimator.hpp"
#include "plfe/local_poly.hpp"
#include "plfe/scb_asymptotic.hpp"
#include "plfe/sim_harness.hpp"

namespace {

// n units x T = 5 periods; n = 100 gives the nT = 500 reference size.
plfe::PanelDataset panel(std::size_t n) {
  plfe::DgpConfig cfg;
  cfg.n = n;
  cfg.T = 5;
  cfg.c = 1.0;
  cfg.seed = 7;
  return plfe::generate(cfg).data;
}

double rule_h(const plfe::PanelDataset& ds) {
  return plfe::fixed_rule_bandwidth(ds);
}

void BM_SmoothingMatrix(benchmark::State& state) {
  const auto ds = panel(static_cast<std::size_t>(state.range(0)));
  const double h = rule_h(ds);
  for (auto _ : state) benchmark::DoNotOptimize(plfe::smoothing_matrix(ds, h, plfe::epanechnikov()));
  state.SetComplexityN(state.range(0) * 5);
}
BENCHMARK(BM_SmoothingMatrix)->Arg(40)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond)->Complexity();

void BM_Fit(benchmark::State& state) {
  const auto ds = panel(static_cast<std::size_t>(state.range(0)));
  const double h = rule_h(ds);
  for (auto _ : state) benchmark::DoNotOptimize(plfe::fit(ds, h, plfe::epanechnikov()));
  state.SetComplexityN(state.range(0) * 5);
}
BENCHMARK(BM_Fit)->Arg(40)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond)->Complexity();

void BM_CvScore(benchmark::State& state) {
  const auto ds = panel(100);
  const double h = rule_h(ds);
  for (auto _ : state) benchmark::DoNotOptimize(plfe::cv_score(ds, h, plfe::epanechnikov()));
}
BENCHMARK(BM_CvScore)->Unit(benchmark::kMillisecond);

void BM_AsymptoticBand(benchmark::State& state) {
  const auto ds = panel(100);
  const auto fr = plfe::fit(ds, rule_h(ds), plfe::epanechnikov());
  for (auto _ : state) {
    benchmark::DoNotOptimize(plfe::asymptotic_band(fr, ds, plfe::epanechnikov(), fr.grid, 0.05));
  }
}
BENCHMARK(BM_AsymptoticBand)->Unit(benchmark::kMillisecond);

void BM_BootstrapBand(benchmark::State& state) {
  const auto ds = panel(100);
  const auto fr = plfe::fit(ds, rule_h(ds), plfe::epanechnikov());
  plfe::BootstrapConfig cfg;
  cfg.reps = static_cast<std::size_t>(state.range(0));
  cfg.seed = 3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(plfe::bootstrap_band(ds, fr, plfe::epanechnikov(), 0.05, cfg));
  }
}
BENCHMARK(BM_BootstrapBand)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
