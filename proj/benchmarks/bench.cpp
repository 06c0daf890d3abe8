#include <benchmark/benchmark.h>

#include <vector>

#include "nvphys/ellipsoid.hpp"
#include "nvphys/ensemble.hpp"
#include "nvphys/optics.hpp"
#include "nvphys/rate_model.hpp"
#include "nvphys/sizing.hpp"
#include "nvphys/spectra.hpp"

namespace {

using namespace nvphys;

void BM_DepolarizationTriaxial(benchmark::State& state) {
  const Ellipsoid shape(1.0, 0.7, 0.4);  // no closed form, Carlson path
  for (auto _ : state) {
    benchmark::DoNotOptimize(depolarization_factors(shape));
  }
}
BENCHMARK(BM_DepolarizationTriaxial);

void BM_CouplingFactors(benchmark::State& state) {
  const Ellipsoid shape(1.0, 0.7, 0.4);
  const OpticalEnvironment env = OpticalEnvironment::water();
  for (auto _ : state) {
    benchmark::DoNotOptimize(coupling_factors(shape, env));
  }
}
BENCHMARK(BM_CouplingFactors);

void BM_SteadyState(benchmark::State& state) {
  const PhotophysicsParams p = PhotophysicsParams::bulk();
  ExcitationConditions exc;
  exc.intensity_kW_cm2 = 130.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(steady_state(p, exc));
  }
}
BENCHMARK(BM_SteadyState);

void BM_SaturationFit(benchmark::State& state) {
  std::vector<RatePoint> points;
  const double r_max = 5.2e4, p_s = 0.008;
  for (double p = p_s / 20.0; p <= p_s * 20.0; p *= 2.0)
    points.push_back({p, r_max * p / (p + p_s), 0.05});
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_saturation(points, true));
  }
}
BENCHMARK(BM_SaturationFit);

void BM_SpectralRate(benchmark::State& state) {
  const SpectrumPair pair = synthetic_nv_spectra();
  for (auto _ : state) {
    const SpectralQuantities q =
        spectral_quantities(pair.absorption, pair.luminescence, 3.1e-17);
    benchmark::DoNotOptimize(radiative_rate_from_spectra(q, 2.42));
  }
}
BENCHMARK(BM_SpectralRate);

void BM_SampleEnsemble(benchmark::State& state) {
  EnsembleConfig cfg;
  cfg.crystal_count = static_cast<std::size_t>(state.range(0));
  cfg.seed = 7;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_ensemble(cfg));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleEnsemble)->Arg(100)->Arg(500);

}  // namespace

BENCHMARK_MAIN();
