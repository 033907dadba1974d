#include <benchmark/benchmark.h>

#include "udn/association.hpp"
#include "udn/config.hpp"
#include "udn/deployment.hpp"
#include "udn/metrics.hpp"
#include "udn/random.hpp"

namespace {

udn::ValidatedConfig scenario(const char* name, double lambda) {
  udn::ScenarioConfig c = udn::preset(name);
  c.bs_density_per_km2 = lambda;
  return udn::validate(c);
}

void BM_SampleDeployment(benchmark::State& state) {
  const auto cfg = scenario("fig1_ns1_L0", static_cast<double>(state.range(0)));
  const auto region = udn::region_for(cfg);
  udn::RandomStream rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(udn::sample_deployment(cfg, region, rng));
}
BENCHMARK(BM_SampleDeployment)->Arg(100)->Arg(10000)->Unit(benchmark::kMicrosecond);

void BM_Associate(benchmark::State& state) {
  const udn::CoverageSimulator sim(scenario("fig1_ns1_L85", static_cast<double>(state.range(0))));
  const auto dep = sim.deployment(0);
  const udn::LinkField links(sim.config(), dep, udn::trial_seed(1, 0));
  for (auto _ : state) benchmark::DoNotOptimize(udn::associate(dep, links, sim.config()));
}
BENCHMARK(BM_Associate)->Arg(1000)->Arg(100000)->Unit(benchmark::kMicrosecond);

void BM_RunTrial(benchmark::State& state, const char* name) {
  const udn::CoverageSimulator sim(scenario(name, static_cast<double>(state.range(0))));
  std::uint64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sim.run_trial(i++));
}
BENCHMARK_CAPTURE(BM_RunTrial, ws1, "fig1_ws1")->Arg(10)->Arg(10000)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_RunTrial, ns1_L85, "fig1_ns1_L85")->Arg(1000)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
