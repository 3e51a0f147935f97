#include <benchmark/benchmark.h>

#include <array>
#include <vector>

#include "prema/acquisition.hpp"
#include "prema/features.hpp"
#include "prema/models.hpp"
#include "prema/pipeline.hpp"
#include "prema/scenario.hpp"
#include "prema/tinynn.hpp"

namespace {

std::vector<prema::RawCode> drain(const prema::Scenario& s) {
  std::vector<prema::RawCode> out;
  while (auto c = s.source()) out.push_back(*c);
  return out;
}

void BM_FaultInference(benchmark::State& state) {
  const prema::nn::Mlp m = prema::build_fault_model(1);
  const std::array<double, 2> x = {8.0, 150.0};
  for (auto _ : state) benchmark::DoNotOptimize(prema::nn::infer(m, x));
}
BENCHMARK(BM_FaultInference);

void BM_RulInference(benchmark::State& state) {
  const prema::nn::Mlp m = prema::build_rul_model(1);
  const std::array<double, 2> x = {8.0, 150.0};
  for (auto _ : state) benchmark::DoNotOptimize(prema::nn::infer(m, x));
}
BENCHMARK(BM_RulInference);

// Whole-trace extraction; the argument is the number of actuations.
void BM_ExtractAll(benchmark::State& state) {
  prema::ScenarioConfig cfg;
  cfg.actuations = static_cast<std::size_t>(state.range(0));
  prema::TransientTrace t;
  t.samples = prema::codes_to_current(drain(prema::make_scenario(cfg)), cfg.adc);
  for (auto _ : state) benchmark::DoNotOptimize(prema::extract_all(t, {}));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ExtractAll)->Arg(5)->Arg(50);

void BM_PingPongPush(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  prema::PingPongBuffer buf(k);
  prema::RawCode code = 0;
  for (auto _ : state) {
    if (auto bank = buf.push_sample(code)) bank->release();
    code = static_cast<prema::RawCode>((code + 1) & 0xFFF);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PingPongPush)->Arg(1000)->Arg(10000);

void BM_MonitorVirtual(benchmark::State& state) {
  const prema::nn::Mlp fault = prema::build_fault_model(1);
  const prema::nn::Mlp rul = prema::build_rul_model(2);
  prema::ScenarioConfig sc;
  sc.actuations = 50;
  const std::vector<prema::RawCode> codes = drain(prema::make_scenario(sc));
  prema::MonitorConfig cfg;
  cfg.k = 2000;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        prema::run_monitor(prema::vector_source(codes), fault, rul, cfg));
  }
  state.SetItemsProcessed(state.iterations() * 50);
}
BENCHMARK(BM_MonitorVirtual);

}  // namespace

BENCHMARK_MAIN();
