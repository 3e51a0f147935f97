#include <gtest/gtest.h>

#include "prema/errors.hpp"
#include "prema/features.hpp"
#include "prema/scenario.hpp"

namespace prema {
namespace {

std::vector<RawCode> drain(const SampleSource& src) {
  std::vector<RawCode> out;
  while (auto c = src()) out.push_back(*c);
  return out;
}

TEST(Scenario, LayoutOfDefaultRun) {
  const ScenarioConfig cfg;
  EXPECT_EQ(cfg.period_samples(), 2000u);
  EXPECT_EQ(cfg.lead_samples(), 200u);
  const Scenario s = make_scenario(cfg);
  EXPECT_EQ(s.total_samples, 10200u);
  EXPECT_EQ(s.triggers, (std::vector<std::uint64_t>{200, 2200, 4200, 6200, 8200}));
  EXPECT_EQ(s.cycles, (std::vector<std::uint64_t>(5, 0)));
  EXPECT_EQ(drain(s.source).size(), 10200u);
  EXPECT_FALSE(s.source().has_value());
}

TEST(Scenario, DeterministicPerSeed) {
  ScenarioConfig cfg;
  cfg.seed = 4;
  const auto a = drain(make_scenario(cfg).source);
  const auto b = drain(make_scenario(cfg).source);
  EXPECT_EQ(a, b);
  cfg.seed = 5;
  EXPECT_NE(a, drain(make_scenario(cfg).source));
}

TEST(Scenario, EveryActuationIsExtractable) {
  ScenarioConfig cfg;
  cfg.actuations = 4;
  const Scenario s = make_scenario(cfg);
  TransientTrace t;
  t.samples = codes_to_current(drain(s.source), cfg.adc);
  const ExtractionResult r = extract_all(t, {});
  ASSERT_EQ(r.features.size(), 4u);
  EXPECT_TRUE(r.diagnostics.empty());
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(r.features[k].zero_index, s.triggers[k] - 2);
  }
}

TEST(Scenario, CurrentDecaysAfterDeEnergizing) {
  ScenarioConfig cfg;
  cfg.noise_std = 0.0;
  cfg.actuations = 1;
  const auto codes = drain(make_scenario(cfg).source);
  const auto mA = codes_to_current(codes, cfg.adc);
  const std::size_t off = 200 + 1000;
  EXPECT_GT(mA[off - 1], 200.0);
  EXPECT_LT(mA[off + 50], 5.0);
  EXPECT_EQ(codes.back(), 0);
}

TEST(Scenario, AgingAdvancesCycles) {
  const ScenarioConfig cfg = degradation_scenario(1500, 5, 0);
  EXPECT_EQ(cfg.actuations, 300u);
  ScenarioConfig small = cfg;
  small.actuations = 3;
  const Scenario s = make_scenario(small);
  EXPECT_EQ(s.cycles, (std::vector<std::uint64_t>{0, 5, 10}));
  EXPECT_THROW(degradation_scenario(1500, 0, 0), ParameterError);
}

TEST(Scenario, WornValveLosesItsNotch) {
  ScenarioConfig cfg;
  cfg.noise_std = 0.0;
  cfg.actuations = 1;
  cfg.start = {1500, 1500};
  const auto worn = codes_to_current(drain(make_scenario(cfg).source), cfg.adc);
  cfg.start = {0, 1500};
  const auto fresh = codes_to_current(drain(make_scenario(cfg).source), cfg.adc);
  // The fresh rise turns down into the notch; the worn one keeps climbing.
  const auto falls = [](const std::vector<double>& v) {
    for (std::size_t n = 201; n < 240; ++n) {
      if (v[n] < v[n - 1]) return true;
    }
    return false;
  };
  EXPECT_TRUE(falls(fresh));
  EXPECT_FALSE(falls(worn));
}

TEST(Scenario, RejectsBadConfig) {
  ScenarioConfig cfg;
  cfg.duty = 1.0;
  EXPECT_THROW(make_scenario(cfg), ParameterError);
  cfg = {};
  cfg.f_op = 0.0;
  EXPECT_THROW(make_scenario(cfg), ParameterError);
  cfg = {};
  cfg.f_op = 900.0;
  EXPECT_THROW(make_scenario(cfg), ParameterError);
  cfg = {};
  cfg.fault = FaultCondition::under_voltage(30.0);
  EXPECT_THROW(make_scenario(cfg), ParameterError);
}

TEST(FlatScenario, IdleCodesOnly) {
  const Scenario s = flat_scenario(1234);
  const auto codes = drain(s.source);
  EXPECT_EQ(codes.size(), 1234u);
  for (RawCode c : codes) EXPECT_EQ(c, 0);
  EXPECT_TRUE(s.triggers.empty());
}

TEST(TraceSource, RequantizesRecordedCurrents) {
  const AdcConfig adc;
  const std::vector<RawCode> codes = {0, 1, 100, 4095, 2047};
  TransientTrace t;
  t.samples = codes_to_current(codes, adc);
  EXPECT_EQ(drain(trace_source(t, adc)), codes);
}

}  // namespace
}  // namespace prema
