#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "oracles/brute_force_features.hpp"
#include "prema/errors.hpp"
#include "prema/features.hpp"

namespace prema {
namespace {

SynthOptions quiet() {
  SynthOptions o;
  o.noise_std = 0.0;
  return o;
}

TEST(EdgeScan, FlatTraceHasNoEdges) {
  const std::vector<double> zeros(1000, 0.0);
  EXPECT_TRUE(detect_rising_edges(zeros, {}).empty());
}

TEST(EdgeScan, StepIsFlaggedFourSamplesEarly) {
  // 0 before 100, 250 from 100 on. The first window [z, z+5) whose mean
  // reaches the threshold already contains sample 100 when z = 96 (mean 50).
  std::vector<double> s(400, 0.0);
  std::fill(s.begin() + 100, s.end(), 250.0);
  const auto edges = detect_rising_edges(s, {});
  ASSERT_EQ(edges.size(), 1u);
  EXPECT_EQ(edges[0], 96u);
  EXPECT_EQ(edges, oracle::edges(s, {}).usable);
}

TEST(EdgeScan, TwoPulsesGiveTwoEdgesAtTheSameSpacing) {
  std::vector<double> s(1000, 0.0);
  std::fill(s.begin() + 100, s.begin() + 300, 250.0);
  std::fill(s.begin() + 500, s.begin() + 700, 250.0);
  const auto edges = detect_rising_edges(s, {});
  ASSERT_EQ(edges.size(), 2u);
  EXPECT_EQ(edges[1] - edges[0], 400u);
}

TEST(EdgeScan, SkipSuppressesRetriggerInsideTheSameRise) {
  // A slow staircase would re-trigger every few samples without the skip.
  std::vector<double> s(400, 0.0);
  for (std::size_t n = 100; n < 400; ++n) s[n] = n % 3 == 0 ? 0.0 : 30.0;
  const auto scan = scan_rising_edges(s, {});
  const auto expected = oracle::edges(s, {});
  EXPECT_EQ(scan.edges, expected.usable);
  EXPECT_EQ(scan.truncated_tail, expected.tail);
  for (std::size_t k = 1; k < scan.edges.size(); ++k) {
    EXPECT_GT(scan.edges[k] - scan.edges[k - 1], 30u);
  }
}

TEST(EdgeScan, ClassifiesTruncatedEdges) {
  std::vector<double> s(300, 0.0);
  std::fill(s.begin() + 20, s.begin() + 60, 250.0);    // too little history
  std::fill(s.begin() + 240, s.end(), 250.0);          // frame runs off the end
  const EdgeScan scan = scan_rising_edges(s, {});
  EXPECT_TRUE(scan.edges.empty());
  EXPECT_EQ(scan.truncated_head, (std::vector<std::size_t>{16}));
  EXPECT_EQ(scan.truncated_tail, (std::vector<std::size_t>{236}));
  // Resuming points back at the tail edge's trigger position.
  EXPECT_EQ(scan.resume_at, 236u + 5u);
}

TEST(EdgeScan, ResumingOnAGrownTraceFindsTheTailEdge) {
  std::vector<double> s(300, 0.0);
  std::fill(s.begin() + 240, s.end(), 250.0);
  const EdgeScan first = scan_rising_edges(s, {});
  s.resize(400, 250.0);
  const EdgeScan second = scan_rising_edges(s, {}, first.resume_at);
  EXPECT_EQ(second.edges, (std::vector<std::size_t>{236}));
}

std::vector<double> ramp_trace(std::size_t z) {
  // Idle 0 up to z, then 5 mA per sample capped at 250.
  std::vector<double> s(z + 150, 0.0);
  for (std::size_t m = 0; z + m < s.size(); ++m) {
    s[z + m] = std::min(5.0 * static_cast<double>(m), 250.0);
  }
  return s;
}

TEST(ExtractFeatures, RampByHand) {
  const auto s = ramp_trace(60);
  const TransientFeatures f = extract_features(s, 60, {});
  // Upper window m in [30, 50): mean of 5m = 5 * 39.5.
  EXPECT_DOUBLE_EQ(f.ecv_lower_avg, 0.0);
  EXPECT_DOUBLE_EQ(f.ecv_upper_avg, 197.5);
  EXPECT_DOUBLE_EQ(f.delta_ecv, 197.5);
  EXPECT_DOUBLE_EQ(f.ecv10, 19.75);
  EXPECT_DOUBLE_EQ(f.ecv90, 177.75);
  // First m with 5m >= 19.75 is 4; last m with 5m <= 177.75 is 35.
  EXPECT_DOUBLE_EQ(f.tl, 4.0);
  EXPECT_DOUBLE_EQ(f.tu, 36.0);
  EXPECT_DOUBLE_EQ(f.di_dt, 158.0 / 32.0);
  // Trapezoid of a line from 0 to 150 over 30 intervals, divided by 30.
  EXPECT_DOUBLE_EQ(f.auc, 75.0);
}

TEST(ExtractFeatures, InstantStepIsDegenerate) {
  std::vector<double> s(300, 0.0);
  std::fill(s.begin() + 100, s.end(), 250.0);
  EXPECT_THROW(extract_features(s, 100, {}), DegenerateTransientError);
}

TEST(ExtractFeatures, FlatSignalIsNoActuation) {
  const std::vector<double> s(300, 0.0);
  EXPECT_THROW(extract_features(s, 100, {}), NoActuationError);
  std::vector<double> falling(300, 100.0);
  std::fill(falling.begin() + 100, falling.end(), 20.0);
  EXPECT_THROW(extract_features(falling, 100, {}), NoActuationError);
}

TEST(ExtractFeatures, RejectsOutOfRangeZeroIndex) {
  const auto s = ramp_trace(60);
  EXPECT_THROW(extract_features(s, 49, {}), RangeError);
  EXPECT_THROW(extract_features(s, s.size() - 99, {}), RangeError);
}

TEST(ExtractFeatures, SlopeIdentityHolds) {
  const TransientTrace t = synth_transient({}, FaultCondition::good(), {}, quiet());
  const auto r = extract_all(t, {});
  ASSERT_EQ(r.features.size(), 1u);
  const auto& f = r.features[0].features;
  EXPECT_GT(f.tu, f.tl);
  EXPECT_NEAR(f.di_dt * (f.tu - f.tl), 0.8 * f.delta_ecv, 1e-9 * f.delta_ecv);
}

TEST(ExtractFeatures, BaselineShiftLeavesShapeFeaturesAlone) {
  SynthOptions o;
  o.noise_std = 1.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    o.seed = seed;
    const TransientTrace t = synth_transient({}, FaultCondition::good(), {}, o);
    const std::size_t z = *t.trigger_index - 2;
    const double c = 37.0;
    std::vector<double> shifted = t.samples;
    for (double& v : shifted) v += c;
    const auto a = extract_features(t.samples, z, {});
    const auto b = extract_features(shifted, z, {});
    EXPECT_EQ(a.tl, b.tl);
    EXPECT_EQ(a.tu, b.tu);
    EXPECT_NEAR(a.di_dt, b.di_dt, 1e-9);
    EXPECT_NEAR(b.auc - a.auc, c, 1e-9);
    EXPECT_NEAR(b.delta_ecv, a.delta_ecv, 1e-9);
  }
}

TEST(ExtractFeatures, TimeShiftMovesOnlyTheZeroIndex) {
  const TransientTrace t = synth_transient({}, FaultCondition::good(), {}, quiet());
  TransientTrace later = t;
  later.samples.insert(later.samples.begin(), 123, 0.0);
  const auto a = extract_all(t, {});
  const auto b = extract_all(later, {});
  ASSERT_EQ(a.features.size(), 1u);
  ASSERT_EQ(b.features.size(), 1u);
  EXPECT_EQ(b.features[0].zero_index, a.features[0].zero_index + 123);
  EXPECT_EQ(b.features[0].features.di_dt, a.features[0].features.di_dt);
  EXPECT_EQ(b.features[0].features.auc, a.features[0].features.auc);
}

TEST(ExtractFeatures, FaultClassesAreSeparable) {
  const auto fv = [](const FaultCondition& c) {
    const auto r = extract_all(synth_transient({}, c, {}, quiet()), {});
    EXPECT_EQ(r.features.size(), 1u);
    return to_feature_vector(r.features.at(0).features);
  };
  const std::vector<FeatureVector> v = {
      fv(FaultCondition::good()), fv(FaultCondition::spool_stuck()),
      fv(FaultCondition::spring_failure()), fv(FaultCondition::under_voltage(12))};
  const auto apart = [](double a, double b) {
    return std::abs(a - b) >= 0.05 * std::max(std::abs(a), std::abs(b));
  };
  for (std::size_t a = 0; a < v.size(); ++a) {
    for (std::size_t b = a + 1; b < v.size(); ++b) {
      EXPECT_TRUE(apart(v[a].di_dt, v[b].di_dt) || apart(v[a].auc, v[b].auc))
          << a << " vs " << b;
    }
  }
}

TEST(ExtractAll, ScenarioTraces) {
  const TransientTrace good = synth_transient({}, FaultCondition::good(), {}, quiet());
  const auto r = extract_all(good, {});
  ASSERT_EQ(r.features.size(), 1u);
  EXPECT_EQ(r.features[0].zero_index, 98u);
  EXPECT_GT(r.features[0].features.di_dt, 0.0);
  EXPECT_TRUE(r.diagnostics.empty());

  TransientTrace three = good;
  for (int k = 0; k < 2; ++k) {
    three.samples.insert(three.samples.end(), good.samples.begin(), good.samples.end());
  }
  // Each copy ends energized and the next starts at 0, so every copy rises.
  EXPECT_EQ(extract_all(three, {}).features.size(), 3u);

  TransientTrace flat;
  flat.samples.assign(500, 0.0);
  const auto none = extract_all(flat, {});
  EXPECT_TRUE(none.features.empty());
  EXPECT_TRUE(none.diagnostics.empty());
}

TEST(ExtractAll, ReportsPerEdgeFailuresAsDiagnostics) {
  TransientTrace t;
  t.samples.assign(400, 0.0);
  std::fill(t.samples.begin() + 100, t.samples.end(), 250.0);
  const auto r = extract_all(t, {});
  EXPECT_TRUE(r.features.empty());
  ASSERT_EQ(r.diagnostics.size(), 1u);
  EXPECT_EQ(r.diagnostics[0].issue, EdgeIssue::kDegenerate);
  EXPECT_STREQ(to_string(r.diagnostics[0].issue), "degenerate_transient");
}

TEST(ExtractAll, HigherSampleRateScalesWindows) {
  SynthOptions o = quiet();
  o.adc.sample_rate = 2000.0;
  const TransientTrace fast = synth_transient({}, FaultCondition::good(), {}, o);
  const TransientTrace slow = synth_transient({}, FaultCondition::good(), {}, quiet());
  const auto a = extract_all(fast, {});
  const auto b = extract_all(slow, {});
  ASSERT_EQ(a.features.size(), 1u);
  ASSERT_EQ(b.features.size(), 1u);
  // Times are reported in ms, so Tl and Tu agree to within a millisecond.
  // The 2 kHz edge is flagged 3 ms before the trigger instead of 2, which
  // pulls its AUC window earlier by a millisecond.
  EXPECT_NEAR(a.features[0].features.tl, b.features[0].features.tl, 1.0);
  EXPECT_NEAR(a.features[0].features.tu, b.features[0].features.tu, 1.0);
  EXPECT_EQ(a.features[0].zero_index, 200u - 6u);
  EXPECT_NEAR(a.features[0].features.auc, b.features[0].features.auc,
              0.1 * b.features[0].features.auc);
}

TEST(ExtractionConfig, ScaledToRate) {
  const ExtractionConfig c = ExtractionConfig{}.scaled_to_rate(2000.0);
  EXPECT_EQ(c.window, 10u);
  EXPECT_EQ(c.lower_window, 100u);
  EXPECT_EQ(c.frame, 200u);
  EXPECT_EQ(c.auc_window, 60u);
  const ExtractionConfig tiny = ExtractionConfig{}.scaled_to_rate(10.0);
  EXPECT_EQ(tiny.window, 1u);
  EXPECT_THROW(ExtractionConfig{}.scaled_to_rate(0.0), ParameterError);
}

TEST(ExtractionConfig, Validate) {
  ExtractionConfig c;
  c.window = 0;
  EXPECT_THROW(c.validate(), ParameterError);
  c = {};
  c.upper_window_end = c.upper_window_start;
  EXPECT_THROW(c.validate(), ParameterError);
  c = {};
  c.frame = 40;
  EXPECT_THROW(c.validate(), ParameterError);
  c = {};
  c.auc_window = c.frame;
  EXPECT_THROW(c.validate(), ParameterError);
}

// Random piecewise traces: the library must agree with the literal oracle on
// edges, outcomes, and every feature.
TEST(OracleAgreement, RandomTraces) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> level(0.0, 260.0);
  std::uniform_int_distribution<int> len(5, 120);
  std::normal_distribution<double> noise(0.0, 2.0);
  const ExtractionConfig cfg;
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> s;
    while (s.size() < 1200) {
      const bool idle = rng() % 2 == 0;
      const double target = idle ? 0.0 : level(rng);
      const int n = len(rng);
      const double start = s.empty() ? 0.0 : s.back();
      for (int k = 0; k < n; ++k) {
        const double frac = std::min(1.0, (k + 1) / 6.0);
        double v = start + frac * (target - start);
        if (!idle) v += noise(rng);
        s.push_back(std::max(0.0, v));
      }
    }
    const EdgeScan scan = scan_rising_edges(s, cfg);
    const oracle::Edges want = oracle::edges(s, cfg);
    ASSERT_EQ(scan.edges, want.usable) << trial;
    ASSERT_EQ(scan.truncated_head, want.head) << trial;
    ASSERT_EQ(scan.truncated_tail, want.tail) << trial;
    for (std::size_t z : scan.edges) {
      const oracle::Features o = oracle::features(s, z, cfg);
      if (o.outcome == oracle::Outcome::kNoActuation) {
        EXPECT_THROW(extract_features(s, z, cfg), NoActuationError);
        continue;
      }
      if (o.outcome == oracle::Outcome::kDegenerate) {
        EXPECT_THROW(extract_features(s, z, cfg), DegenerateTransientError);
        continue;
      }
      const TransientFeatures f = extract_features(s, z, cfg);
      EXPECT_NEAR(f.ecv_lower_avg, o.f.ecv_lower_avg, 1e-9);
      EXPECT_NEAR(f.ecv_upper_avg, o.f.ecv_upper_avg, 1e-9);
      EXPECT_EQ(f.tl, o.f.tl);
      EXPECT_EQ(f.tu, o.f.tu);
      EXPECT_NEAR(f.di_dt, o.f.di_dt, 1e-9 * std::max(1.0, std::abs(o.f.di_dt)));
      EXPECT_NEAR(f.auc, o.f.auc, 1e-9 * std::max(1.0, o.f.auc));
    }
  }
}

}  // namespace
}  // namespace prema
