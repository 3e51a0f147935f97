#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "prema/errors.hpp"
#include "prema/features.hpp"
#include "prema/waveform.hpp"

namespace prema {
namespace {

constexpr double kLsb = 3.3 / 4095.0 / 12.22 * 1000.0;  // mA per code

// Closed-form healthy current, written out independently of the library.
double healthy_current(double t_ms) {
  if (t_ms < 0) return 0.0;
  const double rise = 250.0 * (1.0 - std::exp(-t_ms / 8.0));
  const double dz = (t_ms - 15.0) / 3.0;
  return rise - 60.0 * std::exp(-0.5 * dz * dz);
}

SynthOptions quiet() {
  SynthOptions o;
  o.noise_std = 0.0;
  return o;
}

TEST(SensorGain, MatchesShuntAndLoadProduct) {
  EXPECT_NEAR(sensor_gain(0.1, 122000.0), 12.2, 1e-9);
  EXPECT_EQ(sensor_gain(0.0, 122000.0), 0.0);
  EXPECT_NEAR(sensor_gain(1.0, 1000.0), 1.0, 1e-12);
}

TEST(CurrentToVoltage, ScalesMilliampsByGain) {
  const double v = current_to_voltage(270.0, 12.22);
  EXPECT_NEAR(v, 3.2994, 1e-9);
  EXPECT_GE(v, 3.29);
  EXPECT_LE(v, 3.30);
  EXPECT_EQ(current_to_voltage(0.0, 12.22), 0.0);
  EXPECT_NEAR(current_to_voltage(100.0, 10.0), 1.0, 1e-12);
}

TEST(AdcQuantize, TruncatesAndSaturates) {
  const AdcConfig adc;
  EXPECT_EQ(adc_quantize(3.3, adc), 4095);
  EXPECT_EQ(adc_quantize(0.0, adc), 0);
  EXPECT_EQ(adc_quantize(1.65, adc), 2047);
  EXPECT_EQ(adc_quantize(-1.0, adc), 0);
  EXPECT_EQ(adc_quantize(10.0, adc), 4095);
  AdcConfig ten_bit = adc;
  ten_bit.bits = 10;
  EXPECT_EQ(adc_quantize(3.3, ten_bit), 1023);
}

TEST(RawToCurrent, InvertsTheSensingChain) {
  const AdcConfig adc;
  EXPECT_NEAR(raw_to_current(4095, adc), 3300.0 / 12.22, 1e-9);
  EXPECT_NEAR(raw_to_current(4095, adc), 270.0, 0.05);
  EXPECT_EQ(raw_to_current(0, adc), 0.0);
  EXPECT_NEAR(raw_to_current(2047, adc), 2047.0 / 4095.0 * 3300.0 / 12.22, 1e-9);
  EXPECT_THROW(raw_to_current(4096, adc), RangeError);
}

TEST(RawToCurrent, RoundTripStaysWithinOneLsb) {
  const AdcConfig adc;
  EXPECT_NEAR(adc.lsb_current(), kLsb, 1e-12);
  for (int step = 0; step <= 27000; ++step) {
    const double i = step * 0.01;
    const RawCode c = adc_quantize(current_to_voltage(i, adc.gain), adc);
    const double back = raw_to_current(c, adc);
    ASSERT_LE(std::abs(back - i), kLsb + 1e-12) << "i=" << i;
  }
}

TEST(AdcConfig, RejectsOutOfRangeFields) {
  AdcConfig a;
  a.bits = 7;
  EXPECT_THROW(a.validate(), ParameterError);
  a = {};
  a.gain = 0;
  EXPECT_THROW(a.validate(), ParameterError);
  a = {};
  a.sample_rate = -1;
  EXPECT_THROW(a.validate(), ParameterError);
}

TEST(ValveParams, EnforcesInvariants) {
  ValveParams p;
  EXPECT_NO_THROW(p.validate());
  p.rise_tau = 0;
  EXPECT_THROW(p.validate(), ParameterError);
  p = {};
  p.idle_current = 12.5;  // 5% of 250 mA
  EXPECT_THROW(p.validate(), ParameterError);
  p = {};
  p.dip_depth = -1;
  EXPECT_THROW(p.validate(), ParameterError);
  p = {};
  p.settling_current = std::nan("");
  EXPECT_THROW(p.validate(), ParameterError);
}

TEST(FaultCondition, UnderVoltageRange) {
  EXPECT_NO_THROW(FaultCondition::under_voltage(8.0).validate());
  EXPECT_NO_THROW(FaultCondition::under_voltage(23.9).validate());
  EXPECT_THROW(FaultCondition::under_voltage(7.9).validate(), ParameterError);
  EXPECT_THROW(FaultCondition::under_voltage(24.0).validate(), ParameterError);
}

TEST(Degrade, SeverityIsClampedRatio) {
  EXPECT_EQ(degrade({0, 1500}, 0).severity(), 0.0);
  EXPECT_EQ(degrade({1500, 1500}, 0).severity(), 1.0);
  EXPECT_EQ(degrade({750, 1500}, 0).severity(), 0.5);
  EXPECT_EQ(degrade({1000, 1500}, 2000).severity(), 1.0);
  EXPECT_EQ(degrade({10, 1500}, 5).cycle, 15u);
}

TEST(SynthTransient, IdleSegmentThenTrigger) {
  const TransientTrace t = synth_transient({}, FaultCondition::good(), {}, quiet());
  ASSERT_EQ(t.samples.size(), 250u);
  ASSERT_TRUE(t.trigger_index.has_value());
  EXPECT_EQ(*t.trigger_index, 100u);
  for (std::size_t n = 0; n < 100; ++n) EXPECT_EQ(t.samples[n], 0.0);
}

TEST(SynthTransient, NoiselessGoodMatchesClosedForm) {
  const TransientTrace t = synth_transient({}, FaultCondition::good(), {}, quiet());
  for (std::size_t n = 0; n < t.samples.size(); ++n) {
    const double expected = std::max(0.0, healthy_current(static_cast<double>(n) - 100.0));
    ASSERT_LE(t.samples[n], expected + 1e-9) << n;   // floor quantizer
    ASSERT_GT(t.samples[n], expected - kLsb - 1e-9) << n;
  }
}

TEST(SynthTransient, GoodDeltaEcvMatchesGeneratorMean) {
  const TransientTrace t = synth_transient({}, FaultCondition::good(), {}, quiet());
  const ExtractionResult r = extract_all(t, {});
  ASSERT_EQ(r.features.size(), 1u);
  const TransientFeatures& f = r.features[0].features;
  // The upper window is [z+30, z+50); the generator's mean there is what the
  // quantized trace should reproduce.
  double mean = 0.0;
  for (int m = 30; m < 50; ++m) {
    mean += healthy_current(static_cast<double>(f.zero_index) + m - 100.0);
  }
  mean /= 20.0;
  EXPECT_NEAR(f.delta_ecv, mean - 0.0, kLsb);
  // Not fully settled by 30 ms with tau = 8 ms.
  EXPECT_LT(f.delta_ecv, 250.0);
  EXPECT_GT(f.delta_ecv, 240.0);
}

TEST(SynthTransient, UnderVoltagePlateauScalesWithVoltage) {
  const TransientTrace t =
      synth_transient({}, FaultCondition::under_voltage(12.0), {}, quiet());
  EXPECT_NEAR(t.samples.back(), 0.5 * 250.0, kLsb);
}

TEST(SynthTransient, SpoolStuckHasNoNotch) {
  const TransientTrace t =
      synth_transient({}, FaultCondition::spool_stuck(), {}, quiet());
  for (int ms = 9; ms <= 21; ++ms) {
    const double rise = 250.0 * (1.0 - std::exp(-ms / 8.0));
    EXPECT_NEAR(t.samples[100 + ms], rise, kLsb) << ms;
  }
}

TEST(SynthTransient, SpringFailureDipIsLaterAndShallower) {
  const EffectiveShape good = effective_shape({}, FaultCondition::good(), {});
  const EffectiveShape spring =
      effective_shape({}, FaultCondition::spring_failure(), {});
  EXPECT_GT(spring.dip_time, good.dip_time);
  EXPECT_LT(spring.dip_depth, good.dip_depth);
  EXPECT_GT(spring.dip_depth, 0.0);
}

TEST(SynthTransient, DeterministicPerSeed) {
  SynthOptions o;
  o.noise_std = 2.0;
  o.seed = 42;
  const auto a = synth_codes({}, FaultCondition::good(), {}, o);
  const auto b = synth_codes({}, FaultCondition::good(), {}, o);
  EXPECT_EQ(a, b);
  o.seed = 43;
  EXPECT_NE(a, synth_codes({}, FaultCondition::good(), {}, o));
}

TEST(SynthTransient, RejectsShortWindowsAndBadParams) {
  SynthOptions o;
  o.pre_ms = 59;
  EXPECT_THROW(synth_codes({}, FaultCondition::good(), {}, o), ParameterError);
  o = {};
  o.post_ms = 104;
  EXPECT_THROW(synth_codes({}, FaultCondition::good(), {}, o), ParameterError);
  ValveParams p;
  p.rise_tau = std::numeric_limits<double>::infinity();
  EXPECT_THROW(synth_codes(p, FaultCondition::good(), {}, {}), ParameterError);
}

TEST(SynthTransient, FullyWornValveLooksSpoolStuck) {
  const DegradationState worn{1500, 1500};
  EXPECT_EQ(synth_codes({}, FaultCondition::good(), worn, quiet()),
            synth_codes({}, FaultCondition::spool_stuck(), worn, quiet()));
}

double auc_of(const TransientTrace& t) {
  const ExtractionResult r = extract_all(t, {});
  EXPECT_EQ(r.features.size(), 1u);
  return r.features.at(0).features.auc;
}

TEST(SynthTransient, WearLowersAuc) {
  double previous = std::numeric_limits<double>::infinity();
  for (std::uint64_t cycle = 0; cycle <= 1500; cycle += 75) {
    const double auc = auc_of(
        synth_transient({}, FaultCondition::good(), {cycle, 1500}, quiet()));
    EXPECT_LE(auc, previous) << "cycle " << cycle;
    previous = auc;
  }
}

TEST(SynthTransient, LowerVoltageLowersPlateauAndSlope) {
  double plateau = std::numeric_limits<double>::infinity();
  double slope = std::numeric_limits<double>::infinity();
  for (double v : {20.0, 16.0, 14.0, 12.0, 10.0, 8.0}) {
    const TransientTrace t =
        synth_transient({}, FaultCondition::under_voltage(v), {}, quiet());
    const ExtractionResult r = extract_all(t, {});
    ASSERT_EQ(r.features.size(), 1u) << v;
    EXPECT_LT(t.samples.back(), plateau) << v;
    EXPECT_LT(r.features[0].features.di_dt, slope) << v;
    plateau = t.samples.back();
    slope = r.features[0].features.di_dt;
  }
}

TEST(SynthTransient, TemperatureLowersAucAndPressureRaisesPeak) {
  ValveParams hot;
  hot.temperature = 60.0;
  EXPECT_LT(auc_of(synth_transient(hot, FaultCondition::good(), {}, quiet())),
            auc_of(synth_transient({}, FaultCondition::good(), {}, quiet())));

  ValveParams pressed;
  pressed.pressure = 6.0;
  const auto peak = [](const TransientTrace& t) {
    return *std::max_element(t.samples.begin() + 100, t.samples.begin() + 115);
  };
  EXPECT_GT(peak(synth_transient(pressed, FaultCondition::good(), {}, quiet())),
            peak(synth_transient({}, FaultCondition::good(), {}, quiet())));
}

}  // namespace
}  // namespace prema
