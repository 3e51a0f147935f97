#include "prema/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "prema/errors.hpp"

namespace prema {
namespace {

// Neutral points of the environment hooks.
constexpr double kReferenceTemperature = 26.0;
constexpr double kTemperatureCoefficient = 0.003;  // per deg C
constexpr double kReferencePressure = 1.0;
constexpr double kPressurePeakSlope = 2.0;  // mA per bar

// Spring failure moves the notch later and makes it shallower.
constexpr double kSpringDipDelay = 1.5;
constexpr double kSpringDipDepth = 0.5;

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) {
    throw ParameterError(std::string(name) + " must be finite");
  }
}

double gaussian(double t, double centre, double width) {
  const double z = (t - centre) / width;
  return std::exp(-0.5 * z * z);
}

}  // namespace

void ValveParams::validate() const {
  require_finite(supply_voltage, "supply_voltage");
  require_finite(settling_current, "settling_current");
  require_finite(rise_tau, "rise_tau");
  require_finite(dip_time, "dip_time");
  require_finite(dip_depth, "dip_depth");
  require_finite(dip_width, "dip_width");
  require_finite(idle_current, "idle_current");
  require_finite(temperature, "temperature");
  require_finite(pressure, "pressure");
  if (supply_voltage <= 0) throw ParameterError("supply_voltage must be > 0");
  if (settling_current <= 0) {
    throw ParameterError("settling_current must be > 0");
  }
  if (rise_tau <= 0) throw ParameterError("rise_tau must be > 0");
  if (dip_width <= 0) throw ParameterError("dip_width must be > 0");
  if (dip_depth < 0) throw ParameterError("dip_depth must be >= 0");
  if (idle_current >= 0.05 * settling_current) {
    throw ParameterError("idle_current must be below 5% of settling_current");
  }
}

void FaultCondition::validate() const {
  if (kind != FaultClass::kUnderVoltage) return;
  require_finite(applied_voltage, "applied_voltage");
  if (applied_voltage < 8.0 || applied_voltage >= 24.0) {
    throw ParameterError("under-voltage applied_voltage must lie in [8, 24)");
  }
}

double DegradationState::severity() const {
  if (failure_cycle == 0) throw ParameterError("failure_cycle must be > 0");
  const double s =
      static_cast<double>(cycle) / static_cast<double>(failure_cycle);
  return std::clamp(s, 0.0, 1.0);
}

DegradationState degrade(const DegradationState& state, std::uint64_t cycles) {
  DegradationState next = state;
  next.cycle += cycles;
  return next;
}

void AdcConfig::validate() const {
  if (bits < 8 || bits > 16) throw ParameterError("ADC bits must be in [8, 16]");
  if (!(full_scale > 0) || !std::isfinite(full_scale)) {
    throw ParameterError("ADC full_scale must be > 0");
  }
  if (!(gain > 0) || !std::isfinite(gain)) {
    throw ParameterError("ADC gain must be > 0");
  }
  if (!(sample_rate > 0) || !std::isfinite(sample_rate)) {
    throw ParameterError("sample_rate must be > 0");
  }
}

double AdcConfig::lsb_current() const {
  return full_scale / static_cast<double>(max_code()) / gain * 1000.0;
}

void TransientTrace::validate() const {
  if (samples.empty()) throw ParameterError("trace has no samples");
  if (!(sample_rate > 0) || !std::isfinite(sample_rate)) {
    throw ParameterError("trace sample_rate must be > 0");
  }
  for (double v : samples) require_finite(v, "trace sample");
}

double sensor_gain(double rs_ohm, double rl_ohm) {
  return rs_ohm * rl_ohm / 1000.0;
}

double current_to_voltage(double current_ma, double gain) {
  return current_ma / 1000.0 * gain;
}

RawCode adc_quantize(double volts, const AdcConfig& cfg) {
  const double max_code = cfg.max_code();
  if (std::isnan(volts)) return 0;
  const double v = std::clamp(volts, 0.0, cfg.full_scale);
  const double code = std::floor(v / cfg.full_scale * max_code);
  return static_cast<RawCode>(std::clamp(code, 0.0, max_code));
}

double raw_to_current(RawCode code, const AdcConfig& cfg) {
  if (code > cfg.max_code()) {
    throw RangeError("ADC code " + std::to_string(code) + " exceeds " +
                     std::to_string(cfg.max_code()));
  }
  return static_cast<double>(code) / static_cast<double>(cfg.max_code()) *
         cfg.full_scale / cfg.gain * 1000.0;
}

std::vector<double> codes_to_current(std::span<const RawCode> codes,
                                     const AdcConfig& cfg) {
  std::vector<double> out;
  out.reserve(codes.size());
  for (RawCode c : codes) out.push_back(raw_to_current(c, cfg));
  return out;
}

EffectiveShape effective_shape(const ValveParams& params,
                               const FaultCondition& fault,
                               const DegradationState& degradation) {
  params.validate();
  fault.validate();
  const double severity = degradation.severity();

  EffectiveShape s{};
  s.settling_current = params.settling_current;
  s.rise_tau = params.rise_tau;
  s.dip_time = params.dip_time;
  s.dip_depth = params.dip_depth;
  s.dip_width = params.dip_width;
  s.idle_current = params.idle_current;

  // Wear fades the plunger notch and slows the rise; at severity 1 the shape
  // is the spool-stuck shape of the same worn valve.
  s.dip_depth *= 1.0 - severity;
  s.rise_tau *= 1.0 + severity;

  switch (fault.kind) {
    case FaultClass::kGood:
      break;
    case FaultClass::kSpoolStuck:
      s.dip_depth = 0.0;
      break;
    case FaultClass::kSpringFailure:
      s.dip_time *= kSpringDipDelay;
      s.dip_depth *= kSpringDipDepth;
      break;
    case FaultClass::kUnderVoltage: {
      const double ratio = fault.applied_voltage / params.supply_voltage;
      s.settling_current *= ratio;
      s.rise_tau /= ratio;
      break;
    }
  }

  s.amplitude_scale =
      1.0 - kTemperatureCoefficient * (params.temperature - kReferenceTemperature);
  s.peak_bump = kPressurePeakSlope * (params.pressure - kReferencePressure);
  return s;
}

double ideal_current(const EffectiveShape& s, double t_ms) {
  if (t_ms < 0) return s.idle_current;
  double i = s.settling_current * (1.0 - std::exp(-t_ms / s.rise_tau));
  if (s.dip_depth != 0.0) {
    i -= s.dip_depth * gaussian(t_ms, s.dip_time, s.dip_width);
  }
  if (s.peak_bump != 0.0) {
    i += s.peak_bump *
         gaussian(t_ms, s.dip_time - 2.0 * s.dip_width, s.dip_width);
  }
  return s.idle_current + s.amplitude_scale * i;
}

std::vector<RawCode> synth_codes(const ValveParams& params,
                                 const FaultCondition& fault,
                                 const DegradationState& degradation,
                                 const SynthOptions& options) {
  options.adc.validate();
  require_finite(options.noise_std, "noise_std");
  require_finite(options.pre_ms, "pre_ms");
  require_finite(options.post_ms, "post_ms");
  if (options.noise_std < 0) throw ParameterError("noise_std must be >= 0");
  if (options.pre_ms < 60.0) throw ParameterError("pre_ms must be >= 60");
  if (options.post_ms < 105.0) throw ParameterError("post_ms must be >= 105");

  const EffectiveShape shape = effective_shape(params, fault, degradation);
  const double fs = options.adc.sample_rate;
  const auto pre = static_cast<std::size_t>(std::lround(options.pre_ms * fs / 1000.0));
  const auto post = static_cast<std::size_t>(std::lround(options.post_ms * fs / 1000.0));

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  std::vector<RawCode> codes;
  codes.reserve(pre + post);
  for (std::size_t n = 0; n < pre + post; ++n) {
    const double t_ms =
        (static_cast<double>(n) - static_cast<double>(pre)) * 1000.0 / fs;
    double current = ideal_current(shape, t_ms);
    if (options.noise_std > 0) current += options.noise_std * noise(rng);
    codes.push_back(
        adc_quantize(current_to_voltage(current, options.adc.gain), options.adc));
  }
  return codes;
}

TransientTrace synth_transient(const ValveParams& params,
                               const FaultCondition& fault,
                               const DegradationState& degradation,
                               const SynthOptions& options) {
  const std::vector<RawCode> codes =
      synth_codes(params, fault, degradation, options);
  TransientTrace trace;
  trace.samples = codes_to_current(codes, options.adc);
  trace.sample_rate = options.adc.sample_rate;
  trace.trigger_index = static_cast<std::size_t>(
      std::lround(options.pre_ms * options.adc.sample_rate / 1000.0));
  return trace;
}

}  // namespace prema
