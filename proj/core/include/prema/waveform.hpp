#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "prema/fault_class.hpp"

namespace prema {

// Raw ADC sample. 16 bits covers every supported resolution (8..16 bits).
using RawCode = std::uint16_t;

// Healthy-valve waveform parameters. Currents in mA, times in ms relative to
// the actuation instant.
struct ValveParams {
  double supply_voltage = 24.0;    // rated drive voltage (V)
  double settling_current = 250.0; // I_S at rated voltage
  double rise_tau = 8.0;           // first-order rise constant
  double dip_time = 15.0;          // centre of the plunger-motion notch
  double dip_depth = 60.0;
  double dip_width = 3.0;
  double idle_current = 0.0;       // pre-actuation baseline
  double temperature = 26.0;       // deg C; 26 is neutral
  double pressure = 1.0;           // bar; 1 is neutral

  // Throws ParameterError on non-finite or out-of-domain fields.
  void validate() const;
};

struct FaultCondition {
  FaultClass kind = FaultClass::kGood;
  // Only meaningful for kUnderVoltage; must lie in [8, 24).
  double applied_voltage = 24.0;

  static FaultCondition good() { return {FaultClass::kGood, 24.0}; }
  static FaultCondition spool_stuck() { return {FaultClass::kSpoolStuck, 24.0}; }
  static FaultCondition spring_failure() {
    return {FaultClass::kSpringFailure, 24.0};
  }
  static FaultCondition under_voltage(double volts) {
    return {FaultClass::kUnderVoltage, volts};
  }

  void validate() const;
};

// Position of a valve on its run-to-failure trajectory.
struct DegradationState {
  std::uint64_t cycle = 0;
  std::uint64_t failure_cycle = 1500;

  // cycle / failure_cycle, clamped to [0, 1].
  double severity() const;
};

// Advances the valve by `cycles` operations.
DegradationState degrade(const DegradationState& state, std::uint64_t cycles);

struct AdcConfig {
  double full_scale = 3.3;  // V
  int bits = 12;
  double gain = 12.22;      // current-sense amplifier gain, V per A
  double sample_rate = 1000.0;

  void validate() const;
  RawCode max_code() const { return static_cast<RawCode>((1u << bits) - 1u); }
  // Current represented by one code step, in mA.
  double lsb_current() const;
};

struct TransientTrace {
  std::vector<double> samples;  // mA
  double sample_rate = 1000.0;  // Hz
  std::optional<std::size_t> trigger_index;

  void validate() const;
};

// Shunt-amplifier gain G = Rs * Rl / 1 kOhm.
double sensor_gain(double rs_ohm, double rl_ohm);

// Amplifier output V = (i / 1000) * G for a current in mA.
double current_to_voltage(double current_ma, double gain);

// Saturating truncating quantizer.
RawCode adc_quantize(double volts, const AdcConfig& cfg);

// Inverse of the sensing chain. Throws RangeError when code > max_code().
double raw_to_current(RawCode code, const AdcConfig& cfg);

// Waveform parameters after fault, degradation, and environment rules have
// been applied. `ideal_current` evaluates the noiseless analog model.
struct EffectiveShape {
  double settling_current;
  double rise_tau;
  double dip_time;
  double dip_depth;
  double dip_width;
  double idle_current;
  double amplitude_scale;  // temperature multiplier on the actuated part
  double peak_bump;        // pressure term added ahead of the dip (mA)
};

EffectiveShape effective_shape(const ValveParams& params,
                               const FaultCondition& fault,
                               const DegradationState& degradation);

// Noiseless drive current at `t_ms` after actuation (idle for t < 0).
double ideal_current(const EffectiveShape& shape, double t_ms);

struct SynthOptions {
  double noise_std = 0.0;  // mA, additive white Gaussian before quantization
  std::uint64_t seed = 0;
  double pre_ms = 100.0;   // >= 60
  double post_ms = 150.0;  // >= 105
  AdcConfig adc{};
};

// Raw ADC codes for one actuation: pre_ms of idle followed by post_ms of the
// energized transient. The trigger sample is at round(pre_ms * fs / 1000).
std::vector<RawCode> synth_codes(const ValveParams& params,
                                 const FaultCondition& fault,
                                 const DegradationState& degradation,
                                 const SynthOptions& options);

// synth_codes() converted back to mA through raw_to_current().
TransientTrace synth_transient(const ValveParams& params,
                               const FaultCondition& fault,
                               const DegradationState& degradation,
                               const SynthOptions& options);

std::vector<double> codes_to_current(std::span<const RawCode> codes,
                                     const AdcConfig& cfg);

}  // namespace prema
