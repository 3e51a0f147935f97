#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "prema/acquisition.hpp"
#include "prema/waveform.hpp"

namespace prema {

// A valve driven periodically by a PLC: idle, energized for `duty` of each
// period, then de-energized with an exponential current decay.
struct ScenarioConfig {
  double fs = 1000.0;
  double f_op = 0.5;            // actuations per second
  std::size_t actuations = 5;
  double lead_ms = 200.0;       // idle time before the first actuation
  double duty = 0.5;            // energized fraction of a period
  double release_tau_ms = 5.0;  // current decay after de-energizing
  double noise_std = 0.5;       // mA
  std::uint64_t seed = 0;
  ValveParams valve{};
  FaultCondition fault{};
  // Valve cycle at the first actuation and cycles elapsed between two
  // actuations. With stride 0 the valve does not age.
  DegradationState start{};
  std::uint64_t cycle_stride = 0;
  bool thermal_stress = false;
  AdcConfig adc{};

  void validate() const;
  std::size_t period_samples() const;
  std::size_t lead_samples() const;
};

struct Scenario {
  SampleSource source;                 // lazily generated raw codes
  std::vector<std::uint64_t> triggers; // sample index of every actuation
  std::vector<std::uint64_t> cycles;   // valve cycle at every actuation
  std::uint64_t total_samples = 0;
};

// Deterministic for a given cfg.seed. The source may be consumed once.
Scenario make_scenario(const ScenarioConfig& cfg);

// Good valve aged from cycle 0 to failure_cycle, one actuation every
// `stride` cycles.
ScenarioConfig degradation_scenario(std::uint64_t failure_cycle,
                                    std::uint64_t stride, std::uint64_t seed);

// Idle current only.
Scenario flat_scenario(std::uint64_t samples, const AdcConfig& adc = {});

// Converts a recorded trace (mA) into raw codes through the sensing chain.
SampleSource trace_source(const TransientTrace& trace, const AdcConfig& adc);

}  // namespace prema
