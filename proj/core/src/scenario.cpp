#include "prema/scenario.hpp"

#include <cmath>
#include <memory>
#include <random>

#include "prema/errors.hpp"
#include "prema/models.hpp"

namespace prema {

void ScenarioConfig::validate() const {
  if (!(fs > 0) || !std::isfinite(fs)) throw ParameterError("fs must be > 0");
  if (!(f_op > 0) || !std::isfinite(f_op)) throw ParameterError("f_op must be > 0");
  if (!(duty > 0 && duty < 1)) throw ParameterError("duty must lie in (0, 1)");
  if (!(lead_ms >= 0) || !std::isfinite(lead_ms)) {
    throw ParameterError("lead_ms must be >= 0");
  }
  if (!(release_tau_ms > 0)) throw ParameterError("release_tau_ms must be > 0");
  if (!(noise_std >= 0)) throw ParameterError("noise_std must be >= 0");
  if (period_samples() < 2) throw ParameterError("f_op too high for fs");
  valve.validate();
  fault.validate();
  adc.validate();
}

std::size_t ScenarioConfig::period_samples() const {
  return static_cast<std::size_t>(std::lround(fs / f_op));
}

std::size_t ScenarioConfig::lead_samples() const {
  return static_cast<std::size_t>(std::lround(lead_ms * fs / 1000.0));
}

namespace {

struct Generator {
  ScenarioConfig cfg;
  std::size_t period;
  std::size_t lead;
  std::size_t energized;
  std::uint64_t total;
  std::uint64_t n = 0;
  std::mt19937_64 rng;
  std::normal_distribution<double> noise{0.0, 1.0};
  EffectiveShape shape{};
  double release_level = 0.0;
  std::uint64_t shape_for = UINT64_MAX;

  std::optional<RawCode> next() {
    if (n >= total) return std::nullopt;
    double current = cfg.valve.idle_current;
    if (n >= lead) {
      const std::uint64_t k = (n - lead) / period;
      const std::uint64_t m = (n - lead) % period;
      if (k != shape_for) {
        ValveParams p = cfg.valve;
        const std::uint64_t cycle = cfg.start.cycle + k * cfg.cycle_stride;
        if (cfg.thermal_stress) {
          p.temperature = thermal_stress_temperature(p.temperature, cycle);
        }
        shape = effective_shape(p, cfg.fault, {cycle, cfg.start.failure_cycle});
        release_level = ideal_current(
            shape, static_cast<double>(energized) * 1000.0 / cfg.fs);
        shape_for = k;
      }
      const double t_ms = static_cast<double>(m) * 1000.0 / cfg.fs;
      if (m < energized) {
        current = ideal_current(shape, t_ms);
      } else {
        const double since =
            static_cast<double>(m - energized) * 1000.0 / cfg.fs;
        current = cfg.valve.idle_current +
                  (release_level - cfg.valve.idle_current) *
                      std::exp(-since / cfg.release_tau_ms);
      }
    }
    if (cfg.noise_std > 0) current += cfg.noise_std * noise(rng);
    ++n;
    return adc_quantize(current_to_voltage(current, cfg.adc.gain), cfg.adc);
  }
};

}  // namespace

Scenario make_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  auto gen = std::make_shared<Generator>();
  gen->cfg = cfg;
  gen->period = cfg.period_samples();
  gen->lead = cfg.lead_samples();
  gen->energized = static_cast<std::size_t>(
      std::lround(cfg.duty * static_cast<double>(gen->period)));
  gen->total = gen->lead + cfg.actuations * gen->period;
  gen->rng.seed(cfg.seed);

  Scenario s;
  s.total_samples = gen->total;
  for (std::size_t k = 0; k < cfg.actuations; ++k) {
    s.triggers.push_back(gen->lead + k * gen->period);
    s.cycles.push_back(cfg.start.cycle + k * cfg.cycle_stride);
  }
  s.source = [gen]() { return gen->next(); };
  return s;
}

ScenarioConfig degradation_scenario(std::uint64_t failure_cycle,
                                    std::uint64_t stride, std::uint64_t seed) {
  if (stride == 0) throw ParameterError("stride must be >= 1");
  ScenarioConfig cfg;
  cfg.seed = seed;
  cfg.start = {0, failure_cycle};
  cfg.cycle_stride = stride;
  cfg.actuations = static_cast<std::size_t>(failure_cycle / stride);
  return cfg;
}

Scenario flat_scenario(std::uint64_t samples, const AdcConfig& adc) {
  adc.validate();
  const RawCode idle = adc_quantize(0.0, adc);
  auto left = std::make_shared<std::uint64_t>(samples);
  Scenario s;
  s.total_samples = samples;
  s.source = [left, idle]() -> std::optional<RawCode> {
    if (*left == 0) return std::nullopt;
    --*left;
    return idle;
  };
  return s;
}

SampleSource trace_source(const TransientTrace& trace, const AdcConfig& adc) {
  adc.validate();
  std::vector<RawCode> codes;
  codes.reserve(trace.samples.size());
  for (double i : trace.samples) {
    codes.push_back(adc_quantize(current_to_voltage(i, adc.gain), adc));
  }
  return vector_source(std::move(codes));
}

}  // namespace prema
