#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "prema/acquisition.hpp"
#include "prema/fault_class.hpp"
#include "prema/features.hpp"
#include "prema/models.hpp"
#include "prema/tinynn.hpp"

namespace prema {

struct MonitorConfig {
  std::size_t k = 10000;
  double fs = 1000.0;
  double f_op = 0.5;
  double rul_alarm_threshold = 100.0;  // cycles
  double fault_alarm_threshold = 0.5;  // probability
  ClockMode clock = ClockMode::kVirtual;
  AdcConfig adc{};
  ExtractionConfig extraction{};

  void validate() const;
};

struct MonitorEvent {
  std::uint64_t buffer_seq = 0;
  std::uint64_t zero_index = 0;  // global sample index
  std::array<double, kNumFaultClasses> fault_probs{};
  FaultClass predicted_class = FaultClass::kGood;
  double rul = 0.0;        // cycles
  bool alarm = false;
  double it_pc = 0.0;      // s spent on this actuation
  double timestamp = 0.0;  // s since start, logical in virtual mode

  friend bool operator==(const MonitorEvent&, const MonitorEvent&) = default;
};

// Something the monitor could not turn into an event.
struct MonitorDiagnostic {
  std::uint64_t buffer_seq = 0;
  std::optional<std::uint64_t> zero_index;
  std::string issue;  // EdgeIssue name or "bank_overwritten"
  std::string message;
  double timestamp = 0.0;

  friend bool operator==(const MonitorDiagnostic&,
                         const MonitorDiagnostic&) = default;
};

// (max non-Good probability >= fault threshold) or (rul < rul threshold).
bool alarm_predicate(const std::array<double, kNumFaultClasses>& probs,
                     double rul, const MonitorConfig& cfg);

struct MonitorSinks {
  std::function<void(const MonitorEvent&)> on_event;
  std::function<void(const MonitorDiagnostic&)> on_diagnostic;
};

struct MonitorResult {
  std::vector<MonitorEvent> events;
  std::vector<MonitorDiagnostic> diagnostics;
  TimingReport timing;
};

// In virtual mode each bank costs one nanosecond per "step": one step per
// scanned sample, lower_window + frame steps per extracted edge, and one per
// model parameter per inference.
inline constexpr double kVirtualStepSeconds = 1e-9;

// Source -> ping-pong acquisition -> edge scan and features -> fault and RUL
// inference -> events. Samples at the end of each bank are carried into the
// next analysis window so that actuations split across banks are still
// reported once. Sinks are called from the consumer context, in order.
MonitorResult run_monitor(const SampleSource& source,
                          const Predictor& fault_model,
                          const Predictor& rul_model,
                          const MonitorConfig& cfg,
                          const MonitorSinks& sinks = {},
                          std::size_t fault_params = 0,
                          std::size_t rul_params = 0);

// Throws ParameterError unless the models are a classifier with 4 outputs
// and a regressor with 1 output, both taking 2 inputs.
MonitorResult run_monitor(const SampleSource& source,
                          const nn::Mlp& fault_model, const nn::Mlp& rul_model,
                          const MonitorConfig& cfg,
                          const MonitorSinks& sinks = {});

struct BufferConfiguration {
  std::size_t k;
  double f_op;
};

// Buffer sizes and operating frequencies characterised on the reference
// hardware, all at fs = 1 kHz.
inline constexpr std::array<BufferConfiguration, 11> kReferenceConfigurations =
    {{{1000, 2.0},
      {1000, 1.0},
      {2000, 2.0},
      {2000, 1.0},
      {2000, 0.5},
      {5000, 2.0},
      {5000, 1.0},
      {5000, 0.5},
      {10000, 2.0},
      {10000, 1.0},
      {10000, 0.5}}};

// TimingReport for a finished run from per-bank measurements.
TimingReport timing_report(const MonitorConfig& cfg,
                           const std::vector<BankWork>& measurements,
                           std::uint64_t overruns, std::uint64_t samples);

}  // namespace prema
