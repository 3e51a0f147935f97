#include "prema/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "prema/errors.hpp"

namespace prema {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

// Consumer-side state that survives from one bank to the next.
class Analyzer {
 public:
  Analyzer(const Predictor& fault_model, const Predictor& rul_model,
           const MonitorConfig& cfg, const MonitorSinks& sinks,
           std::size_t fault_params, std::size_t rul_params,
           MonitorResult& out)
      : fault_model_(fault_model),
        rul_model_(rul_model),
        cfg_(cfg),
        scaled_(cfg.extraction.scaled_to_rate(cfg.fs)),
        sinks_(sinks),
        inference_steps_(fault_params + rul_params),
        out_(out) {
    scaled_.validate();
    next_scan_ = scaled_.window;
  }

  BankWork process(const FullBank& bank, double start_time) {
    const auto wall_begin = Clock::now();
    const std::vector<RawCode> codes = bank.snapshot();
    seq_ = bank.sequence();
    if (bank.stale()) {
      diagnose({seq_, std::nullopt, "bank_overwritten",
                "producer overran this bank while it was being read",
                start_time});
    }
    if (bank.first_sample() != buf_start_ + buf_.size()) {
      // A gap means samples were lost upstream; restart the analysis window.
      buf_.clear();
      buf_start_ = bank.first_sample();
      next_scan_ = buf_start_ + scaled_.window;
    }
    for (RawCode c : codes) buf_.push_back(raw_to_current(c, cfg_.adc));

    std::uint64_t steps = codes.size();
    std::uint64_t cycle_steps = 0;
    double wall_cycle = 0.0;
    std::size_t cycles = 0;
    auto now = [&] {
      if (cfg_.clock == ClockMode::kVirtual) {
        return start_time + static_cast<double>(steps) * kVirtualStepSeconds;
      }
      return start_time + seconds_between(wall_begin, Clock::now());
    };

    const std::span<const double> samples(buf_);
    const std::size_t local_start =
        next_scan_ > buf_start_ ? static_cast<std::size_t>(next_scan_ - buf_start_)
                                : 0;
    const EdgeScan scan = scan_rising_edges(samples, scaled_, local_start);

    for (std::size_t z : scan.truncated_head) {
      diagnose({seq_, buf_start_ + z, to_string(EdgeIssue::kTruncatedHead),
                "not enough history before the edge", now()});
    }
    for (std::size_t z : scan.edges) {
      const std::uint64_t global = buf_start_ + z;
      if (last_emitted_ && global <= *last_emitted_) continue;
      last_emitted_ = global;

      const auto edge_begin = Clock::now();
      const std::uint64_t edge_steps =
          scaled_.lower_window + scaled_.frame + inference_steps_;
      TransientFeatures f;
      try {
        f = extract_features(samples, z, scaled_, cfg_.fs);
      } catch (const NoActuationError& e) {
        steps += scaled_.lower_window + scaled_.frame;
        diagnose({seq_, global, to_string(EdgeIssue::kNoActuation), e.what(),
                  now()});
        continue;
      } catch (const DegenerateTransientError& e) {
        steps += scaled_.lower_window + scaled_.frame;
        diagnose({seq_, global, to_string(EdgeIssue::kDegenerate), e.what(),
                  now()});
        continue;
      }
      const std::vector<double> x = {f.di_dt, f.auc};
      const std::vector<double> probs = fault_model_(x);
      const std::vector<double> rul = rul_model_(x);
      if (probs.size() != kNumFaultClasses || rul.size() != 1) {
        throw ShapeError("monitor models returned the wrong output size");
      }
      const double edge_wall = seconds_between(edge_begin, Clock::now());
      steps += edge_steps;
      cycle_steps += edge_steps;
      wall_cycle += edge_wall;
      ++cycles;

      MonitorEvent ev;
      ev.buffer_seq = seq_;
      ev.zero_index = global;
      std::copy(probs.begin(), probs.end(), ev.fault_probs.begin());
      ev.predicted_class = static_cast<FaultClass>(
          std::max_element(probs.begin(), probs.end()) - probs.begin());
      ev.rul = rul[0];
      ev.alarm = alarm_predicate(ev.fault_probs, ev.rul, cfg_);
      ev.it_pc = cfg_.clock == ClockMode::kVirtual
                     ? static_cast<double>(edge_steps) * kVirtualStepSeconds
                     : edge_wall;
      ev.timestamp = now();
      out_.events.push_back(ev);
      if (sinks_.on_event) sinks_.on_event(ev);
    }

    pending_tail_.clear();
    for (std::size_t z : scan.truncated_tail) {
      pending_tail_.push_back(buf_start_ + z);
    }
    next_scan_ = buf_start_ + scan.resume_at;

    const std::size_t carry = scaled_.carry_length();
    if (buf_.size() > carry) {
      const std::size_t drop = buf_.size() - carry;
      buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(drop));
      buf_start_ += drop;
    }

    BankWork w;
    w.cycles = cycles;
    w.seconds = static_cast<double>(steps) * kVirtualStepSeconds;
    w.cycle_seconds = static_cast<double>(cycle_steps) * kVirtualStepSeconds;
    w.wall_cycle_seconds = wall_cycle;
    return w;
  }

  // Edges still waiting for their frame when the stream ended.
  void finish(double time) {
    for (std::uint64_t z : pending_tail_) {
      if (last_emitted_ && z <= *last_emitted_) continue;
      diagnose({seq_, z, to_string(EdgeIssue::kTruncatedTail),
                "stream ended before the frame was complete", time});
    }
    pending_tail_.clear();
  }

 private:
  void diagnose(MonitorDiagnostic d) {
    out_.diagnostics.push_back(d);
    if (sinks_.on_diagnostic) sinks_.on_diagnostic(d);
  }

  const Predictor& fault_model_;
  const Predictor& rul_model_;
  const MonitorConfig& cfg_;
  ExtractionConfig scaled_;
  const MonitorSinks& sinks_;
  std::uint64_t inference_steps_;
  MonitorResult& out_;

  std::vector<double> buf_;
  std::uint64_t buf_start_ = 0;
  std::uint64_t next_scan_ = 0;
  std::optional<std::uint64_t> last_emitted_;
  std::vector<std::uint64_t> pending_tail_;
  std::uint64_t seq_ = 0;
};

}  // namespace

void MonitorConfig::validate() const {
  buffer_fill_duration(k, fs);
  if (!(f_op > 0) || !std::isfinite(f_op)) {
    throw ParameterError("f_op must be > 0");
  }
  if (!(rul_alarm_threshold > 0) || !std::isfinite(rul_alarm_threshold)) {
    throw ParameterError("rul_alarm_threshold must be > 0");
  }
  if (!(fault_alarm_threshold > 0) || !std::isfinite(fault_alarm_threshold)) {
    throw ParameterError("fault_alarm_threshold must be > 0");
  }
  adc.validate();
  extraction.validate();
}

bool alarm_predicate(const std::array<double, kNumFaultClasses>& probs,
                     double rul, const MonitorConfig& cfg) {
  double worst = 0.0;
  for (FaultClass c : kAllFaultClasses) {
    if (c != FaultClass::kGood) worst = std::max(worst, probs[index_of(c)]);
  }
  return worst >= cfg.fault_alarm_threshold || rul < cfg.rul_alarm_threshold;
}

MonitorResult run_monitor(const SampleSource& source,
                          const Predictor& fault_model,
                          const Predictor& rul_model, const MonitorConfig& cfg,
                          const MonitorSinks& sinks, std::size_t fault_params,
                          std::size_t rul_params) {
  cfg.validate();
  MonitorResult result;
  Analyzer analyzer(fault_model, rul_model, cfg, sinks, fault_params,
                    rul_params, result);

  AcquisitionConfig acq;
  acq.k = cfg.k;
  acq.fs = cfg.fs;
  acq.f_op = cfg.f_op;
  acq.clock = cfg.clock;
  double last_time = 0.0;
  result.timing = run_acquisition(
      source, acq, [&](const FullBank& bank, double start) {
        BankWork w = analyzer.process(bank, start);
        last_time = start + w.seconds;
        return w;
      });
  analyzer.finish(last_time);
  return result;
}

MonitorResult run_monitor(const SampleSource& source,
                          const nn::Mlp& fault_model, const nn::Mlp& rul_model,
                          const MonitorConfig& cfg, const MonitorSinks& sinks) {
  fault_model.validate();
  rul_model.validate();
  if (fault_model.kind != nn::ModelKind::kClassifier ||
      fault_model.input_dim() != 2 ||
      fault_model.output_dim() != kNumFaultClasses) {
    throw ParameterError("fault model must be a 2-input, 4-class classifier");
  }
  if (rul_model.kind != nn::ModelKind::kRegressor ||
      rul_model.input_dim() != 2 || rul_model.output_dim() != 1) {
    throw ParameterError("RUL model must be a 2-input, 1-output regressor");
  }
  const Predictor fault = [&](std::span<const double> x) {
    return nn::infer(fault_model, x);
  };
  const Predictor rul = [&](std::span<const double> x) {
    return nn::infer(rul_model, x);
  };
  return run_monitor(source, fault, rul, cfg, sinks,
                     fault_model.parameter_count(), rul_model.parameter_count());
}

TimingReport timing_report(const MonitorConfig& cfg,
                           const std::vector<BankWork>& measurements,
                           std::uint64_t overruns, std::uint64_t samples) {
  cfg.validate();
  return summarize_timing(cfg.k, cfg.fs, cfg.f_op, measurements, overruns,
                          samples);
}

}  // namespace prema
