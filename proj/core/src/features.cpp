#include "prema/features.hpp"

#include <cmath>

#include "prema/errors.hpp"

namespace prema {
namespace {

std::size_t scale_count(std::size_t count, double factor) {
  const double scaled = std::round(static_cast<double>(count) * factor);
  return scaled < 1.0 ? 1 : static_cast<std::size_t>(scaled);
}

double window_mean(std::span<const double> samples, std::size_t begin,
                   std::size_t length) {
  double sum = 0.0;
  for (std::size_t k = begin; k < begin + length; ++k) sum += samples[k];
  return sum / static_cast<double>(length);
}

}  // namespace

void ExtractionConfig::validate() const {
  if (window < 1) throw ParameterError("window must be >= 1");
  if (lower_window < 1) throw ParameterError("lower_window must be >= 1");
  if (upper_window_end <= upper_window_start) {
    throw ParameterError("upper_window_end must exceed upper_window_start");
  }
  if (frame < upper_window_end) {
    throw ParameterError("frame must cover the upper averaging window");
  }
  if (auc_window < 1 || auc_window >= frame) {
    throw ParameterError("auc_window must lie in [1, frame)");
  }
  if (!std::isfinite(edge_threshold) || !std::isfinite(idle_max)) {
    throw ParameterError("thresholds must be finite");
  }
}

ExtractionConfig ExtractionConfig::scaled_to_rate(double sample_rate) const {
  if (!(sample_rate > 0) || !std::isfinite(sample_rate)) {
    throw ParameterError("sample_rate must be > 0");
  }
  const double f = sample_rate / 1000.0;
  ExtractionConfig c = *this;
  c.window = scale_count(window, f);
  c.lower_window = scale_count(lower_window, f);
  c.upper_window_start = scale_count(upper_window_start, f);
  c.upper_window_end = scale_count(upper_window_end, f);
  c.frame = scale_count(frame, f);
  c.skip_after_event = scale_count(skip_after_event, f);
  c.auc_window = scale_count(auc_window, f);
  return c;
}

EdgeScan scan_rising_edges(std::span<const double> samples,
                           const ExtractionConfig& cfg, std::size_t start) {
  cfg.validate();
  EdgeScan scan;
  const std::size_t n = samples.size();
  const std::size_t w = cfg.window;
  std::size_t i = std::max(start, w);
  bool have_tail = false;

  while (i + 1 <= n) {  // i <= n - 1 without underflow
    const std::size_t z = i - w;
    // The idle test is cheap and rejects nearly every sample of an
    // energized valve, so the mean is only formed for candidates.
    if (samples[z] <= cfg.idle_max &&
        window_mean(samples, z, w) >= cfg.edge_threshold) {
      if (z < cfg.lower_window) {
        scan.truncated_head.push_back(z);
      } else if (z + cfg.frame > n) {
        if (!have_tail) {
          scan.resume_at = i;
          have_tail = true;
        }
        scan.truncated_tail.push_back(z);
      } else {
        scan.edges.push_back(z);
      }
      i += cfg.skip_after_event;
    }
    ++i;
  }
  if (!have_tail) scan.resume_at = i;
  return scan;
}

std::vector<std::size_t> detect_rising_edges(std::span<const double> samples,
                                             const ExtractionConfig& cfg) {
  return scan_rising_edges(samples, cfg).edges;
}

TransientFeatures extract_features(std::span<const double> samples,
                                   std::size_t zero_index,
                                   const ExtractionConfig& cfg,
                                   double sample_rate) {
  cfg.validate();
  if (!(sample_rate > 0)) throw ParameterError("sample_rate must be > 0");
  const std::size_t z = zero_index;
  if (z < cfg.lower_window) {
    throw RangeError("zero_index has fewer than lower_window samples before it");
  }
  if (z + cfg.frame > samples.size()) {
    throw RangeError("zero_index leaves fewer than frame samples after it");
  }
  const double ms_per_sample = 1000.0 / sample_rate;

  TransientFeatures f;
  f.zero_index = z;
  f.ecv_lower_avg = window_mean(samples, z - cfg.lower_window, cfg.lower_window);
  f.ecv_upper_avg = window_mean(samples, z + cfg.upper_window_start,
                                cfg.upper_window_end - cfg.upper_window_start);
  f.delta_ecv = f.ecv_upper_avg - f.ecv_lower_avg;
  if (!(f.delta_ecv > 0)) {
    throw NoActuationError("no rise between lower and upper ECV averages");
  }
  f.ecv10 = f.delta_ecv * 0.1 + f.ecv_lower_avg;
  f.ecv90 = f.delta_ecv * 0.9 + f.ecv_lower_avg;

  const std::size_t frame_end = z + cfg.frame;
  std::size_t j = z;
  while (j < frame_end && samples[j] < f.ecv10) ++j;
  if (j == frame_end) {
    throw NoActuationError("current never reached the 10% level in the frame");
  }

  // Last sample at or below the 90% level, scanning back from the frame end.
  std::size_t k = frame_end;
  while (k > j && samples[k - 1] > f.ecv90) --k;
  if (k == j) {
    throw DegenerateTransientError(
        "current jumped past the 90% level within one sample");
  }
  const std::size_t tl = j - z;
  const std::size_t tu = k - z;  // (k - 1) + 1 - z

  f.tl = static_cast<double>(tl) * ms_per_sample;
  f.tu = static_cast<double>(tu) * ms_per_sample;
  f.di_dt = (f.ecv90 - f.ecv10) / (f.tu - f.tl);

  const std::size_t a = cfg.auc_window;
  double interior = 0.0;
  for (std::size_t m = z + 1; m < z + a; ++m) interior += samples[m];
  f.auc = ((samples[z] + samples[z + a]) / 2.0 + interior) /
          static_cast<double>(a);
  return f;
}

const char* to_string(EdgeIssue issue) {
  switch (issue) {
    case EdgeIssue::kTruncatedHead:
      return "truncated_head";
    case EdgeIssue::kTruncatedTail:
      return "truncated_tail";
    case EdgeIssue::kNoActuation:
      return "no_actuation";
    case EdgeIssue::kDegenerate:
      return "degenerate_transient";
  }
  return "unknown";
}

ExtractionResult extract_all(const TransientTrace& trace,
                             const ExtractionConfig& cfg) {
  ExtractionResult result;
  const ExtractionConfig scaled = cfg.scaled_to_rate(trace.sample_rate);
  scaled.validate();
  const std::span<const double> samples(trace.samples);
  const EdgeScan scan = scan_rising_edges(samples, scaled);

  for (std::size_t z : scan.truncated_head) {
    result.diagnostics.push_back({z, EdgeIssue::kTruncatedHead,
                                  "not enough history before the edge"});
  }
  for (std::size_t z : scan.edges) {
    try {
      result.features.push_back(
          {z, extract_features(samples, z, scaled, trace.sample_rate)});
    } catch (const NoActuationError& e) {
      result.diagnostics.push_back({z, EdgeIssue::kNoActuation, e.what()});
    } catch (const DegenerateTransientError& e) {
      result.diagnostics.push_back({z, EdgeIssue::kDegenerate, e.what()});
    }
  }
  for (std::size_t z : scan.truncated_tail) {
    result.diagnostics.push_back({z, EdgeIssue::kTruncatedTail,
                                  "frame runs past the end of the trace"});
  }
  return result;
}

}  // namespace prema
