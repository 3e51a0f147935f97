#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "prema/waveform.hpp"

namespace prema {

// Window sizes are sample counts at 1 kHz (1 sample = 1 ms). Use
// scaled_to_rate() for traces sampled at another rate.
struct ExtractionConfig {
  std::size_t window = 5;            // moving-average length
  double edge_threshold = 8.0;       // mA, window mean that flags a rise
  double idle_max = 5.0;             // mA, first window sample must be below
  std::size_t lower_window = 50;     // history averaged for ECV_Lower_Avg
  std::size_t upper_window_start = 30;
  std::size_t upper_window_end = 50;
  std::size_t frame = 100;           // region of interest after zero_index
  std::size_t skip_after_event = 30;
  std::size_t auc_window = 30;       // trapezoid span for AUC

  void validate() const;

  // Every sample-count field multiplied by rate / 1000, rounded to the
  // nearest integer and kept >= 1.
  ExtractionConfig scaled_to_rate(double sample_rate) const;

  // Samples a streaming consumer must keep from the previous buffer so that
  // an edge cut off by the buffer end can be re-analysed.
  std::size_t carry_length() const { return lower_window + frame; }
};

struct TransientFeatures {
  std::size_t zero_index = 0;
  double ecv_lower_avg = 0;  // mA
  double ecv_upper_avg = 0;  // mA
  double delta_ecv = 0;      // mA
  double ecv10 = 0;          // mA
  double ecv90 = 0;          // mA
  double tl = 0;             // ms after zero_index
  double tu = 0;             // ms after zero_index
  double di_dt = 0;          // mA/ms
  double auc = 0;            // mA (trapezoid area normalised by its span)
};

// The two model inputs.
struct FeatureVector {
  double di_dt = 0;
  double auc = 0;
};

inline FeatureVector to_feature_vector(const TransientFeatures& f) {
  return {f.di_dt, f.auc};
}

// Result of one pass of the rising-edge scan.
struct EdgeScan {
  std::vector<std::size_t> edges;           // usable zero indices
  std::vector<std::size_t> truncated_head;  // fewer than lower_window before
  std::vector<std::size_t> truncated_tail;  // fewer than frame after
  // Scan position (the `i` of the moving-average loop) to resume from when
  // more samples are appended. Points back at the first tail-truncated edge
  // so that it is found again once its frame is complete.
  std::size_t resume_at = 0;
};

// Moving-average rising-edge scan. For each i in [start, n - 1], flags
// zero_index = i - window when the mean of samples[i - window, i) reaches
// edge_threshold and samples[i - window] <= idle_max, then skips
// skip_after_event + 1 positions. `start` defaults to cfg.window.
EdgeScan scan_rising_edges(std::span<const double> samples,
                           const ExtractionConfig& cfg, std::size_t start = 0);

// Usable edges only.
std::vector<std::size_t> detect_rising_edges(std::span<const double> samples,
                                             const ExtractionConfig& cfg);

// Transient features for the actuation starting at zero_index. Requires
// zero_index >= lower_window and zero_index + frame <= samples.size().
// Throws NoActuationError when nothing rises (delta_ecv <= 0 or no 10%
// crossing inside the frame) and DegenerateTransientError when the 90% level
// is never undercut after the 10% crossing (Tu <= Tl).
TransientFeatures extract_features(std::span<const double> samples,
                                   std::size_t zero_index,
                                   const ExtractionConfig& cfg,
                                   double sample_rate = 1000.0);

struct EdgeFeatures {
  std::size_t zero_index;
  TransientFeatures features;
};

enum class EdgeIssue {
  kTruncatedHead,
  kTruncatedTail,
  kNoActuation,
  kDegenerate,
};

const char* to_string(EdgeIssue issue);

struct EdgeDiagnostic {
  std::size_t zero_index;
  EdgeIssue issue;
  std::string message;
};

struct ExtractionResult {
  std::vector<EdgeFeatures> features;
  std::vector<EdgeDiagnostic> diagnostics;
};

// Edge scan plus extraction over a whole trace. Window sizes in `cfg` are
// rescaled to the trace's sample rate. Per-edge failures end up in
// `diagnostics`; the call itself only fails on an invalid config.
ExtractionResult extract_all(const TransientTrace& trace,
                             const ExtractionConfig& cfg);

}  // namespace prema
