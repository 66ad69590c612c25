#pragma once

#include <string>
#include <vector>

#include "evball/detect/detector.hpp"

namespace evball::evalh {

/// Per-stage wall-clock breakdown over a batch of windows, grouped the way
/// the pipeline stages nest: ego-motion compensation (warp + timestamp
/// image), thresholding + median filtering, clustering + selection.
struct LatencyReport {
  struct StageRow {
    std::string name;
    double mean_ms = 0.0;
    double sigma_ms = 0.0;
    double share_pct = 0.0;
  };
  std::vector<StageRow> stages;
  double total_mean_ms = 0.0;
  double total_sigma_ms = 0.0;
  double crop_mean_ms = 0.0;  // reported separately, not part of the shares
  double mean_events = 0.0;   // events entering the pipeline per window
  std::size_t n_windows = 0;
};

/// Aggregates stage timings from at least 100 processed windows.
LatencyReport bench_latency(const std::vector<detect::DetectionResult>& results);

void write_latency_report_csv(const std::string& path,
                              const LatencyReport& report);

/// Table-style with/without-ROI comparison over byte-identical inputs.
struct RoiComparison {
  LatencyReport with_roi;
  LatencyReport without_roi;
};
void write_roi_comparison_csv(const std::string& path, const RoiComparison& cmp);

}  // namespace evball::evalh
