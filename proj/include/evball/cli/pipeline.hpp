#pragma once

#include <functional>
#include <string>
#include <vector>

#include "evball/core/config.hpp"
#include "evball/detect/detector.hpp"
#include "evball/evalh/latency.hpp"

namespace evball::cli {

inline constexpr const char* kToolVersion = "1.0.0";

struct PipelineOptions {
  std::string out_dir = "out";
  int threads = 1;
  // Per-stage input overrides; empty means the out_dir default.
  std::string events_path;
  std::string gaze_path;
  std::string imu_path;
  std::string measurements_path;
  std::string poses_path;
  std::string audio_path;
  double reference_peak = -1.0;
};

// Stage entry points. Every stage reads its inputs from files (overrides
// or the out_dir defaults) and writes its artifacts into out_dir, so
// subcommands and composed runs behave identically.
void stage_simulate(const core::Config& cfg, const PipelineOptions& opt);
std::vector<detect::DetectionResult> stage_detect(const core::Config& cfg,
                                                  const PipelineOptions& opt);
void stage_measure(const core::Config& cfg, const PipelineOptions& opt);
void stage_predict(const core::Config& cfg, const PipelineOptions& opt);
void stage_eval(const core::Config& cfg, const PipelineOptions& opt);
void stage_bench(const core::Config& cfg, const PipelineOptions& opt);
void stage_segment(const core::Config& cfg, const PipelineOptions& opt);
void stage_report(const core::Config& cfg, const PipelineOptions& opt);

/// Executes the requested stages in dependency order and writes the run
/// manifest. An empty stage list writes the manifest only. Unknown stage
/// names raise UsageError before anything runs.
void run_pipeline(const core::Config& cfg, std::vector<std::string> stages,
                  const PipelineOptions& opt);

/// Simple chunked parallel loop; threads <= 1 runs inline.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace evball::cli
