#pragma once

#include <string>
#include <vector>

#include "evball/core/camera.hpp"
#include "evball/core/types.hpp"
#include "evball/detect/detector.hpp"
#include "evball/synth/scene.hpp"

namespace evball::evalh {

using core::Vec2;
using core::Vec3;

/// Detection success-rate protocol: a window counts as a success when the
/// detected center is within epsilon pixels of the reprojected ground
/// truth (strict inequality).
struct DetectionEval {
  struct WindowResult {
    std::int64_t t_start_us = 0;
    bool evaluated = false;  // ball reprojectable at this window
    bool found = false;
    double error_px = 0.0;
    bool success = false;
  };
  std::vector<WindowResult> windows;
  double epsilon = 5.0;
  std::size_t n_evaluated = 0;
  std::size_t n_success = 0;
  double rate = 0.0;  // successes / evaluated
  double mean_ball_events = 0.0;  // over found windows

  void finalize();
};

/// Reprojects the ground-truth ball (cubic interpolation at the window
/// midpoint, camera pose at the window start to match the compensated
/// frame) and scores each detection.
DetectionEval eval_detection(const std::vector<detect::DetectionResult>& dets,
                             const synth::GroundTruth& gt,
                             const synth::SceneConfig& scene, double epsilon);

/// Planar (x, y) impact error on the table plane, aggregated to RMSE and
/// the standard deviation of the per-trajectory error norms.
struct ImpactEval {
  std::vector<double> errors;
  std::vector<Vec2> scatter;  // (dx, dy) per trajectory
  double rmse = 0.0;
  double sigma = 0.0;
};

ImpactEval eval_impact(const std::vector<Vec3>& predicted,
                       const std::vector<Vec3>& ground_truth);

void write_detection_report_csv(const std::string& path,
                                const DetectionEval& eval);
void write_impact_scatter_csv(const std::string& path, const ImpactEval& eval);

/// One row of a Table-5/6 style RMSE report.
struct ImpactReportRow {
  std::string method;
  std::string update_hz;
  std::string cell;  // e.g. "Tpred=33ms" or "horizon=0.2s"
  double rmse = 0.0;
  double sigma = 0.0;
  std::size_t n = 0;
};
void write_impact_report_csv(const std::string& path,
                             const std::vector<ImpactReportRow>& rows);

}  // namespace evball::evalh
