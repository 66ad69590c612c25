#pragma once

#include <optional>
#include <string>
#include <vector>

#include "evball/core/camera.hpp"
#include "evball/core/config.hpp"
#include "evball/core/types.hpp"

namespace evball::detect {

using core::CameraModel;
using core::Event;
using core::EventWindow;
using core::GazePoint;
using core::Vec2;
using core::Vec3;

struct DetectionParams {
  double window_dt = 0.005;  // s
  int roi_w = 80;            // px, fovea side length
  bool use_roi = true;
  double theta0 = 0.5;
  double theta1 = 0.8;  // s/rad
  int median_kernel = 3;
  double dbscan_eps = 0.018;
  int dbscan_min_pts = 5;
  double perim_min = 0.0, perim_max = 0.0;  // px
  double area_min = 0.0, area_max = 0.0;    // px^2
  bool time_norm_window = false;  // min-max over window bounds vs observed

  /// Fills the perimeter/area gates from the projected size of the ball
  /// over [depth_min, depth_max] under the given intrinsics.
  static DetectionParams from_config(const core::Config& cfg,
                                     const CameraModel& cam,
                                     const core::PhysicsParams& physics);
};

/// Per-pixel mean relative timestamp of motion-compensated events over a
/// sub-rectangle of the sensor, plus its max-normalized form rho in [0,1].
struct TimestampImage {
  int x0 = 0, y0 = 0;
  int width = 0, height = 0;
  std::vector<double> mean_dt;  // s, valid where count > 0
  std::vector<int> count;
  std::vector<double> rho;  // in [0,1]
  double max_mean = 0.0;

  bool in_range(int x, int y) const {
    return x >= x0 && x < x0 + width && y >= y0 && y < y0 + height;
  }
  std::size_t idx(int x, int y) const {
    return static_cast<std::size_t>(y - y0) * width + (x - x0);
  }
};

/// Thresholded binary map over the same extent as its TimestampImage.
struct BinaryMap {
  int x0 = 0, y0 = 0;
  int width = 0, height = 0;
  std::vector<std::uint8_t> on;

  bool in_range(int x, int y) const {
    return x >= x0 && x < x0 + width && y >= y0 && y < y0 + height;
  }
  bool at(int x, int y) const {
    return in_range(x, y) &&
           on[static_cast<std::size_t>(y - y0) * width + (x - x0)] != 0;
  }
  std::size_t count_on() const;
};

/// Events warped to the window start by the mean-gyro small-angle model.
/// Coordinates stay floating point; indices refer back to the source window.
struct CompensatedEvents {
  std::vector<Vec2> coords;
  std::vector<std::int64_t> t_us;
  Vec3 omega_mean = Vec3::Zero();
  std::int64_t t0_us = 0;
  std::int64_t t_end_us = 0;
};

struct Cluster {
  std::vector<std::size_t> event_idx;  // indices into the cropped window
  std::vector<Vec2> points;            // compensated 2D coords (time collapsed)
  std::vector<Vec2> hull;
  double perimeter = 0.0;
  double area = 0.0;
  double gamma = 0.0;
};

struct ClusterReport {
  std::vector<Cluster> clusters;
  std::optional<std::size_t> selected;
};

struct StageTimings {
  double crop_us = 0.0;
  double compensate_us = 0.0;
  double image_us = 0.0;
  double threshold_us = 0.0;
  double cluster_us = 0.0;
  double select_us = 0.0;
  double total_us() const {
    return crop_us + compensate_us + image_us + threshold_us + cluster_us +
           select_us;
  }
};

struct DetectionResult {
  bool found = false;
  std::string reason = "ok";  // failure modes keep a machine-readable tag
  Vec2 center = Vec2::Zero();  // compensated-frame centroid of the ball
  double gamma = 0.0;
  std::vector<Event> ball_events;  // original events of the selected cluster
  ClusterReport report;
  StageTimings timings;
  Vec3 omega_mean = Vec3::Zero();
  std::size_t n_input_events = 0;
  std::size_t n_roi_events = 0;
  std::size_t n_dynamic_events = 0;
  std::int64_t t_start_us = 0;
  std::int64_t t_end_us = 0;
};

/// Keeps only events inside the w x w box centered at the gaze point
/// (half-open so the box covers exactly w pixels), clamped to the sensor.
EventWindow crop_roi(const EventWindow& win, const GazePoint& gaze,
                     const DetectionParams& params, const CameraModel& cam);

/// Warps every event to the window start with the mean angular rate of the
/// gyro samples overlapping the window. Throws DataError when no gyro
/// sample overlaps.
CompensatedEvents motion_compensate(const EventWindow& win,
                                    const std::vector<core::AngularRate>& imu,
                                    const CameraModel& cam);

/// Mean relative-timestamp image over nearest-integer bins of the
/// compensated coordinates (off-sensor bins are dropped). The image covers
/// the attended region when one is given (the clamped ROI box, or the full
/// sensor without cropping); with no region it shrinks to the occupied
/// bounding box. Throws DataError on empty input.
struct PixelRegion {
  int x0 = 0, y0 = 0, width = 0, height = 0;
};
TimestampImage build_timestamp_image(const CompensatedEvents& comp,
                                     const CameraModel& cam,
                                     const PixelRegion* region = nullptr);

/// Indices of events whose compensated pixel is dynamic under the map.
std::vector<std::size_t> select_dynamic_events(const CompensatedEvents& comp,
                                               const BinaryMap& map);

/// B(x) = 1 iff rho(x) > theta0 + theta1*|omega|, followed by a square
/// binary median filter.
BinaryMap threshold_dynamic(const TimestampImage& img, const Vec3& omega_mean,
                            const DetectionParams& params);

/// DBSCAN over (t, x, y) normalized features of the surviving events, then
/// hull/perimeter/area/circularity per cluster. All-noise input yields an
/// empty report (no detection, not an error).
ClusterReport cluster_dynamic(const CompensatedEvents& comp,
                              const std::vector<std::size_t>& dyn_idx,
                              const DetectionParams& params,
                              const CameraModel& cam);

/// Among clusters passing both gates, picks the circularity closest to 1;
/// ties go to the larger cluster. Returns the selected index, if any.
std::optional<std::size_t> select_ball(ClusterReport& report,
                                       const DetectionParams& params);

/// Full stack: crop -> compensate -> image -> threshold -> cluster ->
/// select, with wall-clock timings per stage. Every failure mode returns
/// found = false plus a reason tag instead of throwing.
DetectionResult detect(const EventWindow& win,
                       const std::vector<GazePoint>& gaze,
                       const std::vector<core::AngularRate>& imu,
                       const CameraModel& cam, const DetectionParams& params);

/// Slices a sorted event stream into consecutive fixed-length windows
/// covering [t_begin_us, t_end_us).
std::vector<EventWindow> slice_windows(const std::vector<Event>& events,
                                       double window_dt, std::int64_t t_begin_us,
                                       std::int64_t t_end_us);

/// detections.csv: one row per window (see header in the writer).
void write_detections_csv(const std::string& path,
                          const std::vector<DetectionResult>& results);

}  // namespace evball::detect
