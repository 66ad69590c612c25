#pragma once

#include <string>
#include <vector>

#include "evball/core/camera.hpp"
#include "evball/core/types.hpp"
#include "evball/measure/circle_fit.hpp"

namespace evball::measure {

using core::BallMeasurement;
using core::CameraModel;
using core::Event;

/// One temporal batch of undistorted ball-event points. Times are seconds
/// relative to the window start; t_mid = (2m-1)T/(2M).
struct Batch {
  int index = 0;  // m in [1, M]
  double t_mid = 0.0;
  std::vector<Vec2> points;
};

/// Splits [0, T] into M equal batches; an event at exactly t = T goes to
/// batch M. Batches may come back empty when M exceeds the event spread.
std::vector<Batch> partition_batches(const std::vector<double>& t_rel,
                                     const std::vector<Vec2>& points,
                                     double window_t, int m_batches);

/// Z = fx * W / r. Flags the measurement unreliable below 1 px.
double depth_from_radius(const CircleFit& fit, const CameraModel& cam,
                         const core::PhysicsParams& physics);

struct MeasureOptions {
  int batches = 1;
  FitMethod method = FitMethod::kTriPoint;
};

struct WindowMeasurements {
  std::vector<BallMeasurement> measurements;  // t relative to window start
  std::vector<std::string> warnings;
};

/// Undistorts the ball events, batches them, fits one circle per
/// non-degenerate batch (hull of unique pixels, tri-point circumcircle by
/// default) and converts radius to depth. Degenerate batches are skipped
/// with a warning; all-degenerate input throws NumericalError.
WindowMeasurements measure_window(const std::vector<Event>& ball_events,
                                  std::int64_t t_start_us,
                                  std::int64_t t_end_us,
                                  const CameraModel& cam,
                                  const core::PhysicsParams& physics,
                                  const MeasureOptions& opt);

/// measurements.csv row set; t is absolute seconds in the stream.
struct MeasurementRow {
  double t = 0.0;
  double cx = 0.0, cy = 0.0, r = 0.0, depth = 0.0;
  std::string method;
};
void write_measurements_csv(const std::string& path,
                            const std::vector<MeasurementRow>& rows);
std::vector<MeasurementRow> read_measurements_csv(const std::string& path);

}  // namespace evball::measure
