#pragma once

#include <string>
#include <vector>

#include "evball/core/camera.hpp"
#include "evball/core/config.hpp"
#include "evball/core/io.hpp"
#include "evball/core/types.hpp"
#include "evball/predict/ekf.hpp"
#include "evball/predict/monotone_fit.hpp"
#include "evball/predict/propagate.hpp"

namespace evball::predict {

using core::BallMeasurement;
using core::CameraModel;
using core::Mat3;

/// Optional camera egomotion between measurement windows: rotation taking
/// the camera frame at time t back to the anchor frame of the first
/// measurement. Empty track means identity poses.
struct PoseTrack {
  std::vector<std::int64_t> t_us;
  std::vector<Vec3> rotvec;  // axis-angle of the cam(t) -> anchor rotation

  bool empty() const { return t_us.empty(); }
  Mat3 at(double t_s) const;  // nearest sample
};

PoseTrack read_poses_csv(const std::string& path);
void write_poses_csv(const std::string& path, const PoseTrack& poses);

/// Back-projects the fitted image track at the measurement times into
/// world-frame states; velocities by central differences (one-sided at the
/// ends). A single measurement yields a position-only state.
std::vector<BallState> assemble_states(const PolyFit& fit,
                                       const std::vector<double>& times,
                                       const CameraModel& cam,
                                       const PoseTrack& poses = {});

enum class ForecastMode { kRaw, kEkf };
ForecastMode forecast_mode_from_string(const std::string& name);

struct ForecastOptions {
  ForecastMode mode = ForecastMode::kEkf;
  int degree = 2;
  double dt = 1e-3;
  double horizon = 0.2;     // s, online update window
  double max_flight = 2.0;  // s, propagation cap
  EkfOptions ekf;
  // Online refits start the rollout from the newest fitted state instead
  // of the span start; a mean velocity applied at the first measurement is
  // only valid over short single-batch spans.
  bool anchor_at_end = false;

  static ForecastOptions from_config(const core::Config& cfg);
};

/// Regression + state assembly + open-loop propagation from one batch of
/// measurements. Raw mode starts from the first fitted position with the
/// mean finite-difference velocity; EKF mode bootstraps the start from M
/// predict-update iterations.
TrajectoryPrediction forecast_single_batch(
    const std::vector<BallMeasurement>& meas, const PhysicsParams& ph,
    const CameraModel& cam, const ForecastOptions& opt,
    const PoseTrack& poses = {});

/// Re-fits over the full history at every new measurement inside the
/// update horizon and re-propagates; returns every prediction, the last of
/// which is the evaluation target. Fewer than two measurements yield no
/// prediction.
std::vector<TrajectoryPrediction> forecast_online(
    const std::vector<BallMeasurement>& stream, const PhysicsParams& ph,
    const CameraModel& cam, const ForecastOptions& opt,
    const PoseTrack& poses = {});

/// Flat key-value impact record (impact point, time, mode, update count).
core::KeyValueRecord impact_record(const TrajectoryPrediction& pred,
                                   const std::string& mode);

}  // namespace evball::predict
