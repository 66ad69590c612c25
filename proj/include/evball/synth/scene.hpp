#pragma once

#include <string>
#include <vector>

#include "evball/core/camera.hpp"
#include "evball/core/config.hpp"
#include "evball/core/types.hpp"
#include "evball/synth/flight.hpp"

namespace evball::synth {

using core::AngularRate;
using core::CameraModel;
using core::Event;
using core::GazePoint;
using core::Mat3;
using core::Vec2;

/// One piecewise-constant segment of the camera rotation schedule.
struct RotationSegment {
  double t_start = 0.0;
  Vec3 omega = Vec3::Zero();  // rad/s, camera body frame
};

/// Parses "t:wx,wy,wz; t:wx,wy,wz; ..." into a sorted schedule.
std::vector<RotationSegment> parse_rotation_profile(const std::string& text);

/// World-to-camera rotation at time t. The gyro sign convention is chosen
/// so that the small-angle derotation warp K [I - [w]x dt] K^-1 maps an
/// event at t back to its position at the window start.
Mat3 camera_orientation_cw(const std::vector<RotationSegment>& profile, double t);

struct SceneConfig {
  core::PhysicsParams physics;
  core::BallState initial_state;  // world frame
  Vec3 spin = Vec3::Zero();       // rad/s, enables Magnus when nonzero
  CameraModel cam;
  double imu_rate = 800.0;
  double gaze_rate = 60.0;
  double gaze_noise_sigma = 2.0;
  double clutter_rate = 20000.0;          // events/s over the whole sensor
  double contrast_event_density = 3.0;    // ball rim, events per traversed pixel
  double background_event_density = 8.0;  // edges and opponent, lower contrast
  double event_jitter_px = 0.0;           // sensor position noise, px sigma
  double rim_flicker_rate = 40.0;         // Hz per rim pixel when nearly static
  std::vector<RotationSegment> rotation_profile;
  Vec3 camera_translation = Vec3::Zero();  // m/s, constant drift, unsensed
  int static_edges = 12;
  bool opponent = false;
  double opponent_speed = 1.0;  // m/s
  double duration = 0.5;        // s
  std::uint64_t seed = 1;

  static SceneConfig from_config(const core::Config& cfg);
};

enum class EventSource : std::uint8_t { kBall, kEdge, kOpponent, kClutter };

struct SceneData {
  std::vector<Event> events;  // sorted by (t, x, y, p)
  std::vector<EventSource> sources;  // aligned with events; not serialized
  std::vector<GazePoint> gaze;
  std::vector<AngularRate> imu;
  GroundTruth gt;
  double visible_until = 0.0;  // s; < duration means partial visibility
  bool fully_visible = true;
};

/// Projected ball circle at time t: center through the full camera model,
/// radius by similar triangles fx * W / Z. Returns false when the ball is
/// behind the camera or off-sensor.
bool project_ball(const GroundTruth& gt, const SceneConfig& cfg, double t,
                  Vec2* center, double* radius);

/// Renders the event stream (ball rim, static edges under rotation,
/// optional opponent blob, uniform clutter), the gaze track and the IMU
/// track. Deterministic for a fixed seed. Throws DataError when the ball
/// is never visible.
SceneData render_events(const GroundTruth& gt, const SceneConfig& cfg);

/// Convenience: simulate_flight + render_events.
SceneData render_scene(const SceneConfig& cfg);

/// Writes events.csv/events.bin, gaze.csv, imu.csv, gt_trajectory.csv,
/// poses.csv and gt_meta.txt under dir (created if needed).
void write_scene(const SceneData& scene, const SceneConfig& cfg,
                 const std::string& dir);

}  // namespace evball::synth
