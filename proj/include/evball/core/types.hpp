#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace evball::core {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// One asynchronous brightness-change event. Timestamps are microseconds
/// since the stream epoch; pixel coordinates are 0-based integers.
struct Event {
  std::int64_t t_us = 0;
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  std::int8_t p = 1;  // polarity, +1 or -1
};

/// A time slice of an event stream. Events are sorted non-decreasing in t
/// and all timestamps lie in [t_start_us, t_end_us].
struct EventWindow {
  std::vector<Event> events;
  std::int64_t t_start_us = 0;
  std::int64_t t_end_us = 0;

  std::int64_t duration_us() const { return t_end_us - t_start_us; }
  double duration_s() const { return static_cast<double>(duration_us()) * 1e-6; }
  bool empty() const { return events.empty(); }
};

/// Camera angular rate in the body frame, rad/s.
struct AngularRate {
  std::int64_t t_us = 0;
  double wx = 0.0;
  double wy = 0.0;
  double wz = 0.0;

  Vec3 vec() const { return {wx, wy, wz}; }
};

/// Eye-gaze reprojection sample on the event image plane.
struct GazePoint {
  std::int64_t t_us = 0;
  double x = 0.0;
  double y = 0.0;
};

/// Image-space ball observation with metric depth, one per temporal batch.
/// t is seconds relative to the measurement epoch (the batch midpoint).
struct BallMeasurement {
  double t = 0.0;
  double cx_img = 0.0;  // undistorted center, px
  double cy_img = 0.0;
  double r_img = 0.0;  // image radius, px
  double depth = 0.0;  // meters along the optical axis
  bool unreliable = false;  // set when r_img < 1 px
};

/// 3D kinematic state of the ball in the camera-anchored world frame
/// (x right, y along the optical axis, z up).
struct BallState {
  double t = 0.0;
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 a = Vec3::Zero();
};

/// Ball and environment constants. k_d and k_m are derived from the raw
/// quantities; call derive() after changing any of them.
struct PhysicsParams {
  double mass = 0.0027;        // kg
  double radius = 0.02;        // m
  double drag_coeff = 0.4;     // C_d
  double air_density = 1.225;  // kg/m^3
  double magnus_coeff = 1.0;   // C_m
  Vec3 gravity = {0.0, 0.0, -9.81};
  double restitution_e = 0.8;
  double table_height = -0.8;  // m, world z of the table plane

  double k_d = 0.0;  // C_d*rho*A/(2m), 1/m
  double k_m = 0.0;  // C_m*rho*A*r/m

  void derive() {
    const double area = M_PI * radius * radius;
    k_d = drag_coeff * air_density * area / (2.0 * mass);
    k_m = magnus_coeff * air_density * area * radius / mass;
  }

  static PhysicsParams standard_ball() {
    PhysicsParams p;
    p.derive();
    return p;
  }
};

// Fixed axis permutation between the camera frame (x right, y down,
// z forward) and the camera-anchored world frame (x right, y forward,
// z up). The world frame is anchored at the camera pose at window start.
inline Vec3 cam_to_world(const Vec3& pc) { return {pc.x(), pc.z(), -pc.y()}; }
inline Vec3 world_to_cam(const Vec3& pw) { return {pw.x(), -pw.z(), pw.y()}; }

}  // namespace evball::core
