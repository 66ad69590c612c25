#pragma once

#include <vector>

#include "evball/core/types.hpp"

namespace evball::synth {

using core::BallState;
using core::PhysicsParams;
using core::Vec3;

/// Simulated flight sampled at 1 kHz, plus the first table impact.
struct GroundTruth {
  std::vector<BallState> states;  // world frame, t = 0, 1 ms, 2 ms, ...
  Vec3 impact_point = Vec3::Zero();
  double impact_time = 0.0;
  bool has_impact = false;

  /// Cubic (Catmull-Rom) interpolation of position at time t in seconds.
  Vec3 position_at(double t) const;
  Vec3 velocity_at(double t) const;
};

/// Drag (+ optional Magnus) acceleration in the world frame.
Vec3 ball_acceleration(const Vec3& v, const Vec3& spin, const PhysicsParams& ph);

/// Integrates gravity + drag (+ Magnus when spin is nonzero) with classical
/// RK4 at 1 kHz. Bounces on the table plane are located by bisection to
/// 1 us and apply v_z+ = -e * v_z- with horizontal velocity unchanged.
/// Throws DataError if the initial state starts below the table moving down.
GroundTruth simulate_flight(const BallState& initial, const PhysicsParams& ph,
                            double duration, const Vec3& spin = Vec3::Zero());

}  // namespace evball::synth
