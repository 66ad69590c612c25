#pragma once

#include <string>
#include <vector>

#include "evball/core/types.hpp"

namespace evball::predict {

using core::BallState;
using core::PhysicsParams;
using core::Vec3;

/// Forward trajectory rollout plus the extracted table impact.
struct TrajectoryPrediction {
  std::vector<BallState> states;  // world frame, strictly increasing t
  Vec3 impact_point = Vec3::Zero();
  double impact_time = 0.0;
  bool has_impact = false;
  std::string provenance;  // "single-batch" | "online"
  int update_count = 0;
};

/// One velocity step of the discrete ball dynamics. Zero spin takes the
/// pure drag expression so drag-only and Magnus-with-zero-spin rollouts
/// agree bitwise.
Vec3 velocity_update(const Vec3& v, const Vec3& spin, const PhysicsParams& ph,
                     double dt);

/// Iterative update p += v dt, v += (g - k_d|v|v) dt at a fixed step.
/// When the ball drops through the table plane moving down, the crossing is
/// refined by bisection to 1 us, v_z is reflected and scaled by the
/// restitution factor, and the rollout continues to the horizon.
TrajectoryPrediction propagate(const Vec3& p0, const Vec3& v0,
                               const PhysicsParams& ph, double dt,
                               double horizon, double t_start = 0.0);

/// Same integrator with the Magnus coupling k_m (spin x v) added to the
/// velocity update.
TrajectoryPrediction propagate_magnus(const Vec3& p0, const Vec3& v0,
                                      const Vec3& spin,
                                      const PhysicsParams& ph, double dt,
                                      double horizon, double t_start = 0.0);

void write_prediction_csv(const std::string& path,
                          const TrajectoryPrediction& pred);

}  // namespace evball::predict
