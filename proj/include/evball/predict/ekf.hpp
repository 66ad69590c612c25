#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "evball/core/types.hpp"

namespace evball::predict {

using core::BallState;
using core::PhysicsParams;
using core::Vec3;

using Vec9 = Eigen::Matrix<double, 9, 1>;
using Mat9 = Eigen::Matrix<double, 9, 9>;

struct EkfOptions {
  double q_jerk = 200.0;  // white-jerk spectral density, (m/s^3)^2 * s
  double r_pos = 2.5e-3;  // m^2
  double r_vel = 1.0;     // (m/s)^2
};

/// Constant-acceleration filter state [p, v, a] with covariance.
struct EkfState {
  Vec9 x = Vec9::Zero();
  Mat9 p = Mat9::Identity();

  Vec3 position() const { return x.segment<3>(0); }
  Vec3 velocity() const { return x.segment<3>(3); }
  Vec3 acceleration() const { return x.segment<3>(6); }
};

/// Constant-acceleration transition over dt (identity at dt = 0).
Mat9 ekf_transition(double dt);

/// White-jerk process noise over dt.
Mat9 ekf_process_noise(double dt, double q_jerk);

/// One predict step followed by one [p, v] update (Joseph form).
void ekf_predict(EkfState* s, double dt, const EkfOptions& opt);
void ekf_update(EkfState* s, const Vec3& p_meas, const Vec3& v_meas,
                const EkfOptions& opt);

/// Runs one predict-update per measurement state, starting from the first
/// state with a_0 = g - k_d |v_0| v_0, and returns the final position and
/// velocity as initial conditions for open-loop propagation.
std::pair<Vec3, Vec3> ekf_bootstrap(const std::vector<BallState>& meas_states,
                                    const PhysicsParams& ph,
                                    const EkfOptions& opt);

}  // namespace evball::predict
