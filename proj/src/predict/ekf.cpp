#include "evball/predict/ekf.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "evball/core/errors.hpp"
#include "evball/synth/flight.hpp"

namespace evball::predict {

namespace {

using Mat69 = Eigen::Matrix<double, 6, 9>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Vec6 = Eigen::Matrix<double, 6, 1>;

Mat69 measurement_jacobian() {
  Mat69 h = Mat69::Zero();
  h.block<6, 6>(0, 0) = Mat6::Identity();
  return h;
}

/// Symmetrize and clamp tiny negative eigenvalues; throws when the
/// covariance is far from PSD.
void ensure_psd(Mat9* p) {
  *p = 0.5 * (*p + p->transpose());
  Eigen::SelfAdjointEigenSolver<Mat9> eig(*p);
  const double min_eig = eig.eigenvalues().minCoeff();
  if (min_eig >= 0.0) return;
  if (min_eig < -1e-6) {
    throw core::NumericalError("ekf: covariance lost positive definiteness");
  }
  Vec9 clamped = eig.eigenvalues().cwiseMax(0.0);
  *p = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

Mat9 ekf_transition(double dt) {
  Mat9 f = Mat9::Identity();
  f.block<3, 3>(0, 3) = dt * core::Mat3::Identity();
  f.block<3, 3>(0, 6) = 0.5 * dt * dt * core::Mat3::Identity();
  f.block<3, 3>(3, 6) = dt * core::Mat3::Identity();
  return f;
}

Mat9 ekf_process_noise(double dt, double q_jerk) {
  const double d2 = dt * dt, d3 = d2 * dt, d4 = d3 * dt, d5 = d4 * dt;
  Mat9 q = Mat9::Zero();
  const core::Mat3 eye = core::Mat3::Identity();
  q.block<3, 3>(0, 0) = (d5 / 20.0) * eye;
  q.block<3, 3>(0, 3) = (d4 / 8.0) * eye;
  q.block<3, 3>(0, 6) = (d3 / 6.0) * eye;
  q.block<3, 3>(3, 0) = (d4 / 8.0) * eye;
  q.block<3, 3>(3, 3) = (d3 / 3.0) * eye;
  q.block<3, 3>(3, 6) = (d2 / 2.0) * eye;
  q.block<3, 3>(6, 0) = (d3 / 6.0) * eye;
  q.block<3, 3>(6, 3) = (d2 / 2.0) * eye;
  q.block<3, 3>(6, 6) = dt * eye;
  return q_jerk * q;
}

void ekf_predict(EkfState* s, double dt, const EkfOptions& opt) {
  const Mat9 f = ekf_transition(dt);
  s->x = f * s->x;
  s->p = f * s->p * f.transpose() + ekf_process_noise(dt, opt.q_jerk);
  ensure_psd(&s->p);
}

void ekf_update(EkfState* s, const Vec3& p_meas, const Vec3& v_meas,
                const EkfOptions& opt) {
  const Mat69 h = measurement_jacobian();
  Mat6 r = Mat6::Zero();
  r.diagonal() << opt.r_pos, opt.r_pos, opt.r_pos, opt.r_vel, opt.r_vel,
      opt.r_vel;
  Vec6 z;
  z << p_meas, v_meas;

  const Vec6 innovation = z - h * s->x;
  const Mat6 innovation_cov = h * s->p * h.transpose() + r;
  const Eigen::Matrix<double, 9, 6> gain =
      s->p * h.transpose() * innovation_cov.ldlt().solve(Mat6::Identity());
  s->x += gain * innovation;
  const Mat9 ikh = Mat9::Identity() - gain * h;
  s->p = ikh * s->p * ikh.transpose() + gain * r * gain.transpose();
  ensure_psd(&s->p);
}

std::pair<Vec3, Vec3> ekf_bootstrap(const std::vector<BallState>& meas_states,
                                    const PhysicsParams& ph,
                                    const EkfOptions& opt) {
  if (meas_states.size() < 2) {
    throw core::DataError("ekf_bootstrap: needs >= 2 measurement states");
  }
  EkfState s;
  const BallState& first = meas_states.front();
  s.x.segment<3>(0) = first.p;
  s.x.segment<3>(3) = first.v;
  s.x.segment<3>(6) = synth::ball_acceleration(first.v, Vec3::Zero(), ph);
  s.p = Mat9::Zero();
  s.p.diagonal().segment<3>(0).setConstant(10.0 * opt.r_pos);
  s.p.diagonal().segment<3>(3).setConstant(10.0 * opt.r_vel);
  s.p.diagonal().segment<3>(6).setConstant(25.0);

  double t_prev = first.t;
  for (const BallState& m : meas_states) {
    ekf_predict(&s, m.t - t_prev, opt);
    ekf_update(&s, m.p, m.v, opt);
    t_prev = m.t;
  }
  return {s.position(), s.velocity()};
}

}  // namespace evball::predict
