#include "evball/predict/propagate.hpp"

#include <cmath>
#include <fstream>

#include "evball/core/errors.hpp"
#include "evball/core/io.hpp"

namespace evball::predict {

Vec3 velocity_update(const Vec3& v, const Vec3& spin, const PhysicsParams& ph,
                     double dt) {
  if (spin.isZero()) {
    return v + (ph.gravity - ph.k_d * v.norm() * v) * dt;
  }
  const double drag = -ph.k_d * v.norm();
  core::Mat3 m;
  m << drag, -ph.k_m * spin.z(), ph.k_m * spin.y(),  //
      ph.k_m * spin.z(), drag, -ph.k_m * spin.x(),   //
      -ph.k_m * spin.y(), ph.k_m * spin.x(), drag;
  return v + (m * v) * dt + ph.gravity * dt;
}

namespace {

TrajectoryPrediction roll(const Vec3& p0, const Vec3& v0, const Vec3& spin,
                          const PhysicsParams& ph, double dt, double horizon,
                          double t_start) {
  if (dt <= 0.0) throw core::DataError("propagate: dt must be > 0");
  TrajectoryPrediction pred;
  const auto n_steps = static_cast<std::size_t>(std::ceil(horizon / dt));
  pred.states.reserve(n_steps + 1);

  Vec3 p = p0, v = v0;
  double t = t_start;
  auto push = [&](double ts) {
    BallState s;
    s.t = ts;
    s.p = p;
    s.v = v;
    pred.states.push_back(s);
  };
  push(t);

  for (std::size_t k = 0; k < n_steps; ++k) {
    Vec3 p_next = p + v * dt;
    if (p_next.z() < ph.table_height && v.z() < 0.0 &&
        p.z() >= ph.table_height) {
      // Bisect the linear sub-step for the crossing time (1 us).
      double lo = 0.0, hi = dt;
      while (hi - lo > 1e-6) {
        const double mid = 0.5 * (lo + hi);
        if ((p + v * mid).z() >= ph.table_height) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      Vec3 p_hit = p + v * lo;
      p_hit.z() = ph.table_height;
      if (!pred.has_impact) {
        pred.has_impact = true;
        pred.impact_point = p_hit;
        pred.impact_time = t + lo;
      }
      Vec3 v_bounced = v;
      v_bounced.z() = -ph.restitution_e * v.z();
      p = p_hit + v_bounced * (dt - lo);
      v = velocity_update(v_bounced, spin, ph, dt);
    } else {
      p = p_next;
      v = velocity_update(v, spin, ph, dt);
    }
    t = t_start + static_cast<double>(k + 1) * dt;
    push(t);
  }
  return pred;
}

}  // namespace

TrajectoryPrediction propagate(const Vec3& p0, const Vec3& v0,
                               const PhysicsParams& ph, double dt,
                               double horizon, double t_start) {
  return roll(p0, v0, Vec3::Zero(), ph, dt, horizon, t_start);
}

TrajectoryPrediction propagate_magnus(const Vec3& p0, const Vec3& v0,
                                      const Vec3& spin,
                                      const PhysicsParams& ph, double dt,
                                      double horizon, double t_start) {
  return roll(p0, v0, spin, ph, dt, horizon, t_start);
}

void write_prediction_csv(const std::string& path,
                          const TrajectoryPrediction& pred) {
  std::ofstream out(path);
  if (!out) throw core::DataError("cannot write " + path);
  out << "t,px,py,pz,vx,vy,vz\n";
  for (const BallState& s : pred.states) {
    out << core::format_double(s.t) << ',' << core::format_double(s.p.x())
        << ',' << core::format_double(s.p.y()) << ','
        << core::format_double(s.p.z()) << ',' << core::format_double(s.v.x())
        << ',' << core::format_double(s.v.y()) << ','
        << core::format_double(s.v.z()) << '\n';
  }
}

}  // namespace evball::predict
