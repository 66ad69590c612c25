#include "evball/synth/flight.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>

#include "evball/core/errors.hpp"

namespace evball::synth {

namespace {

constexpr double kStep = 1e-3;        // 1 kHz sampling grid
constexpr double kBounceTol = 1e-6;   // s, bisection resolution

struct PV {
  Vec3 p;
  Vec3 v;
};

PV rk4_step(const PV& y, double h, const Vec3& spin, const PhysicsParams& ph) {
  auto acc = [&](const Vec3& v) { return ball_acceleration(v, spin, ph); };
  const Vec3 k1p = y.v, k1v = acc(y.v);
  const Vec3 k2p = y.v + 0.5 * h * k1v, k2v = acc(y.v + 0.5 * h * k1v);
  const Vec3 k3p = y.v + 0.5 * h * k2v, k3v = acc(y.v + 0.5 * h * k2v);
  const Vec3 k4p = y.v + h * k3v, k4v = acc(y.v + h * k3v);
  PV out;
  out.p = y.p + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
  out.v = y.v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  return out;
}

}  // namespace

Vec3 ball_acceleration(const Vec3& v, const Vec3& spin, const PhysicsParams& ph) {
  Vec3 a = ph.gravity - ph.k_d * v.norm() * v;
  if (!spin.isZero()) a += ph.k_m * spin.cross(v);
  return a;
}

Vec3 GroundTruth::position_at(double t) const {
  if (states.empty()) return Vec3::Zero();
  const double idx = t / kStep;
  const auto n = static_cast<std::ptrdiff_t>(states.size());
  const auto i1 = std::clamp<std::ptrdiff_t>(
      static_cast<std::ptrdiff_t>(std::floor(idx)), 0, n - 1);
  const auto i0 = std::max<std::ptrdiff_t>(i1 - 1, 0);
  const auto i2 = std::min<std::ptrdiff_t>(i1 + 1, n - 1);
  const auto i3 = std::min<std::ptrdiff_t>(i1 + 2, n - 1);
  const double u = std::clamp(idx - static_cast<double>(i1), 0.0, 1.0);
  // Catmull-Rom through the four neighboring 1 kHz samples.
  const Vec3 &p0 = states[i0].p, &p1 = states[i1].p, &p2 = states[i2].p,
             &p3 = states[i3].p;
  return 0.5 * ((2.0 * p1) + (-p0 + p2) * u +
                (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * u * u +
                (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * u * u * u);
}

Vec3 GroundTruth::velocity_at(double t) const {
  if (states.empty()) return Vec3::Zero();
  const auto n = static_cast<std::ptrdiff_t>(states.size());
  const auto i = std::clamp<std::ptrdiff_t>(
      static_cast<std::ptrdiff_t>(std::lround(t / kStep)), 0, n - 1);
  return states[i].v;
}

GroundTruth simulate_flight(const BallState& initial, const PhysicsParams& ph,
                            double duration, const Vec3& spin) {
  if (duration <= 0.0) throw core::DataError("simulate_flight: duration <= 0");
  if (initial.p.z() < ph.table_height && initial.v.z() < 0.0) {
    throw core::DataError(
        "simulate_flight: initial state below the table moving down");
  }

  GroundTruth gt;
  const auto n_steps = static_cast<std::size_t>(std::ceil(duration / kStep));
  gt.states.reserve(n_steps + 1);

  PV y{initial.p, initial.v};
  double t = 0.0;
  auto sample = [&](double ts, const PV& s) {
    BallState b;
    b.t = ts;
    b.p = s.p;
    b.v = s.v;
    b.a = ball_acceleration(s.v, spin, ph);
    gt.states.push_back(b);
  };
  sample(0.0, y);

  for (std::size_t k = 0; k < n_steps; ++k) {
    double remaining = kStep;
    int bounces_in_slot = 0;
    while (remaining > 0.0) {
      if (bounces_in_slot > 100) {
        // Zeno guard: the ball has effectively settled on the table.
        y.p.z() = ph.table_height;
        y.v.z() = 0.0;
        PV next = rk4_step(y, remaining, spin, ph);
        next.p.z() = ph.table_height;
        next.v.z() = 0.0;
        y = next;
        break;
      }
      PV next = rk4_step(y, remaining, spin, ph);
      const bool crosses =
          next.p.z() < ph.table_height && next.v.z() < 0.0 && y.p.z() >= ph.table_height;
      if (!crosses) {
        y = next;
        remaining = 0.0;
        break;
      }
      // Bisect the sub-step length until the crossing is pinned to 1 us.
      double lo = 0.0, hi = remaining;
      while (hi - lo > kBounceTol) {
        const double mid = 0.5 * (lo + hi);
        if (rk4_step(y, mid, spin, ph).p.z() >= ph.table_height) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      PV at_impact = rk4_step(y, lo, spin, ph);
      at_impact.p.z() = ph.table_height;
      if (!gt.has_impact) {
        gt.has_impact = true;
        gt.impact_point = at_impact.p;
        gt.impact_time = t + (kStep - remaining) + lo;
      }
      at_impact.v.z() = -ph.restitution_e * at_impact.v.z();
      y = at_impact;
      remaining -= lo;
      ++bounces_in_slot;
    }
    t += kStep;
    sample(t, y);
  }
  return gt;
}

}  // namespace evball::synth
