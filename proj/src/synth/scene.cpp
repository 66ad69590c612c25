#include "evball/synth/scene.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>

#include "evball/core/errors.hpp"
#include "evball/core/io.hpp"
#include "evball/core/rng.hpp"

namespace evball::synth {

namespace {

using core::Rng;

constexpr double kStep = 1e-3;          // emission micro-step, s
constexpr double kSubMotionPx = 0.5;    // max rim motion per sub-interval
constexpr double kFlickerFadePxS = 30;  // rim speed where flicker dies out
constexpr double kJitterCapS = 1.5e-3;  // burst spread cap after a crossing

struct TimedEvent {
  std::int64_t t_us;
  int x, y;
  int p;
  EventSource source;
};

Mat3 rodrigues(const Vec3& axis_angle) {
  const double theta = axis_angle.norm();
  if (theta < 1e-14) return Mat3::Identity();
  const Vec3 u = axis_angle / theta;
  Mat3 ux;
  ux << 0, -u.z(), u.y(), u.z(), 0, -u.x(), -u.y(), u.x(), 0;
  return Mat3::Identity() + std::sin(theta) * ux +
         (1.0 - std::cos(theta)) * ux * ux;
}

// World -> camera axis permutation: cam x = world x, cam y = -world z,
// cam z = world y.
Mat3 base_cw() {
  Mat3 r;
  r << 1, 0, 0, 0, 0, -1, 0, 1, 0;
  return r;
}

int emission_count(Rng& rng, double expected) {
  const double fl = std::floor(expected);
  int n = static_cast<int>(fl);
  if (rng.bernoulli(expected - fl)) ++n;
  return n;
}

}  // namespace

std::vector<RotationSegment> parse_rotation_profile(const std::string& text) {
  std::vector<RotationSegment> profile;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find(';', pos);
    if (end == std::string::npos) end = text.size();
    std::string seg = text.substr(pos, end - pos);
    pos = end + 1;
    // trim
    const auto b = seg.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = seg.find_last_not_of(" \t");
    seg = seg.substr(b, e - b + 1);
    const auto colon = seg.find(':');
    if (colon == std::string::npos) {
      throw core::DataError("bad rotation profile segment: " + seg);
    }
    const auto parts = core::split_csv_line(seg.substr(colon + 1));
    if (parts.size() != 3) {
      throw core::DataError("rotation profile needs wx,wy,wz: " + seg);
    }
    RotationSegment rs;
    try {
      rs.t_start = std::stod(seg.substr(0, colon));
      rs.omega = {std::stod(parts[0]), std::stod(parts[1]), std::stod(parts[2])};
    } catch (const std::exception&) {
      throw core::DataError("bad rotation profile number in: " + seg);
    }
    profile.push_back(rs);
  }
  std::sort(profile.begin(), profile.end(),
            [](const RotationSegment& a, const RotationSegment& b) {
              return a.t_start < b.t_start;
            });
  if (profile.empty()) profile.push_back({0.0, Vec3::Zero()});
  return profile;
}

Mat3 camera_orientation_cw(const std::vector<RotationSegment>& profile,
                           double t) {
  Mat3 r_cw = base_cw();
  for (std::size_t i = 0; i < profile.size(); ++i) {
    const double seg_start = std::max(profile[i].t_start, 0.0);
    if (seg_start >= t) break;
    const double seg_end =
        (i + 1 < profile.size()) ? std::min(profile[i + 1].t_start, t) : t;
    if (seg_end <= seg_start) continue;
    r_cw = rodrigues(profile[i].omega * (seg_end - seg_start)) * r_cw;
  }
  return r_cw;
}

SceneConfig SceneConfig::from_config(const core::Config& cfg) {
  SceneConfig sc;
  sc.physics = cfg.physics();
  sc.initial_state.t = 0.0;
  sc.initial_state.p = cfg.get_vec3("scene.ball_p0");
  sc.initial_state.v = cfg.get_vec3("scene.ball_v0");
  sc.spin = cfg.get_vec3("scene.ball_spin");
  sc.cam = cfg.camera();
  sc.imu_rate = cfg.get_double("scene.imu_rate");
  sc.gaze_rate = cfg.get_double("scene.gaze_rate");
  sc.gaze_noise_sigma = cfg.get_double("scene.gaze_noise_sigma");
  sc.clutter_rate = cfg.get_double("scene.clutter_rate");
  sc.contrast_event_density = cfg.get_double("scene.contrast_event_density");
  sc.background_event_density = cfg.get_double("scene.background_event_density");
  sc.event_jitter_px = cfg.get_double("scene.event_jitter_px");
  sc.rim_flicker_rate = cfg.get_double("scene.rim_flicker_rate");
  sc.rotation_profile =
      parse_rotation_profile(cfg.get_string("scene.rotation_profile"));
  sc.camera_translation = cfg.get_vec3("scene.camera_translation");
  sc.static_edges = static_cast<int>(cfg.get_int("scene.static_edges"));
  sc.opponent = cfg.get_bool("scene.opponent");
  sc.opponent_speed = cfg.get_double("scene.opponent_speed");
  sc.duration = cfg.get_double("scene.duration");
  sc.seed = static_cast<std::uint64_t>(cfg.get_int("scene.seed"));
  if (sc.duration <= 0.0) throw core::DataError("scene.duration must be > 0");
  if (sc.imu_rate <= 0.0 || sc.gaze_rate <= 0.0) {
    throw core::DataError("scene rates must be > 0");
  }
  return sc;
}

bool project_ball(const GroundTruth& gt, const SceneConfig& cfg, double t,
                  Vec2* center, double* radius) {
  const Vec3 p_cam = camera_orientation_cw(cfg.rotation_profile, t) *
                     (gt.position_at(t) - cfg.camera_translation * t);
  if (p_cam.z() < 0.1) return false;
  const Vec2 c = core::project(p_cam, cfg.cam);
  const double r = cfg.cam.fx * cfg.physics.radius / p_cam.z();
  if (center) *center = c;
  if (radius) *radius = r;
  // Visible while any part of the rim overlaps the sensor.
  return c.x() + r >= 0.0 && c.x() - r < cfg.cam.width && c.y() + r >= 0.0 &&
         c.y() - r < cfg.cam.height;
}

namespace {

// Crossing-exact rim emission: an event fires at an integer pixel at the
// sub-microsecond moment the projected circle sweeps through that pixel
// center, so every rim event satisfies the circle equation at its own
// timestamp. This is what keeps the downstream circle-fit oracle exact.
void emit_ball_events(const GroundTruth& gt, const SceneConfig& cfg, Rng& rng,
                      std::vector<TimedEvent>* out, double* visible_until,
                      bool* fully_visible, bool* ever_visible) {
  const auto n_steps = static_cast<std::size_t>(std::floor(cfg.duration / kStep));
  bool was_visible = false;
  for (std::size_t k = 0; k < n_steps; ++k) {
    const double ta = static_cast<double>(k) * kStep;
    const double tb = ta + kStep;
    Vec2 c0, c1;
    double r0 = 0.0, r1 = 0.0;
    const bool vis0 = project_ball(gt, cfg, ta, &c0, &r0);
    const bool vis1 = project_ball(gt, cfg, tb, &c1, &r1);
    if (!vis0 || !vis1) {
      if (was_visible && *fully_visible) {
        *fully_visible = false;
        *visible_until = ta;
      }
      continue;
    }
    if (!was_visible) was_visible = true;
    *ever_visible = true;
    if (*fully_visible) *visible_until = tb;

    const double motion = (c1 - c0).norm() + std::abs(r1 - r0);
    const double speed_px_s = motion / kStep;
    const double flicker_scale =
        std::max(0.0, 1.0 - speed_px_s / kFlickerFadePxS);
    // Events of one pixel crossing spread over the time the edge needs to
    // transit that pixel.
    const double jitter_s =
        std::min(kJitterCapS, 0.6 / std::max(speed_px_s, 1.0));
    const int n_sub = std::max(1, static_cast<int>(std::ceil(motion / kSubMotionPx)));

    for (int s = 0; s < n_sub; ++s) {
      const double ua = static_cast<double>(s) / n_sub;
      const double ub = static_cast<double>(s + 1) / n_sub;
      const Vec2 ca = c0 + ua * (c1 - c0), cb = c0 + ub * (c1 - c0);
      const double ra = r0 + ua * (r1 - r0), rb = r0 + ub * (r1 - r0);
      const Vec2 cm = 0.5 * (ca + cb);
      const double band_hi = std::max(ra, rb) + (cb - ca).norm() * 0.5 + 0.8;
      const double band_lo =
          std::max(0.0, std::min(ra, rb) - (cb - ca).norm() * 0.5 - 0.8);
      const double t_sub_a = ta + kStep * ua;
      const double dt_sub = kStep / n_sub;
      const double flicker_p =
          cfg.rim_flicker_rate * dt_sub * flicker_scale;

      const int y_lo = std::max(0, static_cast<int>(std::ceil(cm.y() - band_hi)));
      const int y_hi = std::min(cfg.cam.height - 1,
                                static_cast<int>(std::floor(cm.y() + band_hi)));
      for (int y = y_lo; y <= y_hi; ++y) {
        const double dy = static_cast<double>(y) - cm.y();
        const double out2 = band_hi * band_hi - dy * dy;
        if (out2 <= 0.0) continue;
        const double outer = std::sqrt(out2);
        const double in2 = band_lo * band_lo - dy * dy;
        const double inner = in2 > 0.0 ? std::sqrt(in2) : 0.0;
        // Row intervals covering the annulus band.
        const int spans[2][2] = {
            {static_cast<int>(std::ceil(cm.x() - outer)),
             static_cast<int>(std::floor(cm.x() - inner))},
            {static_cast<int>(std::ceil(cm.x() + inner)),
             static_cast<int>(std::floor(cm.x() + outer))}};
        const int n_spans = inner > 0.0 ? 2 : 1;
        const int single_lo = spans[0][0], single_hi = spans[1][1];
        for (int si = 0; si < n_spans; ++si) {
          const int x_lo = std::max(0, n_spans == 1 ? single_lo : spans[si][0]);
          const int x_hi = std::min(cfg.cam.width - 1,
                                    n_spans == 1 ? single_hi : spans[si][1]);
          for (int x = x_lo; x <= x_hi; ++x) {
            const Vec2 px(static_cast<double>(x), static_cast<double>(y));
            const double ga = (px - ca).norm() - ra;
            const double gb = (px - cb).norm() - rb;
            if (ga == 0.0 || ga * gb < 0.0) {
              // Bisect the crossing time within the sub-interval.
              double lo = 0.0, hi = 1.0;
              for (int it = 0; it < 20; ++it) {
                const double mid = 0.5 * (lo + hi);
                const Vec2 cmid = ca + mid * (cb - ca);
                const double rmid = ra + mid * (rb - ra);
                const double gmid = (px - cmid).norm() - rmid;
                if ((gmid < 0.0) == (ga < 0.0)) {
                  lo = mid;
                } else {
                  hi = mid;
                }
              }
              const double t_cross = t_sub_a + dt_sub * 0.5 * (lo + hi);
              const int pol = gb < ga ? -1 : 1;  // covered -> darker
              const int n = emission_count(rng, cfg.contrast_event_density);
              for (int i = 0; i < n; ++i) {
                const double tj =
                    std::min(t_cross + rng.uniform() * jitter_s,
                             cfg.duration - 1e-9);
                out->push_back({static_cast<std::int64_t>(std::llround(tj * 1e6)),
                                x, y, pol, EventSource::kBall});
              }
            } else if (flicker_p > 0.0 && std::abs(ga) <= 0.5 &&
                       rng.bernoulli(flicker_p)) {
              const double tf = t_sub_a + rng.uniform() * dt_sub;
              out->push_back({static_cast<std::int64_t>(std::llround(tf * 1e6)),
                              x, y, rng.bernoulli(0.5) ? 1 : -1,
                              EventSource::kBall});
            }
          }
        }
      }
    }
  }
}

// Particle-based emission for line-like objects: an event fires when a
// particle's projection moves into a new pixel.
void emit_particle_events(const std::vector<Vec3>& world_pts_t0,
                          const std::function<Vec3(const Vec3&, double)>& move,
                          const SceneConfig& cfg, Rng& rng, bool only_when_rotating,
                          EventSource source, std::vector<TimedEvent>* out) {
  const auto n_steps = static_cast<std::size_t>(std::floor(cfg.duration / kStep));
  std::vector<Vec2> prev(world_pts_t0.size());
  std::vector<bool> prev_ok(world_pts_t0.size(), false);

  Mat3 r_cw = camera_orientation_cw(cfg.rotation_profile, 0.0);
  for (std::size_t i = 0; i < world_pts_t0.size(); ++i) {
    const Vec3 pc = r_cw * move(world_pts_t0[i], 0.0);  // t = 0: no drift yet
    if (pc.z() > 0.1) {
      try {
        prev[i] = core::project(pc, cfg.cam);
        prev_ok[i] = true;
      } catch (const core::DataError&) {
      }
    }
  }

  for (std::size_t k = 0; k < n_steps; ++k) {
    const double ta = static_cast<double>(k) * kStep;
    const double tb = ta + kStep;
    const Mat3 r_next = camera_orientation_cw(cfg.rotation_profile, tb);
    const bool drifting = !cfg.camera_translation.isZero();
    const bool moving_view = drifting || !r_next.isApprox(r_cw, 1e-12);
    r_cw = r_next;
    for (std::size_t i = 0; i < world_pts_t0.size(); ++i) {
      if (only_when_rotating && !moving_view && prev_ok[i]) continue;
      const Vec3 pc =
          r_next * (move(world_pts_t0[i], tb) - cfg.camera_translation * tb);
      if (pc.z() <= 0.1) {
        prev_ok[i] = false;
        continue;
      }
      const Vec2 cur = core::project(pc, cfg.cam);
      if (!prev_ok[i]) {
        prev[i] = cur;
        prev_ok[i] = true;
        continue;
      }
      const Vec2 before = prev[i];
      prev[i] = cur;
      const int bx = static_cast<int>(std::lround(before.x()));
      const int by = static_cast<int>(std::lround(before.y()));
      const int cx = static_cast<int>(std::lround(cur.x()));
      const int cy = static_cast<int>(std::lround(cur.y()));
      if (bx == cx && by == cy) continue;
      if (!cfg.cam.contains(cur.x(), cur.y())) continue;
      // Fraction of the step at which the first pixel border is crossed.
      double frac = 1.0;
      if (cur.x() != before.x() && bx != cx) {
        const double edge = (bx < cx) ? bx + 0.5 : bx - 0.5;
        frac = std::min(frac, (edge - before.x()) / (cur.x() - before.x()));
      }
      if (cur.y() != before.y() && by != cy) {
        const double edge = (by < cy) ? by + 0.5 : by - 0.5;
        frac = std::min(frac, (edge - before.y()) / (cur.y() - before.y()));
      }
      frac = std::clamp(frac, 0.0, 1.0);
      const double t_cross = ta + frac * kStep;
      const int pol = (cur.x() - before.x() + cur.y() - before.y()) > 0 ? 1 : -1;
      // Background structure is large and optically soft: its events
      // spread symmetrically over the blurred edge's pixel transit, which
      // is what lets the mean timestamp image wash static content out.
      const double speed = (cur - before).norm() / kStep;
      const double spread_s = std::min(0.012, 1.2 / std::max(speed, 1.0));
      const int n = emission_count(rng, cfg.background_event_density);
      for (int e = 0; e < n; ++e) {
        const double tj =
            std::clamp(t_cross + (rng.uniform() - 0.5) * spread_s, 0.0,
                       cfg.duration - 1e-9);
        out->push_back({static_cast<std::int64_t>(std::llround(tj * 1e6)), cx,
                        cy, pol, source});
      }
    }
  }
}

}  // namespace

SceneData render_events(const GroundTruth& gt, const SceneConfig& cfg) {
  SceneData scene;
  scene.gt = gt;
  scene.visible_until = 0.0;
  Rng rng(cfg.seed);

  std::vector<TimedEvent> raw;
  bool ever_visible = false;
  emit_ball_events(gt, cfg, rng, &raw, &scene.visible_until,
                   &scene.fully_visible, &ever_visible);
  if (!ever_visible) {
    throw core::DataError("render_events: ball never visible in the frustum");
  }

  // Static background edges; they only fire while the camera rotates.
  if (cfg.static_edges > 0) {
    std::vector<Vec3> particles;
    for (int e = 0; e < cfg.static_edges; ++e) {
      const Vec3 a(rng.uniform(-2.5, 2.5), rng.uniform(1.5, 5.0),
                   rng.uniform(-1.2, 1.0));
      Vec3 dir(rng.normal(), rng.normal(), rng.normal());
      if (dir.norm() < 1e-9) dir = Vec3(1, 0, 0);
      dir.normalize();
      const double len = rng.uniform(0.3, 1.2);
      const double ds = a.y() / cfg.cam.fx;  // ~1 projected px
      const int n = std::min(4000, std::max(2, static_cast<int>(len / ds)));
      for (int i = 0; i < n; ++i) {
        particles.push_back(a + dir * (len * i / (n - 1.0)));
      }
    }
    emit_particle_events(
        particles, [](const Vec3& p, double) { return p; }, cfg, rng,
        /*only_when_rotating=*/true, EventSource::kEdge, &raw);
  }

  // Optional opponent: an elongated outline behind the ball's launch point,
  // sweeping laterally through the foveated region to exercise the
  // circularity gate.
  if (cfg.opponent) {
    std::vector<Vec3> outline;
    const double a_x = 0.12, b_z = 0.35;
    const double side = rng.bernoulli(0.5) ? 1.0 : -1.0;
    const Vec3 center = cfg.initial_state.p +
                        Vec3(side * rng.uniform(0.3, 0.55),
                             rng.uniform(0.6, 1.0), rng.uniform(-0.25, 0.0));
    const int n_pts = 440;
    for (int i = 0; i < n_pts; ++i) {
      const double th = 2.0 * M_PI * i / n_pts;
      outline.push_back(center +
                        Vec3(a_x * std::cos(th), 0.0, b_z * std::sin(th)));
    }
    const double speed = cfg.opponent_speed;
    auto move = [speed](const Vec3& p, double t) {
      // Triangle-wave sweep of +-0.35 m around the starting abscissa.
      const double period = 1.4 / std::max(speed, 1e-6);
      double phase = std::fmod(t, period) / period;  // 0..1
      const double sweep =
          0.35 * (phase < 0.5 ? 4.0 * phase - 1.0 : 3.0 - 4.0 * phase);
      return Vec3(p.x() + sweep, p.y(), p.z());
    };
    emit_particle_events(outline, move, cfg, rng, /*only_when_rotating=*/false,
                         EventSource::kOpponent, &raw);
  }

  // Uniform background clutter.
  const int n_clutter = rng.poisson(cfg.clutter_rate * cfg.duration);
  for (int i = 0; i < n_clutter; ++i) {
    raw.push_back({static_cast<std::int64_t>(
                       std::llround(rng.uniform() * cfg.duration * 1e6)),
                   static_cast<int>(rng.uniform_index(cfg.cam.width)),
                   static_cast<int>(rng.uniform_index(cfg.cam.height)),
                   rng.bernoulli(0.5) ? 1 : -1, EventSource::kClutter});
  }

  std::sort(raw.begin(), raw.end(), [](const TimedEvent& a, const TimedEvent& b) {
    return std::tie(a.t_us, a.x, a.y, a.p) < std::tie(b.t_us, b.x, b.y, b.p);
  });
  scene.events.reserve(raw.size());
  scene.sources.reserve(raw.size());
  const auto max_t = static_cast<std::int64_t>(std::llround(cfg.duration * 1e6));
  for (const TimedEvent& e : raw) {
    if (e.t_us < 0 || e.t_us > max_t) continue;
    int x = e.x, y = e.y;
    if (cfg.event_jitter_px > 0.0) {
      x = static_cast<int>(std::lround(x + cfg.event_jitter_px * rng.normal()));
      y = static_cast<int>(std::lround(y + cfg.event_jitter_px * rng.normal()));
      if (x < 0 || x >= cfg.cam.width || y < 0 || y >= cfg.cam.height) continue;
    }
    Event ev;
    ev.t_us = e.t_us;
    ev.x = static_cast<std::uint16_t>(x);
    ev.y = static_cast<std::uint16_t>(y);
    ev.p = static_cast<std::int8_t>(e.p);
    scene.events.push_back(ev);
    scene.sources.push_back(e.source);
  }

  // Gaze: the player tracks the ball; noise on top of the projection.
  const auto n_gaze = static_cast<std::size_t>(cfg.duration * cfg.gaze_rate);
  Vec2 last_center(cfg.cam.width / 2.0, cfg.cam.height / 2.0);
  for (std::size_t i = 0; i <= n_gaze; ++i) {
    const double t = static_cast<double>(i) / cfg.gaze_rate;
    if (t > cfg.duration) break;
    Vec2 c;
    double r;
    if (project_ball(gt, cfg, t, &c, &r)) last_center = c;
    GazePoint g;
    g.t_us = static_cast<std::int64_t>(std::llround(t * 1e6));
    g.x = std::clamp(last_center.x() + cfg.gaze_noise_sigma * rng.normal(), 0.0,
                     cfg.cam.width - 1.0);
    g.y = std::clamp(last_center.y() + cfg.gaze_noise_sigma * rng.normal(), 0.0,
                     cfg.cam.height - 1.0);
    scene.gaze.push_back(g);
  }

  // IMU: the rotation profile sampled exactly.
  const auto n_imu = static_cast<std::size_t>(cfg.duration * cfg.imu_rate);
  for (std::size_t i = 0; i <= n_imu; ++i) {
    const double t = static_cast<double>(i) / cfg.imu_rate;
    if (t > cfg.duration) break;
    Vec3 w = Vec3::Zero();
    for (const RotationSegment& seg : cfg.rotation_profile) {
      if (t >= seg.t_start) w = seg.omega;
    }
    scene.imu.push_back({static_cast<std::int64_t>(std::llround(t * 1e6)),
                         w.x(), w.y(), w.z()});
  }
  return scene;
}

SceneData render_scene(const SceneConfig& cfg) {
  // Integrate well past the rendered slice so the reference impact exists
  // even when the scene ends mid-flight.
  const GroundTruth gt = simulate_flight(cfg.initial_state, cfg.physics,
                                         cfg.duration + 1.5, cfg.spin);
  return render_events(gt, cfg);
}

void write_scene(const SceneData& scene, const SceneConfig& cfg,
                 const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  core::write_events_csv(dir + "/events.csv", scene.events);
  core::write_events_bin(dir + "/events.bin", scene.events);
  core::write_gaze_csv(dir + "/gaze.csv", scene.gaze);
  core::write_imu_csv(dir + "/imu.csv", scene.imu);

  std::vector<core::TrajectorySample> traj;
  traj.reserve(scene.gt.states.size());
  for (const auto& s : scene.gt.states) {
    traj.push_back({static_cast<std::int64_t>(std::llround(s.t * 1e6)), s.p});
  }
  core::write_trajectory_csv(dir + "/gt_trajectory.csv", traj);

  core::KeyValueRecord meta;
  meta.set("seed", static_cast<std::int64_t>(cfg.seed));
  meta.set("duration", cfg.duration);
  meta.set("table_height", cfg.physics.table_height);
  meta.set("has_impact", std::string(scene.gt.has_impact ? "1" : "0"));
  if (scene.gt.has_impact) {
    meta.set_vec3("impact_point", scene.gt.impact_point);
    meta.set("impact_time", scene.gt.impact_time);
  }
  meta.set("visible_until", scene.visible_until);
  meta.set("fully_visible", std::string(scene.fully_visible ? "1" : "0"));
  meta.save(dir + "/gt_meta.txt");
}

}  // namespace evball::synth
