#include "evball/predict/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "evball/core/errors.hpp"

namespace evball::predict {

namespace {

Mat3 rodrigues(const Vec3& axis_angle) {
  const double theta = axis_angle.norm();
  if (theta < 1e-14) return Mat3::Identity();
  const Vec3 u = axis_angle / theta;
  Mat3 ux;
  ux << 0, -u.z(), u.y(), u.z(), 0, -u.x(), -u.y(), u.x(), 0;
  return Mat3::Identity() + std::sin(theta) * ux +
         (1.0 - std::cos(theta)) * ux * ux;
}

}  // namespace

Mat3 PoseTrack::at(double t_s) const {
  if (empty()) return Mat3::Identity();
  const auto t = static_cast<std::int64_t>(std::llround(t_s * 1e6));
  std::size_t best = 0;
  std::int64_t best_d = std::numeric_limits<std::int64_t>::max();
  for (std::size_t i = 0; i < t_us.size(); ++i) {
    const std::int64_t d = std::abs(t_us[i] - t);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return rodrigues(rotvec[best]);
}

PoseTrack read_poses_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw core::DataError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw core::DataError("empty file: " + path);
  PoseTrack track;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = core::split_csv_line(line);
    if (f.size() != 4) throw core::DataError("bad pose row in " + path);
    track.t_us.push_back(std::stoll(f[0]));
    track.rotvec.emplace_back(std::stod(f[1]), std::stod(f[2]), std::stod(f[3]));
  }
  return track;
}

void write_poses_csv(const std::string& path, const PoseTrack& poses) {
  std::ofstream out(path);
  if (!out) throw core::DataError("cannot write " + path);
  out << "t_us,rx,ry,rz\n";
  for (std::size_t i = 0; i < poses.t_us.size(); ++i) {
    out << poses.t_us[i] << ',' << core::format_double(poses.rotvec[i].x())
        << ',' << core::format_double(poses.rotvec[i].y()) << ','
        << core::format_double(poses.rotvec[i].z()) << '\n';
  }
}

std::vector<BallState> assemble_states(const PolyFit& fit,
                                       const std::vector<double>& times,
                                       const CameraModel& cam,
                                       const PoseTrack& poses) {
  std::vector<BallState> states;
  states.reserve(times.size());
  for (double t : times) {
    const Vec3 p_cam = core::back_project(
        core::Vec2(fit.eval_x(t), fit.eval_y(t)), fit.eval_z(t), cam);
    BallState s;
    s.t = t;
    s.p = core::cam_to_world(poses.at(t) * p_cam);
    states.push_back(s);
  }
  const std::size_t n = states.size();
  if (n >= 2) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t lo = i == 0 ? 0 : i - 1;
      const std::size_t hi = i + 1 == n ? i : i + 1;
      const double dt = states[hi].t - states[lo].t;
      if (dt > 0.0) states[i].v = (states[hi].p - states[lo].p) / dt;
    }
  }
  return states;
}

ForecastMode forecast_mode_from_string(const std::string& name) {
  if (name == "raw") return ForecastMode::kRaw;
  if (name == "ekf") return ForecastMode::kEkf;
  throw core::DataError("unknown forecast mode: " + name);
}

ForecastOptions ForecastOptions::from_config(const core::Config& cfg) {
  ForecastOptions opt;
  opt.mode = forecast_mode_from_string(cfg.get_string("predict.mode"));
  opt.degree = static_cast<int>(cfg.get_int("predict.degree"));
  opt.dt = cfg.get_double("predict.dt");
  opt.horizon = cfg.get_double("predict.horizon");
  opt.max_flight = cfg.get_double("predict.max_flight");
  opt.ekf.q_jerk = cfg.get_double("predict.q_jerk");
  opt.ekf.r_pos = cfg.get_double("predict.r_pos");
  opt.ekf.r_vel = cfg.get_double("predict.r_vel");
  return opt;
}

TrajectoryPrediction forecast_single_batch(
    const std::vector<BallMeasurement>& meas, const PhysicsParams& ph,
    const CameraModel& cam, const ForecastOptions& opt,
    const PoseTrack& poses) {
  if (meas.size() < 2) {
    throw core::DataError("forecast: needs >= 2 measurements");
  }
  const PolyFit fit = fit_monotone_poly(meas, opt.degree);
  std::vector<double> times(meas.size());
  for (std::size_t i = 0; i < meas.size(); ++i) times[i] = meas[i].t;
  const std::vector<BallState> states = assemble_states(fit, times, cam, poses);

  Vec3 p0, v0;
  double t_begin = 0.0;
  if (opt.mode == ForecastMode::kRaw) {
    if (opt.anchor_at_end) {
      p0 = states.back().p;
      v0 = states.back().v;
      t_begin = states.back().t;
    } else {
      p0 = states.front().p;
      Vec3 v_mean = Vec3::Zero();
      for (const BallState& s : states) v_mean += s.v;
      v0 = v_mean / static_cast<double>(states.size());
      t_begin = states.front().t;
    }
  } else {
    const auto [p_m, v_m] = ekf_bootstrap(states, ph, opt.ekf);
    p0 = p_m;
    v0 = v_m;
    t_begin = states.back().t;
  }

  TrajectoryPrediction pred =
      propagate(p0, v0, ph, opt.dt, opt.max_flight, t_begin);
  pred.provenance = "single-batch";
  pred.update_count = static_cast<int>(meas.size());
  return pred;
}

std::vector<TrajectoryPrediction> forecast_online(
    const std::vector<BallMeasurement>& stream, const PhysicsParams& ph,
    const CameraModel& cam, const ForecastOptions& opt,
    const PoseTrack& poses) {
  std::vector<TrajectoryPrediction> history;
  if (stream.size() < 2) return history;
  ForecastOptions online_opt = opt;
  online_opt.anchor_at_end = true;
  const double t_first = stream.front().t;
  for (std::size_t k = 2; k <= stream.size(); ++k) {
    if (stream[k - 1].t - t_first > opt.horizon) break;
    const std::vector<BallMeasurement> prefix(stream.begin(),
                                              stream.begin() + k);
    TrajectoryPrediction pred =
        forecast_single_batch(prefix, ph, cam, online_opt, poses);
    pred.provenance = "online";
    pred.update_count = static_cast<int>(k);
    history.push_back(std::move(pred));
  }
  return history;
}

core::KeyValueRecord impact_record(const TrajectoryPrediction& pred,
                                   const std::string& mode) {
  core::KeyValueRecord rec;
  rec.set("has_impact", std::string(pred.has_impact ? "1" : "0"));
  if (pred.has_impact) {
    rec.set_vec3("impact_point", pred.impact_point);
    rec.set("impact_time", pred.impact_time);
  }
  rec.set("mode", mode);
  rec.set("provenance", pred.provenance);
  rec.set("update_count", static_cast<std::int64_t>(pred.update_count));
  return rec;
}

}  // namespace evball::predict
