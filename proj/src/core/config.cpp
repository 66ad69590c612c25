#include "evball/core/config.hpp"

#include <fstream>
#include <sstream>

#include "evball/core/errors.hpp"
#include "evball/core/io.hpp"

namespace evball::core {

const std::map<std::string, std::string>& default_config() {
  // One place for every tunable. Comments give units.
  static const std::map<std::string, std::string> defaults = {
      // Event camera: VGA sensor, 6 mm lens at 9 um pitch -> ~667 px.
      {"cam.fx", "667"},
      {"cam.fy", "667"},
      {"cam.cx", "320"},
      {"cam.cy", "240"},
      {"cam.k1", "0"},
      {"cam.k2", "0"},
      {"cam.width", "640"},
      {"cam.height", "480"},

      // Standard 40 mm ping-pong ball and air at sea level.
      {"physics.mass", "0.0027"},          // kg
      {"physics.radius", "0.02"},          // m
      {"physics.drag_coeff", "0.4"},       // C_d
      {"physics.air_density", "1.225"},    // kg/m^3
      {"physics.magnus_coeff", "1.0"},     // C_m
      {"physics.restitution", "0.8"},      // e
      {"physics.table_height", "-0.8"},    // m below eye level
      {"physics.gravity", "0,0,-9.81"},    // m/s^2, world frame (z up)

      // Scene generation.
      {"scene.seed", "1"},
      {"scene.duration", "0.5"},               // s
      {"scene.ball_p0", "0.1,2.8,-0.15"},      // m, world frame
      {"scene.ball_v0", "-0.3,-5.5,0.6"},      // m/s
      {"scene.ball_spin", "0,0,0"},            // rad/s, 0 = drag-only flight
      {"scene.imu_rate", "800"},               // Hz
      {"scene.gaze_rate", "60"},               // Hz
      {"scene.gaze_noise_sigma", "2.0"},       // px
      {"scene.clutter_rate", "8000"},         // events/s over the sensor
      {"scene.contrast_event_density", "24.0"}, // ball rim events per pixel of edge traversal
      {"scene.background_event_density", "8.0"}, // same, for background structure
      {"scene.event_jitter_px", "0.0"},        // sensor position noise, px sigma
      {"scene.rim_flicker_rate", "40"},        // Hz per rim pixel, static-edge noise
      {"scene.rotation_profile", "0:0,0,0"},   // t:wx,wy,wz; segments
      {"scene.camera_translation", "0,0,0"},   // m/s, world frame head sway
      {"scene.static_edges", "12"},            // count of background edges
      {"scene.opponent", "false"},             // moving non-circular blob
      {"scene.opponent_speed", "1.0"},         // m/s lateral

      // Ball detection (5 ms windows, 80 px fovea).
      {"detect.window_dt", "0.005"},   // s
      {"detect.roi_w", "80"},          // px
      {"detect.use_roi", "true"},
      {"detect.theta0", "0.5"},
      {"detect.theta1", "0.8"},        // s/rad
      {"detect.median_kernel", "3"},   // px
      {"detect.dbscan_eps", "0.018"},  // normalized feature space
      {"detect.dbscan_min_pts", "5"},
      {"detect.depth_min", "1.5"},     // m, drives perimeter/area gates
      {"detect.depth_max", "4.0"},     // m
      {"detect.gate_margin", "0.35"},   // fractional slack on the gates
      {"detect.time_norm", "observed"},  // observed | window

      // Depth measurement.
      {"measure.batches", "1"},
      {"measure.method", "tripoint"},  // tripoint | taubin | pca

      // Trajectory regression, propagation and EKF bootstrapping.
      {"predict.degree", "2"},
      {"predict.dt", "0.001"},        // s, integrator step
      {"predict.horizon", "0.2"},     // s, online update horizon
      {"predict.max_flight", "2.0"},  // s, propagation cap
      {"predict.mode", "ekf"},        // raw | ekf
      {"predict.q_jerk", "200"},      // (m/s^3)^2, white-jerk PSD
      {"predict.r_pos", "0.0025"},    // m^2, measurement position variance
      {"predict.r_vel", "1.0"},       // (m/s)^2, measurement velocity variance

      // Evaluation.
      {"eval.epsilon", "5.0"},  // px, detection success tolerance

      // Audio segmentation.
      {"segment.cutoff_hz", "1000"},
      {"segment.order", "4"},
      {"segment.min_separation", "0.06"},  // s
      {"segment.threshold_ratio", "0.25"},
      {"segment.rise_factor", "1.5"},
      {"segment.cycle_len", "4"},
  };
  return defaults;
}

Config::Config() : values_(default_config()) {}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config: " + path);
  Config cfg;
  std::vector<std::string> unknown;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError("config " + path + ":" + std::to_string(lineno) +
                      ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (default_config().count(key) == 0) {
      unknown.push_back(key);
      continue;
    }
    cfg.values_[key] = value;
  }
  if (!unknown.empty()) {
    std::string msg = "unknown config keys in " + path + ":";
    for (const auto& k : unknown) msg += " " + k;
    throw DataError(msg);
  }
  return cfg;
}

void Config::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write config: " + path);
  for (const auto& [k, v] : values_) out << k << " = " << v << '\n';
}

void Config::set(const std::string& key, const std::string& value) {
  if (default_config().count(key) == 0) {
    throw DataError("unknown config key: " + key);
  }
  values_[key] = value;
}

bool Config::has(const std::string& key) const { return values_.count(key) != 0; }

std::string Config::get_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw DataError("unknown config key: " + key);
  return it->second;
}

double Config::get_double(const std::string& key) const {
  const std::string s = get_string(key);
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw DataError("config key " + key + " is not a number: " + s);
  }
}

std::int64_t Config::get_int(const std::string& key) const {
  const std::string s = get_string(key);
  try {
    return std::stoll(s);
  } catch (const std::exception&) {
    throw DataError("config key " + key + " is not an integer: " + s);
  }
}

bool Config::get_bool(const std::string& key) const {
  const std::string s = get_string(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw DataError("config key " + key + " is not a boolean: " + s);
}

Vec3 Config::get_vec3(const std::string& key) const {
  const auto f = split_csv_line(get_string(key));
  if (f.size() != 3) throw DataError("config key " + key + " is not a 3-vector");
  try {
    return {std::stod(f[0]), std::stod(f[1]), std::stod(f[2])};
  } catch (const std::exception&) {
    throw DataError("config key " + key + " has a bad component");
  }
}

CameraModel Config::camera() const {
  CameraModel cam;
  cam.fx = get_double("cam.fx");
  cam.fy = get_double("cam.fy");
  cam.cx = get_double("cam.cx");
  cam.cy = get_double("cam.cy");
  cam.k1 = get_double("cam.k1");
  cam.k2 = get_double("cam.k2");
  cam.width = static_cast<int>(get_int("cam.width"));
  cam.height = static_cast<int>(get_int("cam.height"));
  return cam;
}

PhysicsParams Config::physics() const {
  PhysicsParams p;
  p.mass = get_double("physics.mass");
  p.radius = get_double("physics.radius");
  p.drag_coeff = get_double("physics.drag_coeff");
  p.air_density = get_double("physics.air_density");
  p.magnus_coeff = get_double("physics.magnus_coeff");
  p.restitution_e = get_double("physics.restitution");
  p.table_height = get_double("physics.table_height");
  p.gravity = get_vec3("physics.gravity");
  p.derive();
  return p;
}

}  // namespace evball::core
