#pragma once

#include <map>
#include <string>
#include <vector>

#include "evball/core/camera.hpp"
#include "evball/core/types.hpp"

namespace evball::core {

/// Flat `key = value` configuration. Every key the tool understands has a
/// default in default_config(); loading a file with keys outside that set
/// is an error that names the offending keys.
class Config {
 public:
  Config();  // defaults only

  static Config load(const std::string& path);
  void save(const std::string& path) const;

  /// Overrides one value (used by CLI flags such as --seed).
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  Vec3 get_vec3(const std::string& key) const;

  CameraModel camera() const;
  PhysicsParams physics() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// The full default key set. Values that come straight from the hardware
/// and ball constants (sensor size, focal length, ball radius, drag
/// constants, thresholds, tolerances) are all defined here and nowhere
/// else; see the table in src/core/config.cpp.
const std::map<std::string, std::string>& default_config();

}  // namespace evball::core
