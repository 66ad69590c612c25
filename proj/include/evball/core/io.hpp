#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "evball/core/types.hpp"

namespace evball::core {

// Event stream files: CSV with header `t_us,x,y,p`, or an equivalent packed
// binary form of little-endian (u64, u16, u16, i8) records.
void write_events_csv(const std::string& path, const std::vector<Event>& events);
std::vector<Event> read_events_csv(const std::string& path);
void write_events_bin(const std::string& path, const std::vector<Event>& events);
std::vector<Event> read_events_bin(const std::string& path);

// Gaze file: CSV `t_us,x,y`.
void write_gaze_csv(const std::string& path, const std::vector<GazePoint>& gaze);
std::vector<GazePoint> read_gaze_csv(const std::string& path);

// IMU file: CSV `t_us,wx,wy,wz`.
void write_imu_csv(const std::string& path, const std::vector<AngularRate>& imu);
std::vector<AngularRate> read_imu_csv(const std::string& path);

// Trajectory file: CSV `t_us,px,py,pz`.
struct TrajectorySample {
  std::int64_t t_us = 0;
  Vec3 p = Vec3::Zero();
};
void write_trajectory_csv(const std::string& path,
                          const std::vector<TrajectorySample>& traj);
std::vector<TrajectorySample> read_trajectory_csv(const std::string& path);

// Flat key-value record (`key = value` lines), used for impact records,
// ground-truth metadata and run manifests. Keys keep insertion order.
class KeyValueRecord {
 public:
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);
  void set(const std::string& key, std::int64_t value);
  void set_vec3(const std::string& key, const Vec3& v);

  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  Vec3 get_vec3(const std::string& key) const;

  void save(const std::string& path) const;
  static KeyValueRecord load(const std::string& path);

  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::map<std::string, std::size_t> index_;
};

/// Deterministic float formatting shared by all CSV writers (shortest
/// round-trippable form via %.17g would be noisy; %.9g keeps files stable
/// and is far below any pipeline tolerance).
std::string format_double(double v);

/// FNV-1a 64-bit checksum of a file's bytes, as a hex string.
std::string file_checksum(const std::string& path);

/// Splits one CSV line on commas; no quoting (none of the formats need it).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace evball::core
