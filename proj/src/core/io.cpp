#include "evball/core/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "evball/core/errors.hpp"

namespace evball::core {

namespace {

std::ifstream open_in(const std::string& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw DataError("cannot open file for reading: " + path);
  return in;
}

std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw DataError("cannot open file for writing: " + path);
  return out;
}

void expect_header(std::ifstream& in, const std::string& expected,
                   const std::string& path) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected) {
    throw DataError("bad header in " + path + ": expected '" + expected +
                    "', got '" + line + "'");
  }
}

double parse_double(const std::string& s, const std::string& path) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("bad numeric field '" + s + "' in " + path);
  }
}

std::int64_t parse_int(const std::string& s, const std::string& path) {
  try {
    std::size_t pos = 0;
    const std::int64_t v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("bad integer field '" + s + "' in " + path);
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

void write_events_csv(const std::string& path, const std::vector<Event>& events) {
  auto out = open_out(path);
  out << "t_us,x,y,p\n";
  for (const Event& e : events) {
    out << e.t_us << ',' << e.x << ',' << e.y << ',' << static_cast<int>(e.p)
        << '\n';
  }
}

std::vector<Event> read_events_csv(const std::string& path) {
  auto in = open_in(path);
  expect_header(in, "t_us,x,y,p", path);
  std::vector<Event> events;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 4) throw DataError("bad event row in " + path);
    Event e;
    e.t_us = parse_int(f[0], path);
    e.x = static_cast<std::uint16_t>(parse_int(f[1], path));
    e.y = static_cast<std::uint16_t>(parse_int(f[2], path));
    e.p = static_cast<std::int8_t>(parse_int(f[3], path));
    events.push_back(e);
  }
  return events;
}

void write_events_bin(const std::string& path, const std::vector<Event>& events) {
  auto out = open_out(path, true);
  for (const Event& e : events) {
    unsigned char rec[13];
    const auto t = static_cast<std::uint64_t>(e.t_us);
    for (int i = 0; i < 8; ++i) rec[i] = static_cast<unsigned char>(t >> (8 * i));
    rec[8] = static_cast<unsigned char>(e.x & 0xff);
    rec[9] = static_cast<unsigned char>(e.x >> 8);
    rec[10] = static_cast<unsigned char>(e.y & 0xff);
    rec[11] = static_cast<unsigned char>(e.y >> 8);
    rec[12] = static_cast<unsigned char>(e.p);
    out.write(reinterpret_cast<const char*>(rec), sizeof(rec));
  }
}

std::vector<Event> read_events_bin(const std::string& path) {
  auto in = open_in(path, true);
  std::vector<Event> events;
  unsigned char rec[13];
  while (in.read(reinterpret_cast<char*>(rec), sizeof(rec))) {
    std::uint64_t t = 0;
    for (int i = 7; i >= 0; --i) t = (t << 8) | rec[i];
    Event e;
    e.t_us = static_cast<std::int64_t>(t);
    e.x = static_cast<std::uint16_t>(rec[8] | (rec[9] << 8));
    e.y = static_cast<std::uint16_t>(rec[10] | (rec[11] << 8));
    e.p = static_cast<std::int8_t>(rec[12]);
    events.push_back(e);
  }
  if (in.gcount() != 0) throw DataError("truncated binary event file: " + path);
  return events;
}

void write_gaze_csv(const std::string& path, const std::vector<GazePoint>& gaze) {
  auto out = open_out(path);
  out << "t_us,x,y\n";
  for (const GazePoint& g : gaze) {
    out << g.t_us << ',' << format_double(g.x) << ',' << format_double(g.y)
        << '\n';
  }
}

std::vector<GazePoint> read_gaze_csv(const std::string& path) {
  auto in = open_in(path);
  expect_header(in, "t_us,x,y", path);
  std::vector<GazePoint> gaze;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 3) throw DataError("bad gaze row in " + path);
    gaze.push_back({parse_int(f[0], path), parse_double(f[1], path),
                    parse_double(f[2], path)});
  }
  return gaze;
}

void write_imu_csv(const std::string& path, const std::vector<AngularRate>& imu) {
  auto out = open_out(path);
  out << "t_us,wx,wy,wz\n";
  for (const AngularRate& s : imu) {
    out << s.t_us << ',' << format_double(s.wx) << ',' << format_double(s.wy)
        << ',' << format_double(s.wz) << '\n';
  }
}

std::vector<AngularRate> read_imu_csv(const std::string& path) {
  auto in = open_in(path);
  expect_header(in, "t_us,wx,wy,wz", path);
  std::vector<AngularRate> imu;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 4) throw DataError("bad imu row in " + path);
    imu.push_back({parse_int(f[0], path), parse_double(f[1], path),
                   parse_double(f[2], path), parse_double(f[3], path)});
  }
  return imu;
}

void write_trajectory_csv(const std::string& path,
                          const std::vector<TrajectorySample>& traj) {
  auto out = open_out(path);
  out << "t_us,px,py,pz\n";
  for (const TrajectorySample& s : traj) {
    out << s.t_us << ',' << format_double(s.p.x()) << ','
        << format_double(s.p.y()) << ',' << format_double(s.p.z()) << '\n';
  }
}

std::vector<TrajectorySample> read_trajectory_csv(const std::string& path) {
  auto in = open_in(path);
  expect_header(in, "t_us,px,py,pz", path);
  std::vector<TrajectorySample> traj;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 4) throw DataError("bad trajectory row in " + path);
    TrajectorySample s;
    s.t_us = parse_int(f[0], path);
    s.p = {parse_double(f[1], path), parse_double(f[2], path),
           parse_double(f[3], path)};
    traj.push_back(s);
  }
  return traj;
}

void KeyValueRecord::set(const std::string& key, const std::string& value) {
  auto it = index_.find(key);
  if (it != index_.end()) {
    entries_[it->second].second = value;
  } else {
    index_[key] = entries_.size();
    entries_.emplace_back(key, value);
  }
}

void KeyValueRecord::set(const std::string& key, double value) {
  set(key, format_double(value));
}

void KeyValueRecord::set(const std::string& key, std::int64_t value) {
  set(key, std::to_string(value));
}

void KeyValueRecord::set_vec3(const std::string& key, const Vec3& v) {
  set(key, format_double(v.x()) + "," + format_double(v.y()) + "," +
               format_double(v.z()));
}

bool KeyValueRecord::has(const std::string& key) const {
  return index_.count(key) != 0;
}

const std::string& KeyValueRecord::get(const std::string& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) throw DataError("missing key in record: " + key);
  return entries_[it->second].second;
}

double KeyValueRecord::get_double(const std::string& key) const {
  return parse_double(get(key), "record key " + key);
}

std::int64_t KeyValueRecord::get_int(const std::string& key) const {
  return parse_int(get(key), "record key " + key);
}

Vec3 KeyValueRecord::get_vec3(const std::string& key) const {
  const auto f = split_csv_line(get(key));
  if (f.size() != 3) throw DataError("key " + key + " is not a 3-vector");
  return {parse_double(f[0], key), parse_double(f[1], key),
          parse_double(f[2], key)};
}

void KeyValueRecord::save(const std::string& path) const {
  auto out = open_out(path);
  for (const auto& [k, v] : entries_) out << k << " = " << v << '\n';
}

KeyValueRecord KeyValueRecord::load(const std::string& path) {
  auto in = open_in(path);
  KeyValueRecord rec;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError("bad record line in " + path);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    rec.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return rec;
}

std::string file_checksum(const std::string& path) {
  auto in = open_in(path, true);
  std::uint64_t hash = 0xcbf29ce484222325ull;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize n = in.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 0x100000001b3ull;
    }
    if (n < static_cast<std::streamsize>(sizeof(buf))) break;
  }
  char out[20];
  std::snprintf(out, sizeof(out), "%016" PRIx64, hash);
  return out;
}

}  // namespace evball::core
