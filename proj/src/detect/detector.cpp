#include "evball/detect/detector.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include "evball/core/errors.hpp"
#include "evball/core/geometry.hpp"
#include "evball/core/io.hpp"
#include "evball/detect/dbscan.hpp"
#include "evball/measure/circle_fit.hpp"

namespace evball::detect {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_us(Clock::time_point from) {
  return std::chrono::duration<double, std::micro>(Clock::now() - from).count();
}

}  // namespace

DetectionParams DetectionParams::from_config(const core::Config& cfg,
                                             const CameraModel& cam,
                                             const core::PhysicsParams& physics) {
  DetectionParams p;
  p.window_dt = cfg.get_double("detect.window_dt");
  p.roi_w = static_cast<int>(cfg.get_int("detect.roi_w"));
  p.use_roi = cfg.get_bool("detect.use_roi");
  p.theta0 = cfg.get_double("detect.theta0");
  p.theta1 = cfg.get_double("detect.theta1");
  p.median_kernel = static_cast<int>(cfg.get_int("detect.median_kernel"));
  p.dbscan_eps = cfg.get_double("detect.dbscan_eps");
  p.dbscan_min_pts = static_cast<int>(cfg.get_int("detect.dbscan_min_pts"));
  p.time_norm_window = cfg.get_string("detect.time_norm") == "window";

  const double depth_min = cfg.get_double("detect.depth_min");
  const double depth_max = cfg.get_double("detect.depth_max");
  const double margin = cfg.get_double("detect.gate_margin");
  const double r_near = cam.fx * physics.radius / depth_min;
  const double r_far = cam.fx * physics.radius / depth_max;
  p.perim_min = (1.0 - margin) * 2.0 * M_PI * r_far;
  p.perim_max = (1.0 + margin) * 2.0 * M_PI * r_near;
  // A slow ball only fires on the leading/trailing arcs within one window,
  // so the hull can be a thin two-lobe sliver of the disk; the lower area
  // bound keeps only a quarter of the full-disk floor.
  p.area_min = 0.25 * (1.0 - margin) * M_PI * r_far * r_far;
  p.area_max = (1.0 + margin) * M_PI * r_near * r_near;

  if (p.window_dt <= 0.0 || p.roi_w <= 0 || p.roi_w % 2 != 0) {
    throw core::DataError("detect: window_dt must be > 0 and roi_w even > 0");
  }
  return p;
}

std::size_t BinaryMap::count_on() const {
  std::size_t n = 0;
  for (std::uint8_t v : on) n += v;
  return n;
}

EventWindow crop_roi(const EventWindow& win, const GazePoint& gaze,
                     const DetectionParams& params, const CameraModel& cam) {
  const double half = params.roi_w / 2.0;
  // Half-open box of exactly roi_w pixels per side, clamped to the sensor.
  const double x_lo = std::max(0.0, gaze.x - half);
  const double x_hi = std::min(static_cast<double>(cam.width), gaze.x + half);
  const double y_lo = std::max(0.0, gaze.y - half);
  const double y_hi = std::min(static_cast<double>(cam.height), gaze.y + half);

  EventWindow out;
  out.t_start_us = win.t_start_us;
  out.t_end_us = win.t_end_us;
  for (const Event& e : win.events) {
    if (e.x >= x_lo && e.x < x_hi && e.y >= y_lo && e.y < y_hi) {
      out.events.push_back(e);
    }
  }
  return out;
}

CompensatedEvents motion_compensate(const EventWindow& win,
                                    const std::vector<core::AngularRate>& imu,
                                    const CameraModel& cam) {
  Vec3 omega = Vec3::Zero();
  int n_samples = 0;
  for (const auto& s : imu) {
    if (s.t_us >= win.t_start_us && s.t_us <= win.t_end_us) {
      omega += s.vec();
      ++n_samples;
    }
  }
  if (n_samples == 0) {
    throw core::DataError("motion_compensate: no gyro sample overlaps window");
  }
  omega /= static_cast<double>(n_samples);

  CompensatedEvents comp;
  comp.omega_mean = omega;
  comp.t0_us = win.t_start_us;
  comp.t_end_us = win.t_end_us;
  comp.coords.reserve(win.events.size());
  comp.t_us.reserve(win.events.size());

  core::Mat3 skew;
  skew << 0, -omega.z(), omega.y(), omega.z(), 0, -omega.x(), -omega.y(),
      omega.x(), 0;
  for (const Event& e : win.events) {
    const double dt = static_cast<double>(e.t_us - win.t_start_us) * 1e-6;
    // Per-event warp K [I - [w]x dt] K^-1 on homogeneous pixel coords.
    const core::Mat3 warp =
        cam.K() * (core::Mat3::Identity() - skew * dt) * cam.K_inv();
    const Vec3 h = warp * Vec3(static_cast<double>(e.x),
                               static_cast<double>(e.y), 1.0);
    comp.coords.emplace_back(h.x() / h.z(), h.y() / h.z());
    comp.t_us.push_back(e.t_us);
  }
  return comp;
}

TimestampImage build_timestamp_image(const CompensatedEvents& comp,
                                     const CameraModel& cam,
                                     const PixelRegion* region) {
  if (comp.coords.empty()) {
    throw core::DataError("build_timestamp_image: empty event set");
  }
  int x_min = std::numeric_limits<int>::max(), x_max = -1;
  int y_min = std::numeric_limits<int>::max(), y_max = -1;
  std::vector<int> px(comp.coords.size()), py(comp.coords.size());
  for (std::size_t i = 0; i < comp.coords.size(); ++i) {
    px[i] = static_cast<int>(std::lround(comp.coords[i].x()));
    py[i] = static_cast<int>(std::lround(comp.coords[i].y()));
    if (px[i] < 0 || px[i] >= cam.width || py[i] < 0 || py[i] >= cam.height) {
      px[i] = -1;  // compensated off-sensor, dropped from the image
      continue;
    }
    x_min = std::min(x_min, px[i]);
    x_max = std::max(x_max, px[i]);
    y_min = std::min(y_min, py[i]);
    y_max = std::max(y_max, py[i]);
  }
  if (x_max < 0) {
    throw core::DataError("build_timestamp_image: all events off-sensor");
  }
  if (region != nullptr && region->width > 0 && region->height > 0) {
    x_min = std::max(0, region->x0);
    y_min = std::max(0, region->y0);
    x_max = std::min(cam.width - 1, region->x0 + region->width - 1);
    y_max = std::min(cam.height - 1, region->y0 + region->height - 1);
    for (std::size_t i = 0; i < px.size(); ++i) {
      if (px[i] < x_min || px[i] > x_max || py[i] < y_min || py[i] > y_max) {
        px[i] = -1;
      }
    }
  }

  TimestampImage img;
  img.x0 = x_min;
  img.y0 = y_min;
  img.width = x_max - x_min + 1;
  img.height = y_max - y_min + 1;
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  img.mean_dt.assign(n, 0.0);
  img.count.assign(n, 0);
  img.rho.assign(n, 0.0);

  for (std::size_t i = 0; i < comp.coords.size(); ++i) {
    if (px[i] < 0) continue;
    const std::size_t at = img.idx(px[i], py[i]);
    img.mean_dt[at] += static_cast<double>(comp.t_us[i] - comp.t0_us) * 1e-6;
    img.count[at] += 1;
  }
  img.max_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (img.count[i] > 0) {
      img.mean_dt[i] /= img.count[i];
      img.max_mean = std::max(img.max_mean, img.mean_dt[i]);
    }
  }
  if (img.max_mean > 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      if (img.count[i] > 0) img.rho[i] = img.mean_dt[i] / img.max_mean;
    }
  }
  return img;
}

BinaryMap threshold_dynamic(const TimestampImage& img, const Vec3& omega_mean,
                            const DetectionParams& params) {
  BinaryMap map;
  map.x0 = img.x0;
  map.y0 = img.y0;
  map.width = img.width;
  map.height = img.height;
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  map.on.assign(n, 0);
  const double threshold = params.theta0 + params.theta1 * omega_mean.norm();
  for (std::size_t i = 0; i < n; ++i) {
    map.on[i] = (img.count[i] > 0 && img.rho[i] > threshold) ? 1 : 0;
  }

  // Median over the valid pixels in the kernel; pixels without events are
  // marked invalid by the timestamp image and do not vote, so the
  // one-pixel-thin rim of a slow ball is not wiped by the empty
  // background. The filter only removes positives (it never fills), which
  // keeps the threshold as the sole authority on what counts as dynamic.
  const int k = params.median_kernel;
  if (k > 1) {
    const int half = k / 2;
    std::vector<std::uint8_t> filtered(n, 0);
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        const std::size_t at = static_cast<std::size_t>(y) * img.width + x;
        if (!map.on[at]) continue;
        int ones = 0, valid = 0;
        for (int dy = -half; dy <= half; ++dy) {
          const int yy = y + dy;
          if (yy < 0 || yy >= img.height) continue;
          for (int dx = -half; dx <= half; ++dx) {
            const int xx = x + dx;
            if (xx < 0 || xx >= img.width) continue;
            const std::size_t nb = static_cast<std::size_t>(yy) * img.width + xx;
            if (img.count[nb] == 0) continue;
            ++valid;
            ones += map.on[nb];
          }
        }
        filtered[at] = 2 * ones >= valid ? 1 : 0;
      }
    }
    map.on.swap(filtered);
  }
  return map;
}

std::vector<std::size_t> select_dynamic_events(const CompensatedEvents& comp,
                                               const BinaryMap& map) {
  std::vector<std::size_t> dyn_idx;
  for (std::size_t i = 0; i < comp.coords.size(); ++i) {
    const int x = static_cast<int>(std::lround(comp.coords[i].x()));
    const int y = static_cast<int>(std::lround(comp.coords[i].y()));
    if (map.at(x, y)) dyn_idx.push_back(i);
  }
  return dyn_idx;
}

ClusterReport cluster_dynamic(const CompensatedEvents& comp,
                              const std::vector<std::size_t>& dyn_idx,
                              const DetectionParams& params,
                              const CameraModel& cam) {
  ClusterReport report;
  if (dyn_idx.empty()) return report;

  std::int64_t t_min = comp.t_us[dyn_idx.front()];
  std::int64_t t_max = t_min;
  for (std::size_t i : dyn_idx) {
    t_min = std::min(t_min, comp.t_us[i]);
    t_max = std::max(t_max, comp.t_us[i]);
  }
  double t_lo = static_cast<double>(t_min);
  double t_span = static_cast<double>(t_max - t_min);
  if (params.time_norm_window) {
    t_lo = static_cast<double>(comp.t0_us);
    t_span = static_cast<double>(comp.t_end_us - comp.t0_us);
  }
  if (t_span <= 0.0) t_span = 1.0;

  std::vector<Vec3> features;
  features.reserve(dyn_idx.size());
  for (std::size_t i : dyn_idx) {
    features.emplace_back((static_cast<double>(comp.t_us[i]) - t_lo) / t_span,
                          comp.coords[i].x() / cam.width,
                          comp.coords[i].y() / cam.height);
  }
  // Core-point membership: a stray event can reach a cluster as a border
  // point but never as core, and the distance-maximizing tri-point fit
  // downstream would latch onto exactly such strays.
  std::vector<bool> is_core;
  const std::vector<int> labels =
      dbscan(features, params.dbscan_eps, params.dbscan_min_pts, &is_core);

  int n_clusters = 0;
  for (int l : labels) n_clusters = std::max(n_clusters, l + 1);
  report.clusters.resize(n_clusters);
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (labels[k] == kDbscanNoise || !is_core[k]) continue;
    Cluster& c = report.clusters[labels[k]];
    c.event_idx.push_back(dyn_idx[k]);
    c.points.push_back(comp.coords[dyn_idx[k]]);
  }
  report.clusters.erase(
      std::remove_if(report.clusters.begin(), report.clusters.end(),
                     [](const Cluster& c) { return c.points.empty(); }),
      report.clusters.end());
  for (Cluster& c : report.clusters) {
    c.hull = core::convex_hull(c.points);
    c.perimeter = core::polygon_perimeter(c.hull);
    c.area = core::polygon_area(c.hull);
    c.gamma = core::circularity(c.hull);
  }
  return report;
}

std::optional<std::size_t> select_ball(ClusterReport& report,
                                       const DetectionParams& params) {
  std::optional<std::size_t> best;
  for (std::size_t j = 0; j < report.clusters.size(); ++j) {
    const Cluster& c = report.clusters[j];
    if (!(c.perimeter >= params.perim_min && c.perimeter <= params.perim_max &&
          c.area >= params.area_min && c.area <= params.area_max)) {
      continue;
    }
    if (!std::isfinite(c.gamma)) continue;
    if (!best) {
      best = j;
      continue;
    }
    const Cluster& b = report.clusters[*best];
    // Closest to 1 wins; near-ties go to the larger cluster.
    if (c.gamma < b.gamma - 1e-12 ||
        (std::abs(c.gamma - b.gamma) <= 1e-12 &&
         c.event_idx.size() > b.event_idx.size())) {
      best = j;
    }
  }
  report.selected = best;
  return best;
}

DetectionResult detect(const EventWindow& win,
                       const std::vector<GazePoint>& gaze,
                       const std::vector<core::AngularRate>& imu,
                       const CameraModel& cam, const DetectionParams& params) {
  DetectionResult res;
  res.t_start_us = win.t_start_us;
  res.t_end_us = win.t_end_us;
  res.n_input_events = win.events.size();
  res.found = false;

  if (win.events.empty()) {
    res.reason = "empty_window";
    return res;
  }

  // Stage 1: foveated crop around the gaze sample nearest the window
  // midpoint.
  auto t0 = Clock::now();
  EventWindow roi;
  const EventWindow* active = &win;
  PixelRegion region{0, 0, cam.width, cam.height};
  if (params.use_roi) {
    const std::int64_t mid = (win.t_start_us + win.t_end_us) / 2;
    const GazePoint* nearest = nullptr;
    std::int64_t best_dt = std::numeric_limits<std::int64_t>::max();
    for (const GazePoint& g : gaze) {
      const std::int64_t d = std::abs(g.t_us - mid);
      if (d < best_dt) {
        best_dt = d;
        nearest = &g;
      }
    }
    if (nearest == nullptr || best_dt > 50000) {
      res.reason = "no_gaze";
      res.timings.crop_us = elapsed_us(t0);
      return res;
    }
    roi = crop_roi(win, *nearest, params, cam);
    active = &roi;
    // The attended region: the clamped crop box plus slack for the small
    // compensation displacements.
    const double half = params.roi_w / 2.0;
    const int rx0 = static_cast<int>(std::floor(nearest->x - half)) - 4;
    const int ry0 = static_cast<int>(std::floor(nearest->y - half)) - 4;
    region = {std::max(0, rx0), std::max(0, ry0), params.roi_w + 8,
              params.roi_w + 8};
  }
  res.timings.crop_us = elapsed_us(t0);
  res.n_roi_events = active->events.size();
  if (active->events.empty()) {
    res.reason = "empty_roi";
    return res;
  }

  // Stage 2: ego-motion compensation.
  t0 = Clock::now();
  CompensatedEvents comp;
  try {
    comp = motion_compensate(*active, imu, cam);
  } catch (const core::DataError&) {
    res.reason = "missing_imu";
    res.timings.compensate_us = elapsed_us(t0);
    return res;
  }
  res.omega_mean = comp.omega_mean;
  res.timings.compensate_us = elapsed_us(t0);

  // Stage 3: mean timestamp image.
  t0 = Clock::now();
  TimestampImage img;
  try {
    img = build_timestamp_image(comp, cam, &region);
  } catch (const core::DataError&) {
    res.reason = "off_sensor";
    res.timings.image_us = elapsed_us(t0);
    return res;
  }
  res.timings.image_us = elapsed_us(t0);

  // Stage 4: adaptive threshold + median filter; the map then retains the
  // events linked to dynamic objects.
  t0 = Clock::now();
  const BinaryMap map = threshold_dynamic(img, comp.omega_mean, params);
  const std::vector<std::size_t> dyn_idx = select_dynamic_events(comp, map);
  res.n_dynamic_events = dyn_idx.size();
  res.timings.threshold_us = elapsed_us(t0);

  // Stage 5: DBSCAN + hull shape statistics.
  t0 = Clock::now();
  res.report = cluster_dynamic(comp, dyn_idx, params, cam);
  res.timings.cluster_us = elapsed_us(t0);
  if (res.report.clusters.empty()) {
    res.reason = "no_cluster";
    return res;
  }

  // Stage 6: circularity selection under the geometry gates.
  t0 = Clock::now();
  const auto sel = select_ball(res.report, params);
  res.timings.select_us = elapsed_us(t0);
  if (!sel) {
    res.reason = "no_gate_pass";
    return res;
  }

  const Cluster& ball = res.report.clusters[*sel];
  Vec2 centroid = Vec2::Zero();
  for (const Vec2& p : ball.points) centroid += p;
  centroid /= static_cast<double>(ball.points.size());
  res.center = centroid;
  // The ball's center comes from a circle fit; arcs of a partially fired
  // rim pull a plain centroid off-center. Taubin over the full point set
  // is the stablest choice on noisy rims, with the hull circumcircle and
  // finally the centroid as fallbacks.
  try {
    const auto fit = measure::fit_circle_taubin(ball.points);
    if ((fit.center - centroid).norm() < 2.0 * std::sqrt(ball.area)) {
      res.center = fit.center;
    }
  } catch (const core::NumericalError&) {
    try {
      const auto tri = measure::pick_tri_points(ball.hull);
      const auto fit = measure::fit_circle_3pt(tri[0], tri[1], tri[2]);
      if ((fit.center - centroid).norm() < 2.0 * std::sqrt(ball.area)) {
        res.center = fit.center;
      }
    } catch (const core::NumericalError&) {
    }
  }
  res.gamma = ball.gamma;
  res.ball_events.reserve(ball.event_idx.size());
  for (std::size_t i : ball.event_idx) {
    res.ball_events.push_back(active->events[i]);
  }
  res.found = true;
  return res;
}

std::vector<EventWindow> slice_windows(const std::vector<Event>& events,
                                       double window_dt, std::int64_t t_begin_us,
                                       std::int64_t t_end_us) {
  const auto dt_us = static_cast<std::int64_t>(std::llround(window_dt * 1e6));
  if (dt_us <= 0) throw core::DataError("slice_windows: window_dt must be > 0");
  std::vector<EventWindow> windows;
  std::size_t cursor = 0;
  for (std::int64_t t = t_begin_us; t + dt_us <= t_end_us; t += dt_us) {
    EventWindow w;
    w.t_start_us = t;
    w.t_end_us = t + dt_us;
    while (cursor < events.size() && events[cursor].t_us < t) ++cursor;
    std::size_t i = cursor;
    while (i < events.size() && events[i].t_us < t + dt_us) {
      w.events.push_back(events[i]);
      ++i;
    }
    windows.push_back(std::move(w));
  }
  return windows;
}

void write_detections_csv(const std::string& path,
                          const std::vector<DetectionResult>& results) {
  std::ofstream out(path);
  if (!out) throw core::DataError("cannot write " + path);
  out << "t_start_us,found,cx,cy,gamma,n_events,crop_us,compensate_us,"
         "image_us,threshold_us,cluster_us,select_us,reason\n";
  for (const DetectionResult& r : results) {
    out << r.t_start_us << ',' << (r.found ? 1 : 0) << ','
        << core::format_double(r.center.x()) << ','
        << core::format_double(r.center.y()) << ','
        << core::format_double(r.gamma) << ',' << r.ball_events.size() << ','
        << core::format_double(r.timings.crop_us) << ','
        << core::format_double(r.timings.compensate_us) << ','
        << core::format_double(r.timings.image_us) << ','
        << core::format_double(r.timings.threshold_us) << ','
        << core::format_double(r.timings.cluster_us) << ','
        << core::format_double(r.timings.select_us) << ',' << r.reason << '\n';
  }
}

}  // namespace evball::detect
