#include "evball/measure/measure.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "evball/core/errors.hpp"
#include "evball/core/geometry.hpp"
#include "evball/core/io.hpp"

namespace evball::measure {

std::vector<Batch> partition_batches(const std::vector<double>& t_rel,
                                     const std::vector<Vec2>& points,
                                     double window_t, int m_batches) {
  if (m_batches < 1) throw core::DataError("partition_batches: M must be >= 1");
  if (t_rel.size() != points.size() || t_rel.empty()) {
    throw core::DataError("partition_batches: empty or mismatched input");
  }
  std::vector<Batch> batches(m_batches);
  for (int m = 1; m <= m_batches; ++m) {
    batches[m - 1].index = m;
    batches[m - 1].t_mid = (2.0 * m - 1.0) * window_t / (2.0 * m_batches);
  }
  for (std::size_t i = 0; i < t_rel.size(); ++i) {
    int m = static_cast<int>(std::floor(t_rel[i] * m_batches / window_t)) + 1;
    if (m > m_batches) m = m_batches;  // t == T joins the last batch
    if (m < 1) m = 1;
    batches[m - 1].points.push_back(points[i]);
  }
  return batches;
}

double depth_from_radius(const CircleFit& fit, const CameraModel& cam,
                         const core::PhysicsParams& physics) {
  if (fit.radius <= 0.0) {
    throw core::DataError("depth_from_radius: radius must be > 0");
  }
  return cam.fx * physics.radius / fit.radius;
}

WindowMeasurements measure_window(const std::vector<Event>& ball_events,
                                  std::int64_t t_start_us,
                                  std::int64_t t_end_us,
                                  const CameraModel& cam,
                                  const core::PhysicsParams& physics,
                                  const MeasureOptions& opt) {
  if (ball_events.empty()) {
    throw core::DataError("measure_window: no ball events");
  }
  const double window_t = static_cast<double>(t_end_us - t_start_us) * 1e-6;

  // Undistort once per unique pixel; duplicates would only skew the
  // non-hull fit methods and degrade the hull pass.
  std::vector<double> t_rel;
  std::vector<Vec2> pts;
  t_rel.reserve(ball_events.size());
  pts.reserve(ball_events.size());
  for (const Event& e : ball_events) {
    t_rel.push_back(static_cast<double>(e.t_us - t_start_us) * 1e-6);
    pts.push_back(core::undistort(
        Vec2(static_cast<double>(e.x), static_cast<double>(e.y)), cam));
  }

  const std::vector<Batch> batches =
      partition_batches(t_rel, pts, window_t, opt.batches);

  WindowMeasurements out;
  for (const Batch& b : batches) {
    if (b.points.size() < 3) {
      out.warnings.push_back("batch " + std::to_string(b.index) +
                             ": too few events, skipped");
      continue;
    }
    // Unique pixel coordinates keep duplicate events from degenerating the
    // hull walk.
    std::vector<Vec2> uniq = b.points;
    std::sort(uniq.begin(), uniq.end(), [](const Vec2& a, const Vec2& c) {
      return a.x() < c.x() || (a.x() == c.x() && a.y() < c.y());
    });
    uniq.erase(std::unique(uniq.begin(), uniq.end(),
                           [](const Vec2& a, const Vec2& c) {
                             return a.x() == c.x() && a.y() == c.y();
                           }),
               uniq.end());

    CircleFit fit;
    try {
      switch (opt.method) {
        case FitMethod::kTriPoint: {
          const auto hull = core::convex_hull(uniq);
          const auto tri = pick_tri_points(hull);
          fit = fit_circle_3pt(tri[0], tri[1], tri[2]);
          break;
        }
        case FitMethod::kTaubin:
          fit = fit_circle_taubin(uniq);
          break;
        case FitMethod::kEllipsePca:
          fit = fit_ellipse_pca(uniq);
          break;
      }
    } catch (const core::NumericalError&) {
      out.warnings.push_back("batch " + std::to_string(b.index) +
                             ": degenerate geometry, skipped");
      continue;
    }
    if (fit.radius <= 0.0) {
      out.warnings.push_back("batch " + std::to_string(b.index) +
                             ": non-positive radius, skipped");
      continue;
    }

    BallMeasurement m;
    m.t = b.t_mid;
    m.cx_img = fit.center.x();
    m.cy_img = fit.center.y();
    m.r_img = fit.radius;
    m.depth = depth_from_radius(fit, cam, physics);
    m.unreliable = fit.radius < 1.0;
    if (m.unreliable) {
      out.warnings.push_back("batch " + std::to_string(b.index) +
                             ": radius below 1 px, depth unreliable");
    }
    out.measurements.push_back(m);
  }
  if (out.measurements.empty()) {
    throw core::NumericalError("measure_window: every batch degenerate");
  }
  std::sort(out.measurements.begin(), out.measurements.end(),
            [](const BallMeasurement& a, const BallMeasurement& b) {
              return a.t < b.t;
            });
  return out;
}

void write_measurements_csv(const std::string& path,
                            const std::vector<MeasurementRow>& rows) {
  std::ofstream out(path);
  if (!out) throw core::DataError("cannot write " + path);
  out << "t_s,cx,cy,r,depth,method\n";
  for (const MeasurementRow& r : rows) {
    out << core::format_double(r.t) << ',' << core::format_double(r.cx) << ','
        << core::format_double(r.cy) << ',' << core::format_double(r.r) << ','
        << core::format_double(r.depth) << ',' << r.method << '\n';
  }
}

std::vector<MeasurementRow> read_measurements_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw core::DataError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw core::DataError("empty file: " + path);
  std::vector<MeasurementRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = core::split_csv_line(line);
    if (f.size() != 6) throw core::DataError("bad measurement row in " + path);
    MeasurementRow r;
    r.t = std::stod(f[0]);
    r.cx = std::stod(f[1]);
    r.cy = std::stod(f[2]);
    r.r = std::stod(f[3]);
    r.depth = std::stod(f[4]);
    r.method = f[5];
    rows.push_back(r);
  }
  return rows;
}

}  // namespace evball::measure
