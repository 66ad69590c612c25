#include "evball/core/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <limits>

namespace evball::core {

namespace {
double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}
}  // namespace

std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  // Large event clouds get snapped to a 1/64 px grid first: the packed
  // integer sort is much cheaper and the hull moves by at most the grid
  // step, far below anything the shape statistics can resolve.
  if (pts.size() > 64) {
    std::vector<std::int64_t> keys(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto qx = static_cast<std::int64_t>(
          std::llround(pts[i].x() * 64.0) + (1ll << 30));
      const auto qy = static_cast<std::int64_t>(
          std::llround(pts[i].y() * 64.0) + (1ll << 30));
      keys[i] = (qx << 32) | qy;
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    pts.resize(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) {
      pts[i] = Vec2(static_cast<double>((keys[i] >> 32) - (1ll << 30)) / 64.0,
                    static_cast<double>((keys[i] & 0xffffffffll) - (1ll << 30)) /
                        64.0);
    }
  } else {
    std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
      return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
  }
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vec2& a, const Vec2& b) {
                          return a.x() == b.x() && a.y() == b.y();
                        }),
            pts.end());
  const std::size_t n = pts.size();
  if (n < 3) return pts;

  std::vector<Vec2> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {  // lower
    while (k >= 2 && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = n - 1; i-- > 0;) {  // upper
    while (k >= lower && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

double polygon_perimeter(const std::vector<Vec2>& poly) {
  if (poly.size() < 2) return 0.0;
  double perim = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    perim += (poly[(i + 1) % poly.size()] - poly[i]).norm();
  }
  return perim;
}

double polygon_area(const std::vector<Vec2>& poly) {
  if (poly.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    twice += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * std::abs(twice);
}

double circularity(const std::vector<Vec2>& poly) {
  const double area = polygon_area(poly);
  if (area <= 0.0) return std::numeric_limits<double>::infinity();
  const double perim = polygon_perimeter(poly);
  return perim * perim / (4.0 * M_PI * area);
}

Vec3 log_rotation(const Mat3& r) {
  const double cos_theta = std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
  const double theta = std::acos(cos_theta);
  if (theta < 1e-12) return Vec3::Zero();
  if (theta > M_PI - 1e-6) {
    // Near pi the skew part vanishes; recover the axis from the diagonal.
    Vec3 axis;
    for (int i = 0; i < 3; ++i) {
      axis[i] = std::sqrt(std::max(0.0, (r(i, i) + 1.0) / 2.0));
    }
    if (r(0, 1) + r(1, 0) < 0.0) axis.y() = -axis.y();
    if (r(0, 2) + r(2, 0) < 0.0) axis.z() = -axis.z();
    return theta * axis.normalized();
  }
  const Vec3 w(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  return (theta / (2.0 * std::sin(theta))) * w;
}

}  // namespace evball::core
