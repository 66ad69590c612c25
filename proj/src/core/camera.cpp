#include "evball/core/camera.hpp"

#include <cmath>

#include "evball/core/errors.hpp"

namespace evball::core {

Mat3 CameraModel::K() const {
  Mat3 k;
  k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

Mat3 CameraModel::K_inv() const {
  Mat3 k;
  k << 1.0 / fx, 0.0, -cx / fx, 0.0, 1.0 / fy, -cy / fy, 0.0, 0.0, 1.0;
  return k;
}

Vec2 distort_normalized(const Vec2& xn, const CameraModel& cam) {
  const double r2 = xn.squaredNorm();
  const double scale = 1.0 + cam.k1 * r2 + cam.k2 * r2 * r2;
  return xn * scale;
}

Vec2 project(const Vec3& p_cam, const CameraModel& cam) {
  if (p_cam.z() <= 0.0) {
    throw DataError("project: point at or behind the camera (z <= 0)");
  }
  const Vec2 xn(p_cam.x() / p_cam.z(), p_cam.y() / p_cam.z());
  const Vec2 xd = distort_normalized(xn, cam);
  return {cam.fx * xd.x() + cam.cx, cam.fy * xd.y() + cam.cy};
}

Vec2 undistort(const Vec2& pt, const CameraModel& cam) {
  const Vec2 xd((pt.x() - cam.cx) / cam.fx, (pt.y() - cam.cy) / cam.fy);
  Vec2 xu = xd;
  // Fixed-point inversion of x_d = x_u * (1 + k1 r^2 + k2 r^4).
  constexpr int kMaxIter = 100;
  constexpr double kTolNorm = 1e-13;  // normalized units, ~1e-10 px at f=667
  for (int i = 0; i < kMaxIter; ++i) {
    const double r2 = xu.squaredNorm();
    const double scale = 1.0 + cam.k1 * r2 + cam.k2 * r2 * r2;
    if (scale <= 0.0) {
      throw NumericalError("undistort: non-positive distortion scale");
    }
    const Vec2 next = xd / scale;
    const double step = (next - xu).norm();
    xu = next;
    if (step < kTolNorm) {
      return {cam.fx * xu.x() + cam.cx, cam.fy * xu.y() + cam.cy};
    }
  }
  throw NumericalError("undistort: fixed-point iteration did not converge");
}

Vec3 back_project(const Vec2& pt_undist, double depth, const CameraModel& cam) {
  if (depth <= 0.0) {
    throw DataError("back_project: depth must be positive");
  }
  return {depth * (pt_undist.x() - cam.cx) / cam.fx,
          depth * (pt_undist.y() - cam.cy) / cam.fy, depth};
}

}  // namespace evball::core
