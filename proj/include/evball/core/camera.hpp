#pragma once

#include "evball/core/types.hpp"

namespace evball::core {

/// Pinhole camera with two radial distortion coefficients.
struct CameraModel {
  double fx = 667.0;
  double fy = 667.0;
  double cx = 320.0;
  double cy = 240.0;
  double k1 = 0.0;
  double k2 = 0.0;
  int width = 640;
  int height = 480;

  Mat3 K() const;
  Mat3 K_inv() const;

  bool contains(double u, double v) const {
    return u >= 0.0 && u < static_cast<double>(width) && v >= 0.0 &&
           v < static_cast<double>(height);
  }
};

/// Applies the forward radial distortion model to normalized coordinates.
Vec2 distort_normalized(const Vec2& xn, const CameraModel& cam);

/// Pinhole projection with forward distortion. Throws DataError for points
/// at or behind the camera plane (z <= 0).
Vec2 project(const Vec3& p_cam, const CameraModel& cam);

/// Inverts the radial distortion by fixed-point iteration and re-projects
/// through K. Throws NumericalError if the iteration does not converge,
/// which only happens for pathological distortion parameters.
Vec2 undistort(const Vec2& pt, const CameraModel& cam);

/// Back-projects an undistorted pixel to a 3D point in the camera frame:
/// depth * K^-1 * [u, v, 1]. Requires depth > 0.
Vec3 back_project(const Vec2& pt_undist, double depth, const CameraModel& cam);

}  // namespace evball::core
