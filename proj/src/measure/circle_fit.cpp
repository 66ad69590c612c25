#include "evball/measure/circle_fit.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "evball/core/errors.hpp"

namespace evball::measure {

namespace {

double rms_residual(const std::vector<Vec2>& pts, const Vec2& c, double r) {
  if (pts.empty()) return 0.0;
  double acc = 0.0;
  for (const Vec2& p : pts) {
    const double d = (p - c).norm() - r;
    acc += d * d;
  }
  return std::sqrt(acc / pts.size());
}

}  // namespace

std::string to_string(FitMethod m) {
  switch (m) {
    case FitMethod::kTriPoint:
      return "tripoint";
    case FitMethod::kTaubin:
      return "taubin";
    case FitMethod::kEllipsePca:
      return "pca";
  }
  return "tripoint";
}

FitMethod fit_method_from_string(const std::string& name) {
  if (name == "tripoint") return FitMethod::kTriPoint;
  if (name == "taubin") return FitMethod::kTaubin;
  if (name == "pca") return FitMethod::kEllipsePca;
  throw core::DataError("unknown fit method: " + name);
}

std::array<Vec2, 3> pick_tri_points(const std::vector<Vec2>& hull) {
  if (hull.size() < 3) {
    throw core::NumericalError("pick_tri_points: degenerate batch hull");
  }
  double best = -1.0;
  std::array<std::size_t, 3> pick = {0, 1, 2};
  for (std::size_t a = 0; a + 2 < hull.size(); ++a) {
    for (std::size_t b = a + 1; b + 1 < hull.size(); ++b) {
      const double dab = (hull[a] - hull[b]).norm();
      for (std::size_t c = b + 1; c < hull.size(); ++c) {
        const double s =
            dab + (hull[b] - hull[c]).norm() + (hull[a] - hull[c]).norm();
        if (s > best) {  // strict: earlier lexicographic triple wins ties
          best = s;
          pick = {a, b, c};
        }
      }
    }
  }
  return {hull[pick[0]], hull[pick[1]], hull[pick[2]]};
}

CircleFit fit_circle_3pt(const Vec2& p1, const Vec2& p2, const Vec2& p3) {
  const double area2 = (p2.x() - p1.x()) * (p3.y() - p1.y()) -
                       (p2.y() - p1.y()) * (p3.x() - p1.x());
  if (std::abs(area2) < 2e-12) {  // triangle area below 1e-12 px^2
    throw core::NumericalError("fit_circle_3pt: collinear points");
  }
  // Perpendicular-bisector linear system for the center.
  const double a11 = 2.0 * (p2.x() - p1.x()), a12 = 2.0 * (p2.y() - p1.y());
  const double a21 = 2.0 * (p3.x() - p1.x()), a22 = 2.0 * (p3.y() - p1.y());
  const double b1 = p2.squaredNorm() - p1.squaredNorm();
  const double b2 = p3.squaredNorm() - p1.squaredNorm();
  const double det = a11 * a22 - a12 * a21;
  CircleFit fit;
  fit.method = FitMethod::kTriPoint;
  fit.center = Vec2((b1 * a22 - b2 * a12) / det, (a11 * b2 - a21 * b1) / det);
  fit.radius = (p1 - fit.center).norm();
  fit.residual = rms_residual({p1, p2, p3}, fit.center, fit.radius);
  return fit;
}

CircleFit fit_circle_taubin(const std::vector<Vec2>& points) {
  if (points.size() < 3) {
    throw core::NumericalError("fit_circle_taubin: needs >= 3 points");
  }
  Vec2 mean = Vec2::Zero();
  for (const Vec2& p : points) mean += p;
  mean /= static_cast<double>(points.size());

  double mxx = 0, myy = 0, mxy = 0, mxz = 0, myz = 0, mzz = 0;
  for (const Vec2& p : points) {
    const double u = p.x() - mean.x();
    const double v = p.y() - mean.y();
    const double z = u * u + v * v;
    mxx += u * u;
    myy += v * v;
    mxy += u * v;
    mxz += u * z;
    myz += v * z;
    mzz += z * z;
  }
  const double n = static_cast<double>(points.size());
  mxx /= n;
  myy /= n;
  mxy /= n;
  mxz /= n;
  myz /= n;
  mzz /= n;

  const double mz = mxx + myy;
  const double cov_xy = mxx * myy - mxy * mxy;
  const double var_z = mzz - mz * mz;
  const double a3 = 4.0 * mz;
  const double a2 = -3.0 * mz * mz - mzz;
  const double a1 = var_z * mz + 4.0 * cov_xy * mz - mxz * mxz - myz * myz;
  const double a0 = mxz * (mxz * myy - myz * mxy) +
                    myz * (myz * mxx - mxz * mxy) - var_z * cov_xy;

  // Newton on the Taubin characteristic polynomial, starting at 0.
  double x = 0.0, y = a0;
  for (int iter = 0; iter < 99; ++iter) {
    const double dy = a1 + x * (2.0 * a2 + 3.0 * a3 * x);
    const double x_new = x - y / dy;
    if (!std::isfinite(x_new) || x_new == x) break;
    const double y_new = a0 + x_new * (a1 + x_new * (a2 + x_new * a3));
    if (std::abs(y_new) >= std::abs(y)) break;
    x = x_new;
    y = y_new;
  }
  const double det = x * x - x * mz + cov_xy;
  if (std::abs(det) < 1e-14) {
    throw core::NumericalError("fit_circle_taubin: degenerate point set");
  }
  CircleFit fit;
  fit.method = FitMethod::kTaubin;
  const double cx = (mxz * (myy - x) - myz * mxy) / det / 2.0;
  const double cy = (myz * (mxx - x) - mxz * mxy) / det / 2.0;
  fit.center = mean + Vec2(cx, cy);
  fit.radius = std::sqrt(cx * cx + cy * cy + mz);
  fit.residual = rms_residual(points, fit.center, fit.radius);
  return fit;
}

CircleFit fit_ellipse_pca(const std::vector<Vec2>& points) {
  if (points.size() < 2) {
    throw core::NumericalError("fit_ellipse_pca: needs >= 2 points");
  }
  Vec2 mean = Vec2::Zero();
  for (const Vec2& p : points) mean += p;
  mean /= static_cast<double>(points.size());

  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const Vec2& p : points) {
    const Vec2 d = p - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(points.size());

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
  const double lam_max = eig.eigenvalues().maxCoeff();
  if (lam_max < 1e-18) {
    throw core::NumericalError("fit_ellipse_pca: degenerate covariance");
  }
  CircleFit fit;
  fit.method = FitMethod::kEllipsePca;
  fit.center = mean;
  // Uniform samples on an ellipse rim have axis variance a^2/2.
  fit.radius = std::sqrt(2.0 * lam_max);
  fit.residual = rms_residual(points, fit.center, fit.radius);
  return fit;
}

}  // namespace evball::measure
