#pragma once

#include <array>
#include <string>
#include <vector>

#include "evball/core/types.hpp"

namespace evball::measure {

using core::Vec2;

enum class FitMethod { kTriPoint, kTaubin, kEllipsePca };

std::string to_string(FitMethod m);
FitMethod fit_method_from_string(const std::string& name);

struct CircleFit {
  Vec2 center = Vec2::Zero();
  double radius = 0.0;
  FitMethod method = FitMethod::kTriPoint;
  double residual = 0.0;  // rms distance of the input points to the circle
};

/// Picks the three hull vertices maximizing the sum of their pairwise
/// Euclidean distances (exhaustive over hull triples, small by
/// construction). Ties break on lexicographic vertex index. Throws
/// NumericalError when the hull is degenerate (< 3 vertices).
std::array<Vec2, 3> pick_tri_points(const std::vector<Vec2>& hull);

/// Exact circumcircle through three non-collinear points. Throws
/// NumericalError when the triangle is degenerate.
CircleFit fit_circle_3pt(const Vec2& p1, const Vec2& p2, const Vec2& p3);

/// Taubin's algebraic circle fit; needs >= 3 non-collinear points.
CircleFit fit_circle_taubin(const std::vector<Vec2>& points);

/// PCA ellipse: mean center, axes from the covariance eigen-decomposition
/// scaled for on-rim samples (semi-axis = sqrt(2 * eigenvalue)); the
/// semi-major axis is reported as the radius. Needs >= 2 distinct points.
CircleFit fit_ellipse_pca(const std::vector<Vec2>& points);

}  // namespace evball::measure
