#pragma once

#include <vector>

#include "evball/core/types.hpp"

namespace evball::core {

/// Convex hull by Andrew's monotone chain. Returns vertices in
/// counter-clockwise order without the closing point. Collinear input
/// collapses to the two extreme points; fewer than 3 distinct points are
/// returned as-is.
std::vector<Vec2> convex_hull(std::vector<Vec2> points);

double polygon_perimeter(const std::vector<Vec2>& poly);

/// Shoelace area, non-negative for the CCW hulls produced above.
double polygon_area(const std::vector<Vec2>& poly);

/// Isoperimetric ratio P^2 / (4*pi*A). 1 for a disk, larger for anything
/// else; +inf for degenerate polygons with zero area.
double circularity(const std::vector<Vec2>& poly);

/// Axis-angle of a rotation matrix (inverse of Rodrigues).
Vec3 log_rotation(const Mat3& r);

}  // namespace evball::core
