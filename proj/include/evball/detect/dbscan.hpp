#pragma once

#include <vector>

#include "evball/core/types.hpp"

namespace evball::detect {

constexpr int kDbscanNoise = -1;

/// Density-based clustering over 3D feature points with a Euclidean eps
/// neighborhood. Returns one label per point: kDbscanNoise or a cluster id
/// starting at 0. Neighbor queries use an eps-sized grid index. When
/// is_core is given it receives one flag per point; border points carry a
/// label but not the flag.
std::vector<int> dbscan(const std::vector<core::Vec3>& points, double eps,
                        int min_pts, std::vector<bool>* is_core = nullptr);

}  // namespace evball::detect
