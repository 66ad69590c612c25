#include "evball/detect/dbscan.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

namespace evball::detect {

namespace {

struct UnionFind {
  std::vector<std::uint32_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0u);
  }
  std::uint32_t find(std::uint32_t a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[b] = a;
  }
};

}  // namespace

// Decomposed DBSCAN: points sorted along the first feature let an eps
// window bound the candidate range, core flags come from an early-exit
// neighbor count, clusters are the connected components of core-core eps
// pairs (each unordered pair visited once), and border points attach to
// the first core neighbor. Same clustering as the textbook formulation.
// All passes run in sorted index space so candidate scans stay contiguous.
std::vector<int> dbscan(const std::vector<core::Vec3>& points, double eps,
                        int min_pts, std::vector<bool>* is_core) {
  const std::size_t n = points.size();
  std::vector<int> labels(n, kDbscanNoise);
  if (is_core) is_core->assign(n, false);
  if (n == 0) return labels;

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return points[a].x() < points[b].x();
  });
  std::vector<float> sx(n), sy(n), sz(n);
  for (std::size_t j = 0; j < n; ++j) {
    sx[j] = static_cast<float>(points[order[j]].x());
    sy[j] = static_cast<float>(points[order[j]].y());
    sz[j] = static_cast<float>(points[order[j]].z());
  }

  const float feps = static_cast<float>(eps) * (1.0f + 1e-6f);
  const float eps2 = feps * feps;
  auto close = [&](std::size_t a, std::size_t b) {
    const float dy = sy[a] - sy[b];
    if (dy > feps || dy < -feps) return false;
    const float dx = sx[a] - sx[b];
    const float dz = sz[a] - sz[b];
    return dx * dx + dy * dy + dz * dz <= eps2;
  };

  // Pass 1: core flags. The count includes the point itself.
  std::vector<bool> core_flag(n, false);
  std::size_t lo = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (sx[lo] < sx[i] - feps) ++lo;
    int count = 1;
    for (std::size_t j = lo; j < n && count < min_pts; ++j) {
      if (j == i) continue;
      if (sx[j] > sx[i] + feps) break;
      if (close(i, j)) ++count;
    }
    core_flag[i] = count >= min_pts;
  }

  // Pass 2: union connected cores; attach borders to their first core
  // neighbor ahead or behind in the sweep.
  UnionFind uf(n);
  lo = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (sx[lo] < sx[i] - feps) ++lo;
    const auto ui = static_cast<std::uint32_t>(i);
    if (core_flag[i]) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (sx[j] > sx[i] + feps) break;
        if (core_flag[j] &&
            uf.find(ui) != uf.find(static_cast<std::uint32_t>(j)) &&
            close(i, j)) {
          uf.unite(ui, static_cast<std::uint32_t>(j));
        }
      }
    } else {
      for (std::size_t j = lo; j < n; ++j) {
        if (j == i) continue;
        if (sx[j] > sx[i] + feps) break;
        if (core_flag[j] && close(i, j)) {
          uf.unite(static_cast<std::uint32_t>(j), ui);
          break;
        }
      }
    }
  }

  // Assign compact cluster ids to components containing at least one core,
  // then map back to the caller's point order.
  std::vector<int> root_label(n, kDbscanNoise);
  int next_id = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (!core_flag[j]) continue;
    const std::uint32_t r = uf.find(static_cast<std::uint32_t>(j));
    if (root_label[r] == kDbscanNoise) root_label[r] = next_id++;
  }
  for (std::size_t j = 0; j < n; ++j) {
    const std::uint32_t r = uf.find(static_cast<std::uint32_t>(j));
    // Untouched noise points still sit in their own singleton component.
    if (root_label[r] >= 0 && (core_flag[j] || r != j)) {
      labels[order[j]] = root_label[r];
    }
    if (is_core && core_flag[j]) (*is_core)[order[j]] = true;
  }
  return labels;
}

}  // namespace evball::detect
