#pragma once

// Shared test utilities: scene builders and independent oracles that
// re-derive expected values through a different algorithm than the library
// under test.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "placekit/geometry.hpp"
#include "placekit/navgrid.hpp"
#include "placekit/rng.hpp"
#include "placekit/scene.hpp"

namespace testsupport {

using namespace placekit;

inline double rel_err(double a, double b) {
  const double denom = std::max({std::abs(a), std::abs(b), 1e-12});
  return std::abs(a - b) / denom;
}

// --- builders ---------------------------------------------------------------

inline SceneSpec make_room(double width, double depth) {
  SceneSpec scene;
  scene.room.width = width;
  scene.room.depth = depth;
  return scene;
}

inline ObjectSpec make_object(const std::string& id, double w, double d, double h = 1.0) {
  ObjectSpec o;
  o.id = id;
  o.name = id;
  o.dims = {w, d, h};
  return o;
}

inline Placement place(const std::string& id, double x, double y, double theta = 0.0) {
  return Placement{id, x, y, theta};
}

// --- geometry oracles -------------------------------------------------------

// Monte-Carlo area of the intersection of two convex polygons: uniform
// samples over the overlap of the two bounding boxes.
inline double mc_intersection_area(const Polygon& a, const Polygon& b, Rng& rng,
                                   int samples = 1000000) {
  auto bbox = [](const Polygon& p) {
    double x0 = p.pts[0].x, x1 = p.pts[0].x, y0 = p.pts[0].y, y1 = p.pts[0].y;
    for (const Vec2& v : p.pts) {
      x0 = std::min(x0, v.x);
      x1 = std::max(x1, v.x);
      y0 = std::min(y0, v.y);
      y1 = std::max(y1, v.y);
    }
    return std::array<double, 4>{x0, x1, y0, y1};
  };
  const auto ba = bbox(a), bb = bbox(b);
  const double x0 = std::max(ba[0], bb[0]), x1 = std::min(ba[1], bb[1]);
  const double y0 = std::max(ba[2], bb[2]), y1 = std::min(ba[3], bb[3]);
  if (x0 >= x1 || y0 >= y1) return 0.0;
  long long hits = 0;
  for (int i = 0; i < samples; ++i) {
    const Vec2 p{rng.uniform(x0, x1), rng.uniform(y0, y1)};
    if (point_in_convex(a, p) && point_in_convex(b, p)) ++hits;
  }
  return (x1 - x0) * (y1 - y0) * static_cast<double>(hits) / samples;
}

// Triangle-fan area, an independent formulation of the polygon area.
inline double fan_area(const Polygon& poly) {
  double s = 0.0;
  for (std::size_t i = 1; i + 1 < poly.pts.size(); ++i) {
    const Vec2& o = poly.pts[0];
    const Vec2& p = poly.pts[i];
    const Vec2& q = poly.pts[i + 1];
    s += ((p.x - o.x) * (q.y - o.y) - (p.y - o.y) * (q.x - o.x)) / 2.0;
  }
  return s;
}

// --- grid oracles -----------------------------------------------------------

// Plain BFS shortest path length in steps; nullopt when unreachable.
inline std::optional<int> bfs_steps(const OccupancyGrid& grid, GridCell start, GridCell goal) {
  if (!grid.in_bounds(start.col, start.row) || !grid.in_bounds(goal.col, goal.row))
    return std::nullopt;
  if (grid.is_blocked(start.col, start.row) || grid.is_blocked(goal.col, goal.row))
    return std::nullopt;
  std::vector<int> dist(static_cast<std::size_t>(grid.cols) * grid.rows, -1);
  std::queue<int> q;
  dist[grid.index(start.col, start.row)] = 0;
  q.push(grid.index(start.col, start.row));
  while (!q.empty()) {
    const int idx = q.front();
    q.pop();
    const int col = idx % grid.cols, row = idx / grid.cols;
    if (col == goal.col && row == goal.row) return dist[idx];
    const int dc[4] = {1, -1, 0, 0}, dr[4] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      const int nc = col + dc[k], nr = row + dr[k];
      if (!grid.in_bounds(nc, nr) || grid.is_blocked(nc, nr)) continue;
      const int nidx = grid.index(nc, nr);
      if (dist[nidx] == -1) {
        dist[nidx] = dist[idx] + 1;
        q.push(nidx);
      }
    }
  }
  return std::nullopt;
}

// Dijkstra with unit weights; written against the naive O(V^2) scan so it
// shares nothing with the A* implementation.
inline std::optional<int> dijkstra_steps(const OccupancyGrid& grid, GridCell start,
                                         GridCell goal) {
  if (!grid.in_bounds(start.col, start.row) || !grid.in_bounds(goal.col, goal.row))
    return std::nullopt;
  if (grid.is_blocked(start.col, start.row) || grid.is_blocked(goal.col, goal.row))
    return std::nullopt;
  const int n = grid.cols * grid.rows;
  const int inf = 1 << 29;
  std::vector<int> dist(n, inf);
  std::vector<char> done(n, 0);
  dist[grid.index(start.col, start.row)] = 0;
  for (int iter = 0; iter < n; ++iter) {
    int best = -1, best_d = inf;
    for (int i = 0; i < n; ++i)
      if (!done[i] && dist[i] < best_d) {
        best = i;
        best_d = dist[i];
      }
    if (best == -1) break;
    done[best] = 1;
    const int col = best % grid.cols, row = best / grid.cols;
    const int dc[4] = {1, -1, 0, 0}, dr[4] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      const int nc = col + dc[k], nr = row + dr[k];
      if (!grid.in_bounds(nc, nr) || grid.is_blocked(nc, nr)) continue;
      const int nidx = grid.index(nc, nr);
      dist[nidx] = std::min(dist[nidx], best_d + 1);
    }
  }
  const int gd = dist[grid.index(goal.col, goal.row)];
  if (gd >= inf) return std::nullopt;
  return gd;
}

// Union-find over free cells; returns the size of the largest free component
// and the total number of free cells.
inline std::pair<int, int> union_find_largest_free(const OccupancyGrid& grid) {
  const int n = grid.cols * grid.rows;
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  auto unite = [&](int a, int b) { parent[find(a)] = find(b); };
  for (int row = 0; row < grid.rows; ++row) {
    for (int col = 0; col < grid.cols; ++col) {
      if (grid.is_blocked(col, row)) continue;
      if (grid.in_bounds(col + 1, row) && !grid.is_blocked(col + 1, row))
        unite(grid.index(col, row), grid.index(col + 1, row));
      if (grid.in_bounds(col, row + 1) && !grid.is_blocked(col, row + 1))
        unite(grid.index(col, row), grid.index(col, row + 1));
    }
  }
  std::map<int, int> sizes;
  int total_free = 0;
  for (int row = 0; row < grid.rows; ++row)
    for (int col = 0; col < grid.cols; ++col)
      if (!grid.is_blocked(col, row)) {
        ++total_free;
        sizes[find(grid.index(col, row))] += 1;
      }
  int largest = 0;
  for (const auto& [root, size] : sizes) largest = std::max(largest, size);
  return {largest, total_free};
}

inline OccupancyGrid random_grid(int cols, int rows, double block_prob, Rng& rng) {
  OccupancyGrid grid;
  grid.cols = cols;
  grid.rows = rows;
  grid.resolution = 1.0;
  grid.blocked.resize(static_cast<std::size_t>(cols) * rows);
  for (auto& b : grid.blocked) b = rng.uniform01() < block_prob ? 1 : 0;
  return grid;
}

}  // namespace testsupport
