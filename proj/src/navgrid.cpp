#include "placekit/navgrid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <queue>
#include <set>
#include <tuple>

namespace placekit {

namespace {

constexpr int kDx[4] = {1, -1, 0, 0};
constexpr int kDy[4] = {0, 0, 1, -1};

}  // namespace

OccupancyGrid dilate_blocked(const OccupancyGrid& grid, int cells) {
  OccupancyGrid out = grid;
  for (int round = 0; round < cells; ++round) {
    std::vector<std::uint8_t> next = out.blocked;
    for (int row = 0; row < out.rows; ++row) {
      for (int col = 0; col < out.cols; ++col) {
        if (out.is_blocked(col, row)) continue;
        bool near_blocked = false;
        for (int dy = -1; dy <= 1 && !near_blocked; ++dy)
          for (int dx = -1; dx <= 1 && !near_blocked; ++dx)
            if (out.in_bounds(col + dx, row + dy) && out.is_blocked(col + dx, row + dy))
              near_blocked = true;
        if (near_blocked) next[out.index(col, row)] = 1;
      }
    }
    out.blocked.swap(next);
  }
  return out;
}

std::optional<std::vector<GridCell>> astar_path(const OccupancyGrid& grid, GridCell start,
                                                GridCell goal) {
  if (!grid.in_bounds(start.col, start.row) || !grid.in_bounds(goal.col, goal.row))
    return std::nullopt;
  if (grid.is_blocked(start.col, start.row) || grid.is_blocked(goal.col, goal.row))
    return std::nullopt;

  const int n = grid.cols * grid.rows;
  const int inf = std::numeric_limits<int>::max();
  std::vector<int> g(n, inf);
  std::vector<int> parent(n, -1);
  std::vector<std::uint8_t> closed(n, 0);
  auto heuristic = [&](int col, int row) {
    return std::abs(col - goal.col) + std::abs(row - goal.row);
  };
  // Ordered set as the open list: (f, col, row) gives a total order, so the
  // expansion sequence does not depend on heap internals.
  std::set<std::tuple<int, int, int>> open;
  const int si = grid.index(start.col, start.row);
  g[si] = 0;
  open.insert({heuristic(start.col, start.row), start.col, start.row});

  while (!open.empty()) {
    const auto [f, col, row] = *open.begin();
    open.erase(open.begin());
    const int idx = grid.index(col, row);
    if (closed[idx]) continue;
    closed[idx] = 1;
    if (col == goal.col && row == goal.row) {
      std::vector<GridCell> path;
      int cur = idx;
      while (cur != -1) {
        path.push_back({cur % grid.cols, cur / grid.cols});
        cur = parent[cur];
      }
      std::reverse(path.begin(), path.end());
      return path;
    }
    for (int k = 0; k < 4; ++k) {
      const int nc = col + kDx[k], nr = row + kDy[k];
      if (!grid.in_bounds(nc, nr) || grid.is_blocked(nc, nr)) continue;
      const int nidx = grid.index(nc, nr);
      if (closed[nidx]) continue;
      const int ng = g[idx] + 1;
      if (ng < g[nidx]) {
        if (g[nidx] != inf) open.erase({g[nidx] + heuristic(nc, nr), nc, nr});
        g[nidx] = ng;
        parent[nidx] = idx;
        open.insert({ng + heuristic(nc, nr), nc, nr});
      }
    }
  }
  return std::nullopt;
}

std::vector<std::uint8_t> reachable_cells(const OccupancyGrid& grid, GridCell start) {
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(grid.cols) * grid.rows, 0);
  if (!grid.in_bounds(start.col, start.row) || grid.is_blocked(start.col, start.row))
    return seen;
  std::queue<int> frontier;
  const int si = grid.index(start.col, start.row);
  seen[si] = 1;
  frontier.push(si);
  while (!frontier.empty()) {
    const int idx = frontier.front();
    frontier.pop();
    const int col = idx % grid.cols, row = idx / grid.cols;
    for (int k = 0; k < 4; ++k) {
      const int nc = col + kDx[k], nr = row + kDy[k];
      if (!grid.in_bounds(nc, nr) || grid.is_blocked(nc, nr)) continue;
      const int nidx = grid.index(nc, nr);
      if (!seen[nidx]) {
        seen[nidx] = 1;
        frontier.push(nidx);
      }
    }
  }
  return seen;
}

double reachability_ratio(const OccupancyGrid& grid, GridCell start,
                          const std::vector<std::vector<int>>& targets) {
  if (targets.empty()) return 1.0;
  const std::vector<std::uint8_t> seen = reachable_cells(grid, start);
  int reached = 0;
  for (const std::vector<int>& cells : targets) {
    bool ok = false;
    for (std::size_t i = 0; i < cells.size() && !ok; ++i) {
      const int idx = cells[i];
      const int col = idx % grid.cols, row = idx / grid.cols;
      if (!grid.is_blocked(col, row) && seen[idx]) ok = true;  // free footprint cell
      for (int k = 0; k < 4 && !ok; ++k) {
        const int nc = col + kDx[k], nr = row + kDy[k];
        if (grid.in_bounds(nc, nr) && !grid.is_blocked(nc, nr) && seen[grid.index(nc, nr)])
          ok = true;
      }
    }
    if (ok) ++reached;
  }
  return static_cast<double>(reached) / static_cast<double>(targets.size());
}

double largest_free_component_ratio(const OccupancyGrid& grid) {
  const int n = grid.cols * grid.rows;
  std::vector<std::uint8_t> seen(n, 0);
  int total_free = 0, largest = 0;
  for (int idx = 0; idx < n; ++idx)
    if (!grid.blocked[idx]) ++total_free;
  if (total_free == 0) return 1.0;
  for (int s = 0; s < n; ++s) {
    if (grid.blocked[s] || seen[s]) continue;
    int size = 0;
    std::queue<int> frontier;
    seen[s] = 1;
    frontier.push(s);
    while (!frontier.empty()) {
      const int idx = frontier.front();
      frontier.pop();
      ++size;
      const int col = idx % grid.cols, row = idx / grid.cols;
      for (int k = 0; k < 4; ++k) {
        const int nc = col + kDx[k], nr = row + kDy[k];
        if (!grid.in_bounds(nc, nr) || grid.is_blocked(nc, nr)) continue;
        const int nidx = grid.index(nc, nr);
        if (!seen[nidx]) {
          seen[nidx] = 1;
          frontier.push(nidx);
        }
      }
    }
    largest = std::max(largest, size);
  }
  return static_cast<double>(largest) / static_cast<double>(total_free);
}

GridCell cell_of(const OccupancyGrid& grid, const Vec2& p) {
  int col = static_cast<int>(std::floor(p.x / grid.resolution));
  int row = static_cast<int>(std::floor(p.y / grid.resolution));
  col = std::clamp(col, 0, grid.cols - 1);
  row = std::clamp(row, 0, grid.rows - 1);
  return {col, row};
}

}  // namespace placekit
