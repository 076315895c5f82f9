#pragma once

#include <optional>
#include <vector>

#include "placekit/geometry.hpp"

namespace placekit {

struct GridCell {
  int col = 0;
  int row = 0;
};

inline bool operator==(const GridCell& a, const GridCell& b) {
  return a.col == b.col && a.row == b.row;
}

// Marks every cell within Chebyshev distance 1 of a blocked cell as blocked.
// One round approximates inflating obstacles by the agent radius (0.1 m at
// the default 0.1 m resolution).
OccupancyGrid dilate_blocked(const OccupancyGrid& grid, int cells = 1);

// 4-connected A* with Manhattan heuristic.  Expansion order is fully
// deterministic: open-set ties are broken by (f, col, row).  Returns the cell
// path including both endpoints, or nullopt when no path exists or either
// endpoint is blocked.  Path cost is path.size()-1 steps.
std::optional<std::vector<GridCell>> astar_path(const OccupancyGrid& grid, GridCell start,
                                                GridCell goal);

// Free cells reachable from `start` via 4-connected moves (flood fill).
// Returns a bitmap over grid cells; all false when `start` is blocked or out
// of bounds.
std::vector<std::uint8_t> reachable_cells(const OccupancyGrid& grid, GridCell start);

// Fraction of targets reached.  Each target is a set of footprint cell
// indices; it counts as reached when some free cell that belongs to the set
// or is 4-adjacent to it is reachable from `start`.  Returns 1.0 when
// `targets` is empty.
double reachability_ratio(const OccupancyGrid& grid, GridCell start,
                          const std::vector<std::vector<int>>& targets);

// Size of the largest 4-connected free component divided by the number of
// free cells; 1.0 when the grid has no free cells.
double largest_free_component_ratio(const OccupancyGrid& grid);

// Cell containing a point; clamped to the grid bounds.
GridCell cell_of(const OccupancyGrid& grid, const Vec2& p);

}  // namespace placekit
