#pragma once

#include <cstdint>
#include <vector>

#include "placekit/scene.hpp"

namespace placekit {

// Convex polygon with counterclockwise vertex order.  All footprints and
// clearance regions are rectangles, but every routine below works for any
// convex CCW polygon.
struct Polygon {
  std::vector<Vec2> pts;
};

// Rotation of the object frame: local +y is the facing direction.
Vec2 rotate(const Vec2& v, double theta);
Vec2 facing_direction(double theta);

// The four footprint corners of a w x d object at the given pose, CCW.
Polygon footprint_polygon(double width, double depth, const Placement& pose);
Polygon footprint_polygon(const ObjectSpec& object, const Placement& pose);

// Room rectangle [0,width] x [0,depth] as a polygon.
Polygon room_polygon(const RoomSpec& room);

double polygon_area(const Polygon& poly);

bool is_ccw_convex(const Polygon& poly, double eps = 1e-9);

// Boundary-inclusive point membership (within eps of an edge counts inside).
bool point_in_convex(const Polygon& poly, const Vec2& p, double eps = 1e-9);

// Sutherland-Hodgman clip of `subject` against convex `clip`.  May return a
// degenerate (<3 vertex) polygon when the overlap is empty.
Polygon clip_convex(const Polygon& subject, const Polygon& clip);

// Area of the intersection of two convex polygons; 0 when disjoint.
double intersection_area(const Polygon& a, const Polygon& b);

// True when `inner` lies entirely inside convex `outer` (within tol area).
bool polygon_inside(const Polygon& inner, const Polygon& outer, double tol = 1e-9);

// 0 when the point is inside the polygon, else distance to the boundary.
double distance_point_polygon(const Vec2& p, const Polygon& poly);

// True when the open segment a..b passes through the polygon's interior
// (touching the boundary for a zero-length stretch does not count).
bool segment_crosses_polygon(const Vec2& a, const Vec2& b, const Polygon& poly,
                             double eps = 1e-9);

// Rectangle of size (width + 2*margin) x depth attached flush to the +y face
// of a functional object, rotated with it.  Models the space a person needs
// to stand in front of the object to use it.
// Raises a contract error when the object is not functional or depth <= 0.
Polygon clearance_region(const ObjectSpec& object, const Placement& pose,
                         double depth = 0.8, double margin = 0.1);

// Cell (col,row) covers [col*res, (col+1)*res) x [row*res, (row+1)*res);
// state is stored row-major.  A cell is blocked when its center falls inside
// any blocker polygon or outside the room rectangle.
struct OccupancyGrid {
  int cols = 0;
  int rows = 0;
  double resolution = 0.0;
  std::vector<std::uint8_t> blocked;

  int index(int col, int row) const { return row * cols + col; }
  bool in_bounds(int col, int row) const {
    return col >= 0 && col < cols && row >= 0 && row < rows;
  }
  bool is_blocked(int col, int row) const { return blocked[index(col, row)] != 0; }
  Vec2 cell_center(int col, int row) const {
    return {(col + 0.5) * resolution, (row + 0.5) * resolution};
  }
  int free_count() const;
};

// Rasterizes the room with the given blockers.  cols = ceil(width/res),
// rows = ceil(depth/res).  Raises a contract error when res <= 0 or res >
// min(width, depth).
OccupancyGrid rasterize(const RoomSpec& room, const std::vector<Polygon>& blockers,
                        double resolution);

// Indices of cells whose centers fall inside the polygon.
std::vector<int> polygon_cells(const OccupancyGrid& grid, const Polygon& poly);

}  // namespace placekit
