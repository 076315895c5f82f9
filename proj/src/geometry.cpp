#include "placekit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "placekit/error.hpp"

namespace placekit {

namespace {

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double dist_point_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
  const double px = a.x + t * dx - p.x, py = a.y + t * dy - p.y;
  return std::sqrt(px * px + py * py);
}

}  // namespace

Vec2 rotate(const Vec2& v, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {v.x * c - v.y * s, v.x * s + v.y * c};
}

Vec2 facing_direction(double theta) { return rotate({0.0, 1.0}, theta); }

Polygon footprint_polygon(double width, double depth, const Placement& pose) {
  const double hw = width / 2.0, hd = depth / 2.0;
  const Vec2 corners[4] = {{-hw, -hd}, {hw, -hd}, {hw, hd}, {-hw, hd}};
  Polygon poly;
  poly.pts.reserve(4);
  for (const Vec2& c : corners) {
    Vec2 r = rotate(c, pose.theta);
    poly.pts.push_back({r.x + pose.x, r.y + pose.y});
  }
  return poly;
}

Polygon footprint_polygon(const ObjectSpec& object, const Placement& pose) {
  return footprint_polygon(object.dims[0], object.dims[1], pose);
}

Polygon room_polygon(const RoomSpec& room) {
  return Polygon{{{0.0, 0.0}, {room.width, 0.0}, {room.width, room.depth}, {0.0, room.depth}}};
}

double polygon_area(const Polygon& poly) {
  const std::size_t n = poly.pts.size();
  if (n < 3) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly.pts[i];
    const Vec2& b = poly.pts[(i + 1) % n];
    s += a.x * b.y - b.x * a.y;
  }
  return s / 2.0;
}

bool is_ccw_convex(const Polygon& poly, double eps) {
  const std::size_t n = poly.pts.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& o = poly.pts[i];
    const Vec2& a = poly.pts[(i + 1) % n];
    const Vec2& b = poly.pts[(i + 2) % n];
    if (cross(o, a, b) < -eps) return false;
  }
  return polygon_area(poly) > eps * eps;
}

bool point_in_convex(const Polygon& poly, const Vec2& p, double eps) {
  const std::size_t n = poly.pts.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (cross(poly.pts[i], poly.pts[(i + 1) % n], p) < -eps) return false;
  }
  return true;
}

Polygon clip_convex(const Polygon& subject, const Polygon& clip) {
  Polygon out = subject;
  const std::size_t m = clip.pts.size();
  for (std::size_t i = 0; i < m && out.pts.size() >= 1; ++i) {
    const Vec2& ca = clip.pts[i];
    const Vec2& cb = clip.pts[(i + 1) % m];
    Polygon in;
    in.pts.swap(out.pts);
    const std::size_t n = in.pts.size();
    for (std::size_t j = 0; j < n; ++j) {
      const Vec2& a = in.pts[j];
      const Vec2& b = in.pts[(j + 1) % n];
      const double da = cross(ca, cb, a);
      const double db = cross(ca, cb, b);
      if (da >= 0.0) {
        out.pts.push_back(a);
        if (db < 0.0) {
          const double t = da / (da - db);
          out.pts.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
        }
      } else if (db >= 0.0) {
        const double t = da / (da - db);
        out.pts.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
      }
    }
  }
  return out;
}

double intersection_area(const Polygon& a, const Polygon& b) {
  const Polygon clipped = clip_convex(a, b);
  if (clipped.pts.size() < 3) return 0.0;
  return std::max(0.0, polygon_area(clipped));
}

bool polygon_inside(const Polygon& inner, const Polygon& outer, double tol) {
  return intersection_area(inner, outer) >= polygon_area(inner) - tol;
}

double distance_point_polygon(const Vec2& p, const Polygon& poly) {
  if (point_in_convex(poly, p)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = poly.pts.size();
  for (std::size_t i = 0; i < n; ++i)
    best = std::min(best, dist_point_segment(p, poly.pts[i], poly.pts[(i + 1) % n]));
  return best;
}

bool segment_crosses_polygon(const Vec2& a, const Vec2& b, const Polygon& poly, double eps) {
  // Cyrus-Beck: clip the segment parameter range against each half-plane.
  double t0 = 0.0, t1 = 1.0;
  const std::size_t n = poly.pts.size();
  if (n < 3) return false;
  const double dx = b.x - a.x, dy = b.y - a.y;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& pa = poly.pts[i];
    const Vec2& pb = poly.pts[(i + 1) % n];
    // Inward normal of CCW edge (pa,pb) is (-(pb-pa).y, (pb-pa).x).  The
    // half-plane is pulled inward by a hair so that a segment sliding along
    // the boundary does not register as a crossing.
    const double nx = -(pb.y - pa.y), ny = pb.x - pa.x;
    const double denom = nx * dx + ny * dy;
    const double num =
        nx * (pa.x - a.x) + ny * (pa.y - a.y) + 1e-9 * std::hypot(nx, ny);
    if (std::abs(denom) < 1e-15) {
      if (num > 0.0) return false;  // parallel and fully outside this edge
      continue;
    }
    const double t = num / denom;
    if (denom > 0.0) t0 = std::max(t0, t);  // entering
    else t1 = std::min(t1, t);              // leaving
    if (t0 >= t1) return false;
  }
  // Require an interior stretch of meaningful length, not a boundary graze.
  const double seg_len = std::sqrt(dx * dx + dy * dy);
  return (t1 - t0) * seg_len > eps;
}

Polygon clearance_region(const ObjectSpec& object, const Placement& pose, double depth,
                         double margin) {
  if (!object.functional)
    throw_error(ErrorKind::contract,
                "clearance_region: object \"" + object.id + "\" is not functional");
  if (!(depth > 0.0)) throw_error(ErrorKind::contract, "clearance_region: depth must be > 0");
  const double hw = object.dims[0] / 2.0 + margin;
  const double y0 = object.dims[1] / 2.0;
  const Vec2 corners[4] = {{-hw, y0}, {hw, y0}, {hw, y0 + depth}, {-hw, y0 + depth}};
  Polygon poly;
  poly.pts.reserve(4);
  for (const Vec2& c : corners) {
    Vec2 r = rotate(c, pose.theta);
    poly.pts.push_back({r.x + pose.x, r.y + pose.y});
  }
  return poly;
}

int OccupancyGrid::free_count() const {
  int n = 0;
  for (std::uint8_t b : blocked)
    if (!b) ++n;
  return n;
}

OccupancyGrid rasterize(const RoomSpec& room, const std::vector<Polygon>& blockers,
                        double resolution) {
  if (!(resolution > 0.0))
    throw_error(ErrorKind::contract, "rasterize: resolution must be > 0");
  if (resolution > std::min(room.width, room.depth))
    throw_error(ErrorKind::contract,
                "rasterize: resolution exceeds the smaller room dimension");
  OccupancyGrid grid;
  grid.resolution = resolution;
  grid.cols = static_cast<int>(std::ceil(room.width / resolution - 1e-12));
  grid.rows = static_cast<int>(std::ceil(room.depth / resolution - 1e-12));
  grid.blocked.assign(static_cast<std::size_t>(grid.cols) * grid.rows, 0);
  for (int row = 0; row < grid.rows; ++row) {
    for (int col = 0; col < grid.cols; ++col) {
      const Vec2 c = grid.cell_center(col, row);
      bool blocked = c.x > room.width || c.y > room.depth;
      for (std::size_t i = 0; i < blockers.size() && !blocked; ++i)
        blocked = point_in_convex(blockers[i], c);
      grid.blocked[grid.index(col, row)] = blocked ? 1 : 0;
    }
  }
  return grid;
}

std::vector<int> polygon_cells(const OccupancyGrid& grid, const Polygon& poly) {
  std::vector<int> cells;
  if (poly.pts.empty()) return cells;
  double min_x = poly.pts[0].x, max_x = poly.pts[0].x;
  double min_y = poly.pts[0].y, max_y = poly.pts[0].y;
  for (const Vec2& p : poly.pts) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const int c0 = std::max(0, static_cast<int>(std::floor(min_x / grid.resolution)) - 1);
  const int c1 = std::min(grid.cols - 1, static_cast<int>(std::ceil(max_x / grid.resolution)) + 1);
  const int r0 = std::max(0, static_cast<int>(std::floor(min_y / grid.resolution)) - 1);
  const int r1 = std::min(grid.rows - 1, static_cast<int>(std::ceil(max_y / grid.resolution)) + 1);
  for (int row = r0; row <= r1; ++row)
    for (int col = c0; col <= c1; ++col)
      if (point_in_convex(poly, grid.cell_center(col, row)))
        cells.push_back(grid.index(col, row));
  return cells;
}

}  // namespace placekit
