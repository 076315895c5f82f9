#include "placekit/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "placekit/error.hpp"
#include "placekit/navgrid.hpp"

namespace placekit {

namespace {

using ordered_json = nlohmann::ordered_json;

double sq(double v) { return v * v; }

double hinge_sq(double v) { return v > 0.0 ? v * v : 0.0; }

// Wrap an angle difference into (-pi, pi].
double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  if (a > M_PI) a -= 2.0 * M_PI;
  if (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

std::tuple<std::string, std::string, std::string> prior_key(const std::string& a,
                                                            const std::string& b,
                                                            const std::string& relation) {
  if (a <= b) return {a, b, relation};
  return {b, a, relation};
}

}  // namespace

void PriorTable::insert(const std::string& cat_a, const std::string& cat_b,
                        const std::string& relation, Stats stats) {
  entries_[prior_key(cat_a, cat_b, relation)] = stats;
}

std::optional<PriorTable::Stats> PriorTable::lookup(const std::string& cat_a,
                                                    const std::string& cat_b,
                                                    const std::string& relation) const {
  auto it = entries_.find(prior_key(cat_a, cat_b, relation));
  if (it != entries_.end()) return it->second;
  it = entries_.find(prior_key(cat_a, cat_b, "*"));
  if (it != entries_.end()) return it->second;
  return std::nullopt;
}

double PriorTable::deviation(const std::string& cat_a, const std::string& cat_b,
                             const std::string& relation, double distance, double e_max) const {
  const auto stats = lookup(cat_a, cat_b, relation);
  if (!stats) return 0.0;
  return std::clamp(std::abs(distance - stats->mean_distance) / e_max, 0.0, 1.0);
}

PriorTable PriorTable::build(const std::vector<std::pair<SceneSpec, Layout>>& corpus,
                             double co_occurrence_radius) {
  struct Acc {
    double sum = 0.0;
    int count = 0;
  };
  std::map<std::pair<std::string, std::string>, Acc> acc;
  for (const auto& [scene, layout] : corpus) {
    for (std::size_t i = 0; i < layout.placements.size(); ++i) {
      for (std::size_t j = i + 1; j < layout.placements.size(); ++j) {
        const Placement& pi = layout.placements[i];
        const Placement& pj = layout.placements[j];
        const ObjectSpec* oi = scene.find_object(pi.object_id);
        const ObjectSpec* oj = scene.find_object(pj.object_id);
        if (!oi || !oj) continue;
        const double d = std::hypot(pi.x - pj.x, pi.y - pj.y);
        if (d >= co_occurrence_radius) continue;
        std::pair<std::string, std::string> key =
            oi->name <= oj->name ? std::make_pair(oi->name, oj->name)
                                 : std::make_pair(oj->name, oi->name);
        Acc& a = acc[key];
        a.sum += d;
        a.count += 1;
      }
    }
  }
  PriorTable table;
  for (const auto& [key, a] : acc)
    table.insert(key.first, key.second, "*", {a.sum / a.count, a.count});
  return table;
}

std::string PriorTable::serialize() const {
  ordered_json entries = ordered_json::array();
  for (const auto& [key, stats] : entries_) {
    entries.push_back({{"a", std::get<0>(key)},
                       {"b", std::get<1>(key)},
                       {"relation", std::get<2>(key)},
                       {"mean_distance", stats.mean_distance},
                       {"count", stats.count}});
  }
  ordered_json j;
  j["entries"] = std::move(entries);
  return j.dump(2) + "\n";
}

PriorTable PriorTable::deserialize(const std::string& json_text) {
  ordered_json j = ordered_json::parse(json_text, nullptr, false);
  if (j.is_discarded()) throw_error(ErrorKind::parse, "prior table: malformed JSON");
  if (!j.is_object() || !j.contains("entries") || !j["entries"].is_array())
    throw_error(ErrorKind::schema, "prior table: missing \"entries\" array");
  PriorTable table;
  for (const auto& e : j["entries"]) {
    if (!e.is_object() || !e.contains("a") || !e.contains("b") || !e.contains("relation") ||
        !e.contains("mean_distance") || !e.contains("count"))
      throw_error(ErrorKind::schema, "prior table: malformed entry");
    table.insert(e["a"].get<std::string>(), e["b"].get<std::string>(),
                 e["relation"].get<std::string>(),
                 {e["mean_distance"].get<double>(), e["count"].get<int>()});
  }
  return table;
}

std::vector<std::pair<SceneSpec, Layout>> load_prior_corpus(const std::string& json_text) {
  ordered_json j = ordered_json::parse(json_text, nullptr, false);
  if (j.is_discarded()) throw_error(ErrorKind::parse, "prior corpus: malformed JSON");
  if (!j.is_object() || !j.contains("pairs") || !j["pairs"].is_array())
    throw_error(ErrorKind::schema, "prior corpus: missing \"pairs\" array");
  std::vector<std::pair<SceneSpec, Layout>> out;
  for (const auto& p : j["pairs"]) {
    if (!p.is_object() || !p.contains("scene") || !p.contains("layout"))
      throw_error(ErrorKind::schema, "prior corpus: pair needs \"scene\" and \"layout\"");
    out.emplace_back(load_scene(p["scene"].dump()), load_layout(p["layout"].dump()));
  }
  return out;
}

double wall_distance(const Polygon& footprint, const RoomSpec& room) {
  double best = std::numeric_limits<double>::infinity();
  for (const Vec2& p : footprint.pts) {
    best = std::min({best, p.x, room.width - p.x, p.y, room.depth - p.y});
  }
  return std::max(0.0, best);
}

std::optional<double> constraint_geometric_energy(const SceneSpec& scene, const Layout& layout,
                                                  const ConstraintSpec& constraint,
                                                  const EnergyParams& params) {
  const Placement* ps = layout.find(constraint.subject);
  if (!ps) return std::nullopt;
  const ObjectSpec* os = scene.find_object(constraint.subject);
  if (!os) throw_error(ErrorKind::reference, "constraint subject \"" + constraint.subject +
                                                 "\" is not a scene object");
  const Placement* pt = nullptr;
  if (!is_global_kind(constraint.kind)) {
    if (!constraint.target) return std::nullopt;
    pt = layout.find(*constraint.target);
    if (!pt) return std::nullopt;
  }

  switch (constraint.kind) {
    case ConstraintKind::edge: {
      const double wd = wall_distance(footprint_polygon(*os, *ps), scene.room);
      return hinge_sq(wd - params.edge_margin);
    }
    case ConstraintKind::against_wall: {
      const double wd = wall_distance(footprint_polygon(*os, *ps), scene.room);
      return hinge_sq(wd - params.wall_margin);
    }
    case ConstraintKind::center: {
      const double cx = scene.room.width / 2.0, cy = scene.room.depth / 2.0;
      const double half_diag = std::hypot(cx, cy);
      return sq(std::hypot(ps->x - cx, ps->y - cy) / half_diag);
    }
    case ConstraintKind::near: {
      const double d = std::hypot(ps->x - pt->x, ps->y - pt->y);
      return hinge_sq(d - *constraint.params.d_max);
    }
    case ConstraintKind::far_from: {
      const double d = std::hypot(ps->x - pt->x, ps->y - pt->y);
      return hinge_sq(*constraint.params.d_min - d);
    }
    case ConstraintKind::facing: {
      const double dx = pt->x - ps->x, dy = pt->y - ps->y;
      const double len = std::hypot(dx, dy);
      if (len < 1e-12) return 0.0;  // coincident centers: direction undefined
      const Vec2 f = facing_direction(ps->theta);
      return 1.0 - (f.x * dx + f.y * dy) / len;
    }
    case ConstraintKind::in_front_of: {
      const Vec2 f = facing_direction(pt->theta);
      const double s = (ps->x - pt->x) * f.x + (ps->y - pt->y) * f.y;
      return hinge_sq(-s);
    }
    case ConstraintKind::side_of: {
      const Vec2 f = facing_direction(pt->theta);
      const double dx = ps->x - pt->x, dy = ps->y - pt->y;
      const double cross_z = f.x * dy - f.y * dx;
      const double sign = (*constraint.params.side == Side::left) ? 1.0 : -1.0;
      return hinge_sq(-sign * cross_z);
    }
    case ConstraintKind::aligned_with: {
      double best = std::numeric_limits<double>::infinity();
      for (int k = 0; k < 4; ++k)
        best = std::min(best, sq(wrap_angle(ps->theta - pt->theta - k * M_PI / 2.0)));
      return best;
    }
  }
  return std::nullopt;
}

double relational_energy(const SceneSpec& scene, const Layout& layout, const PriorTable& prior,
                         const EnergyParams& params) {
  double sum = 0.0;
  int evaluable = 0;
  for (const ConstraintSpec& c : scene.constraints) {
    const auto geom = constraint_geometric_energy(scene, layout, c, params);
    if (!geom) continue;
    double prior_dev = 0.0;
    if (!is_global_kind(c.kind)) {
      const ObjectSpec* os = scene.find_object(c.subject);
      const ObjectSpec* ot = scene.find_object(*c.target);
      const Placement* ps = layout.find(c.subject);
      const Placement* pt = layout.find(*c.target);
      const double d = std::hypot(ps->x - pt->x, ps->y - pt->y);
      prior_dev = prior.deviation(os->name, ot->name, to_string(c.kind), d, params.prior_e_max);
    }
    sum += *geom * (1.0 + params.prior_blend * prior_dev);
    ++evaluable;
  }
  if (evaluable == 0) return 0.0;
  return std::log1p(sum / evaluable);
}

double collision_energy(const SceneSpec& scene, const Layout& layout) {
  std::vector<Polygon> footprints;
  footprints.reserve(layout.placements.size());
  for (const Placement& p : layout.placements) {
    const ObjectSpec* o = scene.find_object(p.object_id);
    if (!o) throw_error(ErrorKind::reference, "placement \"" + p.object_id +
                                                  "\" is not a scene object");
    footprints.push_back(footprint_polygon(*o, p));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < footprints.size(); ++i)
    for (std::size_t j = i + 1; j < footprints.size(); ++j)
      sum += sq(intersection_area(footprints[i], footprints[j]));
  return std::log1p(sum);
}

double oob_energy(const SceneSpec& scene, const Layout& layout) {
  const Polygon room = room_polygon(scene.room);
  double sum = 0.0;
  for (const Placement& p : layout.placements) {
    const ObjectSpec* o = scene.find_object(p.object_id);
    if (!o) throw_error(ErrorKind::reference, "placement \"" + p.object_id +
                                                  "\" is not a scene object");
    const Polygon fp = footprint_polygon(*o, p);
    const double rho = intersection_area(fp, room) / (polygon_area(fp) + 1e-8);
    sum += sq(1.0 - rho);
  }
  return std::log1p(sum);
}

NavContext build_nav_context(const SceneSpec& scene, const Layout& layout,
                             double resolution) {
  std::vector<Polygon> footprints;
  std::vector<const ObjectSpec*> objects;
  for (const Placement& p : layout.placements) {
    const ObjectSpec* o = scene.find_object(p.object_id);
    if (!o) throw_error(ErrorKind::reference, "placement \"" + p.object_id +
                                                  "\" is not a scene object");
    objects.push_back(o);
    footprints.push_back(footprint_polygon(*o, p));
  }
  const OccupancyGrid grid = rasterize(scene.room, footprints, resolution);

  NavContext ctx;
  ctx.grid = dilate_blocked(grid);
  ctx.start = cell_of(ctx.grid, scene.room.start());
  for (std::size_t i = 0; i < objects.size(); ++i) {
    // Footprint cells on the raw grid, then one ring of dilation to match the
    // inflated obstacles.
    std::vector<int> cells = polygon_cells(grid, footprints[i]);
    std::vector<std::uint8_t> mark(grid.blocked.size(), 0);
    for (int idx : cells) {
      const int col = idx % grid.cols, row = idx / grid.cols;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          if (grid.in_bounds(col + dx, row + dy)) mark[grid.index(col + dx, row + dy)] = 1;
    }
    std::vector<int> dilated;
    for (std::size_t idx = 0; idx < mark.size(); ++idx)
      if (mark[idx]) dilated.push_back(static_cast<int>(idx));
    if (objects[i]->role == Role::anchor || objects[i]->role == Role::inference)
      ctx.key_targets.push_back(dilated);
    ctx.all_targets.push_back(std::move(dilated));
  }
  return ctx;
}

double navigation_energy(const SceneSpec& scene, const Layout& layout,
                         const EnergyParams& params) {
  if (layout.placements.empty()) return 0.0;
  const NavContext ctx = build_nav_context(scene, layout, params.nav_resolution);
  // Anchor/inference placements are the navigation targets; every placement
  // counts when none carry those roles.
  const auto& targets = ctx.key_targets.empty() ? ctx.all_targets : ctx.key_targets;
  const double rho = reachability_ratio(ctx.grid, ctx.start, targets);
  return sq(1.0 - rho);
}

double affordance_energy(const SceneSpec& scene, const Layout& layout,
                         const EnergyParams& params) {
  const Polygon room = room_polygon(scene.room);
  std::vector<const ObjectSpec*> objects;
  std::vector<Polygon> footprints;
  for (const Placement& p : layout.placements) {
    const ObjectSpec* o = scene.find_object(p.object_id);
    if (!o) throw_error(ErrorKind::reference, "placement \"" + p.object_id +
                                                  "\" is not a scene object");
    objects.push_back(o);
    footprints.push_back(footprint_polygon(*o, p));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (!objects[i]->functional) continue;
    const Polygon clearance = clearance_region(*objects[i], layout.placements[i],
                                               params.clearance_depth, params.clearance_margin);
    if (!polygon_inside(clearance, room)) sum += params.aff_blocked_weight;
    for (std::size_t j = 0; j < objects.size(); ++j) {
      if (j == i) continue;
      if (intersection_area(clearance, footprints[j]) > 1e-6) sum += params.aff_overlap_weight;
    }
  }
  return sum;
}

EnergyBreakdown energy_breakdown(const SceneSpec& scene, const Layout& layout,
                                 const PriorTable& prior, const EnergyWeights& weights,
                                 const EnergyParams& params) {
  EnergyBreakdown b;
  b.relational = relational_energy(scene, layout, prior, params);
  b.collision = collision_energy(scene, layout);
  b.out_of_bounds = oob_energy(scene, layout);
  b.navigation = navigation_energy(scene, layout, params);
  b.affordance = affordance_energy(scene, layout, params);
  b.total = weights.relational * b.relational + weights.collision * b.collision +
            weights.out_of_bounds * b.out_of_bounds + weights.navigation * b.navigation +
            weights.affordance * b.affordance;
  return b;
}

double total_energy(const SceneSpec& scene, const Layout& layout, const PriorTable& prior,
                    const EnergyWeights& weights, const EnergyParams& params) {
  return energy_breakdown(scene, layout, prior, weights, params).total;
}

}  // namespace placekit
