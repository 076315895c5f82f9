#pragma once

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "placekit/geometry.hpp"
#include "placekit/navgrid.hpp"
#include "placekit/scene.hpp"

namespace placekit {

// Weights of the five energy terms in the scalar objective.
struct EnergyWeights {
  double relational = 4.0;
  double collision = 1.5;
  double out_of_bounds = 0.35;
  double navigation = 1.5;
  double affordance = 1.5;
};

struct EnergyParams {
  double prior_blend = 1.0;       // lambda on the prior deviation multiplier
  double prior_e_max = 5.0;       // normalizer for |distance - mean|
  double nav_resolution = 0.1;    // grid resolution for the navigation term
  double clearance_depth = 0.8;   // functional clearance depth (m)
  double clearance_margin = 0.1;  // lateral clearance margin (m)
  double edge_margin = 0.3;       // "edge" satisfied within this wall distance
  double wall_margin = 0.05;      // "against_wall" satisfied within this
  double aff_blocked_weight = 1.0;   // clearance leaves the room
  double aff_overlap_weight = 0.5;   // per object overlapping a clearance
};

// Mean center distance of co-occurring object categories, learned from
// example layouts.  Keys are (category_a, category_b, relation) with the
// category pair stored sorted; build_prior_table writes relation "*" so one
// distance statistic serves every relation on the pair.
class PriorTable {
 public:
  struct Stats {
    double mean_distance = 0.0;
    int count = 0;
  };

  static PriorTable build(const std::vector<std::pair<SceneSpec, Layout>>& corpus,
                          double co_occurrence_radius = 3.0);

  void insert(const std::string& cat_a, const std::string& cat_b, const std::string& relation,
              Stats stats);
  std::optional<Stats> lookup(const std::string& cat_a, const std::string& cat_b,
                              const std::string& relation) const;

  // Normalized deviation of `distance` from the learned mean:
  // clip(|distance - mean| / e_max, 0, 1); 0 for pairs never seen.
  double deviation(const std::string& cat_a, const std::string& cat_b,
                   const std::string& relation, double distance, double e_max) const;

  std::size_t size() const { return entries_.size(); }

  std::string serialize() const;
  static PriorTable deserialize(const std::string& json_text);

 private:
  std::map<std::tuple<std::string, std::string, std::string>, Stats> entries_;
};

// {"pairs":[{"scene":{...},"layout":{...}}, ...]}
std::vector<std::pair<SceneSpec, Layout>> load_prior_corpus(const std::string& json_text);

struct EnergyBreakdown {
  double relational = 0.0;
  double collision = 0.0;
  double out_of_bounds = 0.0;
  double navigation = 0.0;
  double affordance = 0.0;
  double total = 0.0;  // weighted sum of the five terms
};

// Shortest distance from the footprint to any wall, 0 when it touches or
// crosses one.
double wall_distance(const Polygon& footprint, const RoomSpec& room);

// Geometric violation of one constraint, >= 0 and 0 when satisfied.
// nullopt when the constraint cannot be evaluated yet (subject or target not
// placed).
std::optional<double> constraint_geometric_energy(const SceneSpec& scene, const Layout& layout,
                                                  const ConstraintSpec& constraint,
                                                  const EnergyParams& params = {});

// log(1 + mean over evaluable constraints of E_geom * (1 + blend * prior));
// 0 when nothing is evaluable.
double relational_energy(const SceneSpec& scene, const Layout& layout, const PriorTable& prior,
                         const EnergyParams& params = {});

// log(1 + sum over placed pairs of overlap_area^2).
double collision_energy(const SceneSpec& scene, const Layout& layout);

// log(1 + sum over placed objects of (1 - rho)^2) with rho the contained
// area fraction; epsilon = 1e-8 keeps the ratio finite for tiny footprints.
double oob_energy(const SceneSpec& scene, const Layout& layout);

// (1 - rho_nav)^2 where rho_nav is the fraction of anchor/inference objects
// (all placed objects when none carry those roles) reachable from the agent
// start on the dilated occupancy grid.
double navigation_energy(const SceneSpec& scene, const Layout& layout,
                         const EnergyParams& params = {});

// Navigation-grid construction shared by the navigation term and the layout
// metrics: the agent-inflated occupancy grid of all placed footprints, the
// agent start cell, and per-object target cell sets.  Target footprints are
// dilated by one cell to match the obstacle inflation, so a target counts as
// reachable when the agent can stand next to its inflated hull.
struct NavContext {
  OccupancyGrid grid;   // placed footprints rasterized, then dilated once
  GridCell start;
  std::vector<std::vector<int>> key_targets;  // anchor/inference placements
  std::vector<std::vector<int>> all_targets;  // every placement
};

NavContext build_nav_context(const SceneSpec& scene, const Layout& layout,
                             double resolution);

// Per functional object: blocked_weight when its clearance leaves the room,
// plus overlap_weight per other object intersecting the clearance.
double affordance_energy(const SceneSpec& scene, const Layout& layout,
                         const EnergyParams& params = {});

EnergyBreakdown energy_breakdown(const SceneSpec& scene, const Layout& layout,
                                 const PriorTable& prior, const EnergyWeights& weights = {},
                                 const EnergyParams& params = {});

double total_energy(const SceneSpec& scene, const Layout& layout, const PriorTable& prior,
                    const EnergyWeights& weights = {}, const EnergyParams& params = {});

}  // namespace placekit
