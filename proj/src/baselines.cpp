#include "placekit/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "placekit/energy.hpp"
#include "placekit/error.hpp"
#include "placekit/geometry.hpp"
#include "placekit/rng.hpp"

namespace placekit {
namespace {

// Overlap areas below this are clipper noise, not collisions.
constexpr double kZeroOverlap = 1e-9;
constexpr int kMaxUnwinds = 3;

struct PoseOption {
  double cost = 0.0;
  int action = 0;
  DecodedAction pose;
};

// One candidate cell: its in-bounds orientations sorted cheapest first.
// Opposite orientations of a rectangle cover the same region, so grouping by
// cell keeps the backtracking budget from being spent on duplicate
// footprints.
struct Candidate {
  double cost = 0.0;    // min over the cell's orientations
  int cell_action = 0;  // lowest valid action of the cell, for tie-breaks
  std::vector<PoseOption> orients;
};

// In-bounds cells of `object`, cheapest constraint violation first (ties by
// action index), truncated to the per-object attempt budget. Only
// constraints that become evaluable once the candidate joins `placed`
// contribute to the cost.
std::vector<Candidate> ranked_candidates(const SceneSpec& scene, const Layout& placed,
                                         const ObjectSpec& object, const ActionGrid& grid,
                                         const SolverBudget& budget, const EnergyParams& params) {
  std::vector<Candidate> out;
  if (grid.valid_count == 0) return out;

  std::vector<const ConstraintSpec*> touching;
  for (const auto& constraint : scene.constraints) {
    if (constraint.subject == object.id || constraint.target == object.id) {
      touching.push_back(&constraint);
    }
  }

  Layout trial = placed;
  for (int row = 0; row < grid.rows; ++row) {
    for (int col = 0; col < grid.cols; ++col) {
      Candidate cand;
      for (int o = 0; o < kOrientationCount; ++o) {
        const int action = encode_action(col, row, o);
        if (grid.mask[static_cast<std::size_t>(action)] == 0) continue;
        PoseOption opt;
        opt.action = action;
        opt.pose = decode_action(grid, action);
        if (!touching.empty()) {
          trial.placements.push_back({object.id, opt.pose.x, opt.pose.y, opt.pose.theta});
          for (const ConstraintSpec* constraint : touching) {
            if (const auto e = constraint_geometric_energy(scene, trial, *constraint, params)) {
              opt.cost += *e;
            }
          }
          trial.placements.pop_back();
        }
        cand.orients.push_back(opt);
      }
      if (cand.orients.empty()) continue;
      std::sort(cand.orients.begin(), cand.orients.end(),
                [](const PoseOption& a, const PoseOption& b) {
                  if (a.cost != b.cost) return a.cost < b.cost;
                  return a.action < b.action;
                });
      cand.cost = cand.orients.front().cost;
      cand.cell_action = cand.orients.front().action;
      out.push_back(std::move(cand));
    }
  }
  std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    return a.cell_action < b.cell_action;
  });
  if (out.size() > static_cast<std::size_t>(budget.max_attempts_per_object)) {
    out.resize(static_cast<std::size_t>(budget.max_attempts_per_object));
  }
  return out;
}

bool collision_free(const SceneSpec& scene, const Layout& layout, const ObjectSpec& object,
                    const DecodedAction& pose) {
  const Polygon fp = footprint_polygon(object.dims[0], object.dims[1],
                                       {object.id, pose.x, pose.y, pose.theta});
  for (const auto& other : layout.placements) {
    const ObjectSpec* spec = scene.find_object(other.object_id);
    const Polygon ofp = footprint_polygon(spec->dims[0], spec->dims[1], other);
    if (intersection_area(fp, ofp) > kZeroOverlap) return false;
  }
  return true;
}

// The MDP's hard rejection rules applied to moving the placement at `index`.
bool move_feasible(const SceneSpec& scene, const Layout& layout, std::size_t index,
                   const ObjectSpec& object, const Placement& proposal, const EnvConfig& config) {
  const Polygon fp = footprint_polygon(object.dims[0], object.dims[1], proposal);
  const double rho = intersection_area(fp, room_polygon(scene.room)) /
                     (object.footprint_area() + 1e-8);
  if (rho < config.tau_contain) return false;
  for (std::size_t j = 0; j < layout.placements.size(); ++j) {
    if (j == index) continue;
    const auto& other = layout.placements[j];
    const ObjectSpec* spec = scene.find_object(other.object_id);
    const Polygon ofp = footprint_polygon(spec->dims[0], spec->dims[1], other);
    if (intersection_area(fp, ofp) > config.tau_reject) return false;
  }
  return true;
}

}  // namespace

void SolverBudget::validate() const {
  if (max_attempts_per_object <= 0) {
    throw_error(ErrorKind::contract, "max_attempts_per_object must be positive");
  }
  if (anneal.iters <= 0) {
    throw_error(ErrorKind::contract, "anneal.iters must be positive");
  }
  if (anneal.t0 <= 0.0) {
    throw_error(ErrorKind::contract, "anneal.t0 must be positive");
  }
  if (!(anneal.cooling > 0.0 && anneal.cooling < 1.0)) {
    throw_error(ErrorKind::contract, "anneal.cooling must lie in (0, 1)");
  }
}

Layout dfs_solve(const SceneSpec& scene, const SolverBudget& budget,
                 const EnvConfig& env_config) {
  budget.validate();
  const std::vector<std::string> order = placement_order(scene);
  const std::size_t n = order.size();

  Layout layout;
  std::vector<std::size_t> level_of;  // order index of each placement
  std::vector<std::vector<Candidate>> cands(n);
  std::vector<std::size_t> cursor(n, 0);
  std::vector<char> fresh(n, 1);   // candidate list must be rebuilt on entry
  std::vector<int> unwinds(n, 0);  // lifetime backtracks spent per object
  std::vector<char> gave_up(n, 0);

  std::size_t i = 0;
  while (i < n) {
    if (gave_up[i]) {
      ++i;
      continue;
    }
    const ObjectSpec& object = *scene.find_object(order[i]);
    if (fresh[i]) {
      const ActionGrid grid = build_action_grid(scene, object, env_config);
      cands[i] = ranked_candidates(scene, layout, object, grid, budget, env_config.params);
      cursor[i] = 0;
      fresh[i] = 0;
    }
    bool placed = false;
    while (cursor[i] < cands[i].size()) {
      const Candidate& cand = cands[i][cursor[i]++];
      const PoseOption* chosen = nullptr;
      for (const PoseOption& opt : cand.orients) {
        if (collision_free(scene, layout, object, opt.pose)) {
          chosen = &opt;
          break;
        }
      }
      if (chosen != nullptr) {
        layout.placements.push_back(
            {object.id, chosen->pose.x, chosen->pose.y, chosen->pose.theta});
        level_of.push_back(i);
        placed = true;
        break;
      }
    }
    if (placed) {
      ++i;
      // Deeper levels see a changed prefix; their lists are stale.
      for (std::size_t k = i; k < n; ++k) fresh[k] = 1;
      continue;
    }
    if (!layout.placements.empty() && unwinds[i] < kMaxUnwinds && !cands[i].empty()) {
      // Unwind the most recent placement and resume that level at its next
      // candidate; its cursor is kept so the used pose is not retried.
      ++unwinds[i];
      i = level_of.back();
      level_of.pop_back();
      layout.placements.pop_back();
      continue;
    }
    gave_up[i] = 1;
    layout.skipped.push_back(object.id);
    ++i;
  }
  return layout;
}

Layout anneal_solve(const SceneSpec& scene, const SolverBudget& budget,
                    const EnvConfig& env_config, const Layout* init) {
  budget.validate();
  Layout current = init != nullptr ? *init : dfs_solve(scene, budget, env_config);
  if (init == nullptr && current.placements.empty() && !scene.objects.empty()) {
    current = random_solve(scene, budget.seed, env_config);
  }
  Layout best = current;
  if (current.placements.empty()) return best;

  double cur_e =
      total_energy(scene, current, env_config.prior, env_config.weights, env_config.params);
  double best_e = cur_e;
  Rng rng(budget.seed);

  std::unordered_map<std::string, ActionGrid> grids;
  std::unordered_map<std::string, std::vector<int>> valid_actions;
  const auto actions_for = [&](const ObjectSpec& object) -> const std::vector<int>& {
    const auto it = valid_actions.find(object.id);
    if (it != valid_actions.end()) return it->second;
    ActionGrid grid = build_action_grid(scene, object, env_config);
    std::vector<int> valid;
    valid.reserve(static_cast<std::size_t>(grid.valid_count));
    for (int a = 0; a < kActionCount; ++a) {
      if (grid.mask[static_cast<std::size_t>(a)] != 0) valid.push_back(a);
    }
    grids.emplace(object.id, std::move(grid));
    return valid_actions.emplace(object.id, std::move(valid)).first->second;
  };

  double temp = budget.anneal.t0;
  for (int k = 0; k < budget.anneal.iters; ++k, temp *= budget.anneal.cooling) {
    const std::size_t pi =
        static_cast<std::size_t>(rng.uniform_int(current.placements.size()));
    Placement& slot = current.placements[pi];
    const ObjectSpec& object = *scene.find_object(slot.object_id);
    const std::vector<int>& actions = actions_for(object);
    if (actions.empty()) continue;
    const int action = actions[static_cast<std::size_t>(rng.uniform_int(actions.size()))];
    const DecodedAction pose = decode_action(grids.at(object.id), action);
    const Placement proposal{object.id, pose.x, pose.y, pose.theta};
    if (!move_feasible(scene, current, pi, object, proposal, env_config)) continue;

    const Placement saved = slot;
    slot = proposal;
    const double new_e =
        total_energy(scene, current, env_config.prior, env_config.weights, env_config.params);
    const double delta = new_e - cur_e;
    const bool accept =
        delta <= 0.0 || rng.uniform01() < std::exp(-delta / std::max(temp, 1e-300));
    if (!accept) {
      slot = saved;
      continue;
    }
    cur_e = new_e;
    if (new_e < best_e) {
      best_e = new_e;
      best = current;
    }
  }
  return best;
}

Layout random_solve(const SceneSpec& scene, std::uint64_t seed, const EnvConfig& env_config) {
  PlacementEnv env(scene, env_config);
  Rng rng(seed);
  std::vector<int> valid;
  while (!env.done()) {
    const ActionGrid& grid = env.action_grid();
    if (grid.valid_count == 0) {
      env.skip_pending();
      continue;
    }
    valid.clear();
    for (int a = 0; a < kActionCount; ++a) {
      if (grid.mask[static_cast<std::size_t>(a)] != 0) valid.push_back(a);
    }
    env.step(valid[static_cast<std::size_t>(rng.uniform_int(valid.size()))]);
  }
  return env.layout();
}

}  // namespace placekit
