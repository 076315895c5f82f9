#pragma once

#include <cstdint>

#include "placekit/env.hpp"
#include "placekit/scene.hpp"

namespace placekit {

// Iteration budget and temperature schedule of the annealing solver; the
// temperature at iteration k is t0 * cooling^k.
struct AnnealBudget {
  int iters = 5000;
  double t0 = 1.0;
  double cooling = 0.995;
};

// Search budgets shared by the non-learned solvers.
struct SolverBudget {
  int max_attempts_per_object = 64;  // candidate cells a DFS level may examine
  AnnealBudget anneal;
  std::uint64_t seed = 0;

  // Contract error when a budget is non-positive or cooling is outside (0, 1).
  void validate() const;
};

// Depth-first constructive search. Objects are visited largest-footprint
// first; each level ranks the in-bounds cells of its object by the geometric
// cost of the constraints that become evaluable, cheapest first, and accepts
// the first cell admitting a collision-free pose (a cell's orientations are
// tried in cost order). A level with no acceptable cell unwinds the most
// recent placement and resumes it at its next candidate, at most three times
// per object, then gives up and records the object as skipped.
Layout dfs_solve(const SceneSpec& scene, const SolverBudget& budget,
                 const EnvConfig& env_config = {});

// Simulated annealing over single-object moves and rotations drawn from each
// object's pose grid. Starts from `init` when given, otherwise from
// dfs_solve (falling back to a seeded random layout when the search places
// nothing). Proposals that would overlap another object beyond tau_reject or
// sit less than tau_contain inside the room are discarded; the rest follow
// the Metropolis rule on total energy under the budget's temperature
// schedule. Returns the best layout seen, so an already-optimal start comes
// back unchanged.
Layout anneal_solve(const SceneSpec& scene, const SolverBudget& budget,
                    const EnvConfig& env_config = {}, const Layout* init = nullptr);

// One uniformly random rollout of the placement MDP: each object draws a
// valid cell and orientation uniformly, and the environment's rejection and
// retry rules decide what gets skipped.
Layout random_solve(const SceneSpec& scene, std::uint64_t seed,
                    const EnvConfig& env_config = {});

}  // namespace placekit
