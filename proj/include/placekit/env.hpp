#pragma once
// Sequential object-placement decision process over one scene: objects are
// placed largest-footprint first on a discretized pose grid; every accepted
// or rejected attempt yields the negated layout energy as its reward.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "placekit/energy.hpp"
#include "placekit/providers.hpp"
#include "placekit/scene.hpp"

namespace placekit {

inline constexpr int kGridCap = 40;          // action cells per axis, at most
inline constexpr int kOrientationCount = 4;  // theta in {0, pi/2, pi, 3pi/2}
inline constexpr int kActionCount = kGridCap * kGridCap * kOrientationCount;
inline constexpr int kNodeFeatureDim = kEmbedDim + 6;
inline constexpr int kEdgeFeatureDim = 3 + kConstraintKindCount;
inline constexpr double kNeighborRadius = 2.0;  // meters; adjacency threshold

// [global-constraint fraction for the next object, w/W, d/D, area ratio,
//  remaining/total]; every component clipped to [0, 1].
struct GlobalState {
  std::array<double, 5> v{};
};

struct LocalEdge {
  int a = 0;
  int b = 0;  // node indices with a < b
  // [distance m, relative angle rad, alignment in [0,1], constraint
  // multi-hot over the 9 kinds]. The three geometric entries are zero when
  // one endpoint is the (pose-less) pending node.
  std::array<double, kEdgeFeatureDim> features{};
};

// Placed objects in placement order, then one pending node whose four pose
// feature dims are zeroed. Adjacency is symmetric and self-loop free.
struct LocalGraph {
  std::vector<std::vector<double>> nodes;   // M × kNodeFeatureDim
  std::vector<std::vector<int>> neighbors;  // per-node sorted neighbor lists
  std::vector<LocalEdge> edges;
  int pending = 0;  // index of the pending node (always last)
};

// Pose grid for one object. Cells are addressed in a fixed kGridCap-square
// canonical index space so the policy head keeps one shape across scenes;
// indices outside the actual cols × rows window are permanently masked.
// canonical index = (row * kGridCap + col) * kOrientationCount + orientation.
struct ActionGrid {
  int cols = 0;
  int rows = 0;
  double cell_w = 0.0;
  double cell_h = 0.0;
  std::vector<char> mask;  // kActionCount entries
  int valid_count = 0;
};

int encode_action(int col, int row, int orientation);

struct DecodedAction {
  int col = 0;
  int row = 0;
  int orientation = 0;
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

// Contract error when the index is outside the grid's valid window.
DecodedAction decode_action(const ActionGrid& grid, int action);

struct EnvConfig {
  double resolution = 0.25;   // meters per action cell before capping
  double tau_reject = 0.05;   // max tolerated pairwise overlap, m^2
  double tau_contain = 0.98;  // min contained-area fraction
  int n_retry = 8;            // rejected attempts before the object is skipped
  bool delta_reward = false;  // reward = -(E_t - E_{t-1}) instead of -E_t
  EnergyWeights weights;
  EnergyParams params;
  PriorTable prior;
};

// Largest-footprint-first object ids (ties broken by id), the shared
// placement order of the MDP and the search solvers.
std::vector<std::string> placement_order(const SceneSpec& scene);

// Containment-masked pose grid for `object` inside the scene's room: an
// action is valid iff the footprint at the decoded pose lies wholly inside
// the room.
ActionGrid build_action_grid(const SceneSpec& scene, const ObjectSpec& object,
                             const EnvConfig& config);

struct StepOutcome {
  double reward_g = 0.0;
  EnergyBreakdown breakdown;
  bool placed = false;
  bool skipped = false;  // the pending object was abandoned this step
  bool done = false;
};

// One rollout step as recorded by an agent. vlm_features is non-empty iff
// semantic features fed the critic at this step; vlm_score is present iff a
// terminal realism score was recorded here.
struct TraceStep {
  GlobalState global_state;
  LocalGraph graph;
  std::vector<char> mask;
  int action = -1;
  double reward = 0.0;
  double value = 0.0;
  double log_prob = 0.0;
  double entropy = 0.0;
  bool placed = false;
  std::optional<double> vlm_score;
  std::vector<double> vlm_features;
};

struct EpisodeTrace {
  std::vector<TraceStep> steps;
  Layout final_layout;
  EnergyBreakdown final_energy;
};

class PlacementEnv {
 public:
  explicit PlacementEnv(const SceneSpec& scene, EnvConfig config = {});
  void reset();

  bool done() const { return cursor_ >= static_cast<int>(order_.size()); }
  const SceneSpec& scene() const { return scene_; }
  const EnvConfig& config() const { return config_; }
  const Layout& layout() const { return layout_; }
  const std::vector<std::string>& order() const { return order_; }
  const ObjectSpec& pending() const;  // contract error when done
  int retries_used() const { return retries_; }
  int steps_taken() const { return steps_; }

  GlobalState encode_global_state() const;
  LocalGraph encode_local_graph(const EmbeddingProvider& embedder) const;
  const ActionGrid& action_grid() const;  // grid of the pending object
  // Actions already rejected for the pending object (kActionCount flags);
  // cleared whenever the pending object changes. Policies can mask these
  // out so retries walk distinct candidates.
  const std::vector<char>& rejected_actions() const { return rejected_; }

  // Places the pending object at the decoded pose, or rejects the attempt
  // when it overlaps a placed object beyond tau_reject or sticks out beyond
  // tau_contain; the reward always reflects the attempted layout.
  StepOutcome step(int action);
  // Abandons the pending object (used when its action mask is empty).
  StepOutcome skip_pending();

  EnergyBreakdown current_energy() const;

 private:
  void build_grid();
  void advance();

  SceneSpec scene_;
  EnvConfig config_;
  std::vector<std::string> order_;
  Layout layout_;
  ActionGrid grid_;
  std::vector<char> rejected_;
  int cursor_ = 0;
  int retries_ = 0;
  int steps_ = 0;
  double last_total_ = 0.0;
};

}  // namespace placekit
