#pragma once
// Actor-critic policy over the placement process. A two-layer MLP encodes
// the global state and a graph encoder the local graph; fusing the two gives
// the actor's input. The critic additionally sees a gated projection of the
// semantic judge's feature vector, or zeros when that path is disabled or
// unavailable, so value estimates can lean on an outside opinion while the
// policy itself stays self-contained.

#include <cstdint>
#include <string>
#include <vector>

#include "placekit/energy.hpp"
#include "placekit/env.hpp"
#include "placekit/learnkit.hpp"
#include "placekit/providers.hpp"
#include "placekit/rng.hpp"
#include "placekit/scene.hpp"

namespace placekit {

struct ModelConfig {
  int h_d = 128;  // hidden width; must be even and divisible by heads
  learnkit::FusionMechanism mechanism = learnkit::FusionMechanism::cross;
  int heads = 4;
  bool sff_enabled = true;  // semantic features feed the critic each step
  bool aux_enabled = true;  // critic regularized toward the terminal score

  std::string to_json() const;
  static ModelConfig from_json(const std::string& text);
};

class ActorCritic {
 public:
  ActorCritic(ModelConfig config, std::uint64_t init_seed);
  ActorCritic(const ActorCritic&) = delete;
  ActorCritic& operator=(const ActorCritic&) = delete;
  ActorCritic(ActorCritic&&) = default;
  ActorCritic& operator=(ActorCritic&&) = default;

  struct Forward {
    learnkit::Mlp::Cache mlp;
    learnkit::SageEncoder::Cache sage;
    learnkit::Fusion::Cache fusion;
    learnkit::GateProject::Cache gate;
    learnkit::Dense::Cache actor;
    learnkit::Dense::Cache critic;
    std::vector<double> f_msc;
    std::vector<double> f_s;  // zeros when the semantic path was off
    bool gate_used = false;
    std::vector<double> logits;  // kActionCount entries
    double value = 0.0;
  };

  // h_vl may be null (semantic path off); when present it must be
  // kSemanticDim wide. The actor head never sees h_vl.
  Forward forward(const GlobalState& global_state, const LocalGraph& graph,
                  const std::vector<double>* h_vl) const;
  // Accumulates parameter gradients for dL/dlogits and dL/dvalue.
  void backward(const Forward& fwd, const LocalGraph& graph,
                const std::vector<double>& dlogits, double dvalue) const;

  void save(const std::string& path) const;
  static ActorCritic load(const std::string& path);

  const ModelConfig& config() const { return config_; }
  learnkit::ParamStore& params() { return store_; }
  const learnkit::ParamStore& params() const { return store_; }

 private:
  ModelConfig config_;
  learnkit::ParamStore store_;
  learnkit::Mlp mlp_;
  learnkit::SageEncoder sage_;
  learnkit::Fusion fusion_;
  learnkit::GateProject gate_;
  learnkit::Dense actor_;
  learnkit::Dense critic_;
};

enum class ActMode { sample, greedy };

struct ActResult {
  bool skipped = false;        // empty action mask: the object was skipped
  bool scorer_failed = false;  // the scorer failed twice during this call
  int action = -1;
  double log_prob = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  TraceStep step;  // state snapshot; action/reward/placed filled by callers
};

// Picks an action for the pending object: sample draws from the masked
// policy with the given generator, greedy takes the lowest-index argmax.
// Actions the environment already rejected for this object are masked out,
// so retries always propose distinct candidates. An empty effective mask
// skips the object on the spot and reports it in the result.
ActResult act(const ActorCritic& model, PlacementEnv& env,
              const EmbeddingProvider& embedder, const SemanticScorer* scorer,
              ActMode mode, Rng* rng);

struct TrainConfig {
  int epochs = 50;
  int batch_size = 1;  // episodes per optimizer step
  double lr = 1e-4;
  double gamma = 0.99;
  double lambda_policy = 1.0;
  double lambda_value = 0.5;
  double lambda_aux = 0.1;
  double lambda_entropy = 0.01;
  double alpha = 0.5;     // terminal semantic-reward blend weight
  double grad_clip = 5.0;  // global gradient-norm ceiling; <= 0 disables
  std::uint64_t seed = 0;
};

struct LossReport {
  double l_policy = 0.0;
  double l_value = 0.0;
  double l_aux = 0.0;
  double entropy = 0.0;
  double total = 0.0;  // weighted sum with the entropy bonus subtracted
};

// Monte-Carlo losses over one recorded episode: discounted returns as value
// targets, return-minus-value advantages (treated as constants by the policy
// term), mean entropy, and the squared pull of the critic toward any
// recorded terminal semantic score (summed, not averaged).
LossReport compute_losses(const EpisodeTrace& trace, const TrainConfig& config);

// Re-runs each step's forward pass and accumulates gradients of the weighted
// loss into the model's parameter store; parameter values are untouched.
LossReport accumulate_episode_gradients(const ActorCritic& model,
                                        const EpisodeTrace& trace,
                                        const TrainConfig& config);

// Scales gradients so their global L2 norm is at most max_norm (no-op when
// max_norm <= 0); returns the pre-clip norm.
double clip_global_norm(learnkit::ParamStore& store, double max_norm);

// Rolls one episode to completion. In training mode the terminal semantic
// score (when the model or blend wants one) is folded into the last reward
// scaled by alpha and recorded on the last step for the auxiliary loss.
// A scorer that fails twice is dropped for the rest of the episode.
EpisodeTrace run_episode(const ActorCritic& model, PlacementEnv& env,
                         const ProviderSet& providers, ActMode mode, Rng* rng,
                         double alpha, bool training);

struct EpochStats {
  int epoch = 0;
  double mean_e_total = 0.0;
  double mean_cnt = 0.0;
  double l_policy = 0.0;
  double l_value = 0.0;
  double l_aux = 0.0;
  double entropy = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> curve;
};

// Shuffled single-episode sweeps over the scenes with one optimizer step per
// batch of episodes. Deterministic for a fixed seed and mock providers.
TrainResult train_agent(ActorCritic& model, const std::vector<SceneSpec>& scenes,
                        const TrainConfig& config, const ProviderSet& providers,
                        const EnvConfig& env_config = {});

std::string curve_csv(const std::vector<EpochStats>& curve);

struct SolveResult {
  Layout layout;
  EnergyBreakdown energy;
  double pto_seconds = 0.0;  // wall-clock seconds per placed object
};

// Greedy rollout with the frozen model.
SolveResult solve_scene(const ActorCritic& model, const SceneSpec& scene,
                        const ProviderSet& providers,
                        const EnvConfig& env_config = {});

}  // namespace placekit
