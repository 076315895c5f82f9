#include "placekit/agent.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <utility>

#include "json.hpp"
#include "placekit/error.hpp"

namespace placekit {

namespace {

void validate_train_config(const TrainConfig& config) {
  if (!(config.gamma > 0.0) || config.gamma > 1.0) {
    throw_error(ErrorKind::contract, "discount must lie in (0, 1]");
  }
  if (config.lambda_policy < 0.0 || config.lambda_value < 0.0 ||
      config.lambda_aux < 0.0 || config.lambda_entropy < 0.0) {
    throw_error(ErrorKind::contract, "loss weights must be non-negative");
  }
  if (config.epochs < 0) throw_error(ErrorKind::contract, "epochs must be non-negative");
  if (config.batch_size < 1) throw_error(ErrorKind::contract, "batch size must be positive");
  if (!(config.lr > 0.0)) throw_error(ErrorKind::contract, "learning rate must be positive");
}

std::vector<double> discounted_returns(const EpisodeTrace& trace, double gamma) {
  std::vector<double> returns(trace.steps.size(), 0.0);
  double acc = 0.0;
  for (std::size_t i = trace.steps.size(); i-- > 0;) {
    acc = trace.steps[i].reward + gamma * acc;
    returns[i] = acc;
  }
  return returns;
}

// Two attempts, then gives up; the caller decides what absence means.
template <typename Fn>
bool try_twice(Fn&& fn) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    try {
      fn();
      return true;
    } catch (const Error&) {
    }
  }
  return false;
}

void optimizer_flush(ActorCritic& model, const TrainConfig& config) {
  clip_global_norm(model.params(), config.grad_clip);
  learnkit::AdamConfig adam;
  adam.lr = config.lr;
  learnkit::adam_step(model.params(), adam);
  model.params().zero_grad();
}

}  // namespace

std::string ModelConfig::to_json() const {
  nlohmann::ordered_json j;
  j["h_d"] = h_d;
  j["mechanism"] = learnkit::to_string(mechanism);
  j["heads"] = heads;
  j["sff_enabled"] = sff_enabled;
  j["aux_enabled"] = aux_enabled;
  return j.dump();
}

ModelConfig ModelConfig::from_json(const std::string& text) {
  ModelConfig config;
  try {
    const auto j = nlohmann::json::parse(text);
    config.h_d = j.at("h_d").get<int>();
    config.mechanism = learnkit::fusion_from_string(j.at("mechanism").get<std::string>());
    config.heads = j.at("heads").get<int>();
    config.sff_enabled = j.at("sff_enabled").get<bool>();
    config.aux_enabled = j.at("aux_enabled").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw_error(ErrorKind::schema, std::string("model config: ") + e.what());
  }
  return config;
}

ActorCritic::ActorCritic(ModelConfig config, std::uint64_t init_seed)
    : config_(config) {
  if (config_.h_d <= 0 || config_.h_d % 2 != 0) {
    throw_error(ErrorKind::contract, "hidden width must be positive and even");
  }
  if (config_.heads <= 0 || config_.h_d % config_.heads != 0) {
    throw_error(ErrorKind::contract, "hidden width must be divisible by the head count");
  }
  Rng rng(init_seed);
  const auto h = static_cast<std::size_t>(config_.h_d);
  mlp_ = learnkit::Mlp(store_, "mlp", 5, h, h, rng);
  sage_ = learnkit::SageEncoder(store_, "sage", static_cast<std::size_t>(kNodeFeatureDim),
                                h, h, rng);
  fusion_ = learnkit::Fusion(store_, "fusion", h, config_.mechanism,
                             static_cast<std::size_t>(config_.heads), rng);
  gate_ = learnkit::GateProject(store_, "gate", static_cast<std::size_t>(kSemanticDim),
                                h, h / 2, rng);
  actor_ = learnkit::Dense(store_, "actor", h, static_cast<std::size_t>(kActionCount),
                           false, rng);
  critic_ = learnkit::Dense(store_, "critic", h + h / 2, 1, false, rng);
}

ActorCritic::Forward ActorCritic::forward(const GlobalState& global_state,
                                          const LocalGraph& graph,
                                          const std::vector<double>* h_vl) const {
  Forward out;
  const std::vector<double> gs(global_state.v.begin(), global_state.v.end());
  const auto f_g = mlp_.forward(gs, &out.mlp);
  const auto f_l = sage_.forward(graph.nodes, graph.neighbors, &out.sage);
  out.f_msc = fusion_.forward(f_g, f_l, &out.fusion);
  out.f_s.assign(static_cast<std::size_t>(config_.h_d) / 2, 0.0);
  if (h_vl != nullptr) {
    out.f_s = gate_.forward(*h_vl, &out.gate);
    out.gate_used = true;
  }
  out.logits = actor_.forward(out.f_msc, &out.actor);
  std::vector<double> fused(out.f_msc);
  fused.insert(fused.end(), out.f_s.begin(), out.f_s.end());
  out.value = critic_.forward(fused, &out.critic)[0];
  return out;
}

void ActorCritic::backward(const Forward& fwd, const LocalGraph& graph,
                           const std::vector<double>& dlogits, double dvalue) const {
  const auto h = static_cast<std::size_t>(config_.h_d);
  auto df_msc = actor_.backward(dlogits, fwd.actor);
  const auto dfused = critic_.backward({dvalue}, fwd.critic);
  for (std::size_t i = 0; i < h; ++i) df_msc[i] += dfused[i];
  if (fwd.gate_used) {
    const std::vector<double> df_s(dfused.begin() + static_cast<std::ptrdiff_t>(h),
                                   dfused.end());
    gate_.backward(df_s, fwd.gate);  // the feature vector itself is a leaf
  }
  const auto [df_g, df_l] = fusion_.backward(df_msc, fwd.fusion);
  mlp_.backward(df_g, fwd.mlp);  // global-state input gradient is discarded
  sage_.backward(df_l, fwd.sage, graph.neighbors);
}

void ActorCritic::save(const std::string& path) const {
  learnkit::write_checkpoint(path, config_.to_json(), store_);
}

ActorCritic ActorCritic::load(const std::string& path) {
  const auto data = learnkit::read_checkpoint(path);
  ActorCritic model(ModelConfig::from_json(data.config_json), 0);
  learnkit::apply_checkpoint(data, model.store_);
  return model;
}

ActResult act(const ActorCritic& model, PlacementEnv& env,
              const EmbeddingProvider& embedder, const SemanticScorer* scorer,
              ActMode mode, Rng* rng) {
  if (env.done()) throw_error(ErrorKind::contract, "act: episode already finished");
  if (mode == ActMode::sample && rng == nullptr) {
    throw_error(ErrorKind::contract, "act: sampling needs a generator");
  }
  ActResult result;
  const ActionGrid& grid = env.action_grid();
  // Re-proposing an action the environment already bounced is futile, so
  // rejected actions are masked out and retries walk distinct candidates.
  std::vector<char> mask = grid.mask;
  const std::vector<char>& rejected = env.rejected_actions();
  int valid = grid.valid_count;
  for (int a = 0; a < kActionCount; ++a) {
    const auto idx = static_cast<std::size_t>(a);
    if (mask[idx] != 0 && rejected[idx] != 0) {
      mask[idx] = 0;
      --valid;
    }
  }
  if (valid == 0) {
    env.skip_pending();
    result.skipped = true;
    return result;
  }
  TraceStep step;
  step.global_state = env.encode_global_state();
  step.graph = env.encode_local_graph(embedder);
  step.mask = std::move(mask);
  const std::vector<double>* h_vl = nullptr;
  if (model.config().sff_enabled && scorer != nullptr) {
    const bool ok = try_twice([&] {
      const std::string summary =
          layout_summary(env.scene(), env.layout(), env.current_energy());
      step.vlm_features = scorer->score(summary).features;
    });
    if (ok) {
      h_vl = &step.vlm_features;
    } else {
      step.vlm_features.clear();
      result.scorer_failed = true;
    }
  }
  const auto fwd = model.forward(step.global_state, step.graph, h_vl);
  const auto policy = learnkit::masked_policy(fwd.logits, step.mask);
  result.action = mode == ActMode::sample ? learnkit::sample_action(policy, *rng)
                                          : learnkit::argmax_action(policy);
  result.log_prob = learnkit::log_prob(policy, result.action);
  result.value = fwd.value;
  result.entropy = policy.entropy;
  result.step = std::move(step);
  return result;
}

LossReport compute_losses(const EpisodeTrace& trace, const TrainConfig& config) {
  validate_train_config(config);
  if (trace.steps.empty()) {
    throw_error(ErrorKind::contract, "losses of an empty episode are undefined");
  }
  const auto returns = discounted_returns(trace, config.gamma);
  const auto t_count = static_cast<double>(trace.steps.size());
  LossReport report;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const TraceStep& step = trace.steps[i];
    const double advantage = returns[i] - step.value;
    report.l_policy -= step.log_prob * advantage;
    report.l_value += (step.value - returns[i]) * (step.value - returns[i]);
    if (step.vlm_score) {
      report.l_aux += (step.value - *step.vlm_score) * (step.value - *step.vlm_score);
    }
    report.entropy += step.entropy;
  }
  report.l_policy /= t_count;
  report.l_value /= t_count;
  report.entropy /= t_count;
  report.total = config.lambda_policy * report.l_policy +
                 config.lambda_value * report.l_value + config.lambda_aux * report.l_aux -
                 config.lambda_entropy * report.entropy;
  return report;
}

LossReport accumulate_episode_gradients(const ActorCritic& model, const EpisodeTrace& trace,
                                        const TrainConfig& config) {
  const LossReport report = compute_losses(trace, config);
  const auto returns = discounted_returns(trace, config.gamma);
  const auto t_count = static_cast<double>(trace.steps.size());
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const TraceStep& step = trace.steps[i];
    const std::vector<double>* h_vl =
        step.vlm_features.empty() ? nullptr : &step.vlm_features;
    const auto fwd = model.forward(step.global_state, step.graph, h_vl);
    const auto policy = learnkit::masked_policy(fwd.logits, step.mask);
    // The advantage is a constant to the policy term: no gradient flows
    // back into the critic through it.
    const double advantage = returns[i] - fwd.value;
    const double logp_coeff = -config.lambda_policy * advantage / t_count;
    const double entropy_coeff = -config.lambda_entropy / t_count;
    const auto dlogits =
        learnkit::policy_logit_grad(policy, step.action, logp_coeff, entropy_coeff);
    double dvalue = config.lambda_value * 2.0 / t_count * (fwd.value - returns[i]);
    if (step.vlm_score) {
      dvalue += config.lambda_aux * 2.0 * (fwd.value - *step.vlm_score);
    }
    model.backward(fwd, step.graph, dlogits, dvalue);
  }
  return report;
}

double clip_global_norm(learnkit::ParamStore& store, double max_norm) {
  double sq = 0.0;
  for (const auto& tensor : store.tensors()) {
    for (double g : tensor.grad) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (auto& tensor : store.tensors()) {
      for (double& g : tensor.grad) g *= scale;
    }
  }
  return norm;
}

EpisodeTrace run_episode(const ActorCritic& model, PlacementEnv& env,
                         const ProviderSet& providers, ActMode mode, Rng* rng,
                         double alpha, bool training) {
  if (!providers.embedder) throw_error(ErrorKind::contract, "run_episode: no embedder");
  EpisodeTrace trace;
  const SemanticScorer* scorer = providers.scorer.get();
  while (!env.done()) {
    ActResult choice = act(model, env, *providers.embedder, scorer, mode, rng);
    if (choice.scorer_failed) scorer = nullptr;
    if (choice.skipped) continue;
    const StepOutcome outcome = env.step(choice.action);
    TraceStep step = std::move(choice.step);
    step.action = choice.action;
    step.reward = outcome.reward_g;
    step.value = choice.value;
    step.log_prob = choice.log_prob;
    step.entropy = choice.entropy;
    step.placed = outcome.placed;
    trace.steps.push_back(std::move(step));
  }
  trace.final_layout = env.layout();
  trace.final_energy = env.current_energy();
  const ModelConfig& mc = model.config();
  const bool want_final_score =
      training && !trace.steps.empty() && scorer != nullptr &&
      (alpha != 0.0 || (mc.sff_enabled && mc.aux_enabled));
  if (want_final_score) {
    double score = 0.0;
    const bool ok = try_twice([&] {
      score = scorer->score(layout_summary(env.scene(), trace.final_layout,
                                           trace.final_energy))
                  .score;
    });
    if (ok) {
      if (mc.aux_enabled) trace.steps.back().vlm_score = score;
      trace.steps.back().reward += alpha * score;
    }
  }
  return trace;
}

TrainResult train_agent(ActorCritic& model, const std::vector<SceneSpec>& scenes,
                        const TrainConfig& config, const ProviderSet& providers,
                        const EnvConfig& env_config) {
  validate_train_config(config);
  if (scenes.empty()) throw_error(ErrorKind::contract, "train_agent: no scenes");
  if (!providers.embedder) throw_error(ErrorKind::contract, "train_agent: no embedder");
  Rng rng(config.seed);
  std::vector<std::size_t> order(scenes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  TrainResult result;
  result.curve.reserve(static_cast<std::size_t>(config.epochs));
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // Fisher-Yates with the training generator keeps runs reproducible.
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.uniform_int(i)]);
    }
    EpochStats stats;
    stats.epoch = epoch;
    int in_batch = 0;
    int scored = 0;
    for (const std::size_t index : order) {
      PlacementEnv env(scenes[index], env_config);
      const EpisodeTrace trace =
          run_episode(model, env, providers, ActMode::sample, &rng, config.alpha, true);
      stats.mean_e_total += trace.final_energy.total;
      const std::size_t requested = scenes[index].objects.size();
      stats.mean_cnt +=
          requested == 0
              ? 100.0
              : 100.0 * static_cast<double>(trace.final_layout.placements.size()) /
                    static_cast<double>(requested);
      if (trace.steps.empty()) continue;  // everything skipped: nothing to learn
      const LossReport report = accumulate_episode_gradients(model, trace, config);
      stats.l_policy += report.l_policy;
      stats.l_value += report.l_value;
      stats.l_aux += report.l_aux;
      stats.entropy += report.entropy;
      ++scored;
      if (++in_batch >= config.batch_size) {
        optimizer_flush(model, config);
        in_batch = 0;
      }
    }
    if (in_batch > 0) optimizer_flush(model, config);
    const auto scene_count = static_cast<double>(scenes.size());
    stats.mean_e_total /= scene_count;
    stats.mean_cnt /= scene_count;
    if (scored > 0) {
      stats.l_policy /= scored;
      stats.l_value /= scored;
      stats.l_aux /= scored;
      stats.entropy /= scored;
    }
    result.curve.push_back(stats);
  }
  return result;
}

std::string curve_csv(const std::vector<EpochStats>& curve) {
  std::string text = "epoch,mean_E_total,mean_CNT,l_policy,l_value,l_aux,entropy\n";
  char row[256];
  for (const EpochStats& stats : curve) {
    std::snprintf(row, sizeof row, "%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n", stats.epoch,
                  stats.mean_e_total, stats.mean_cnt, stats.l_policy, stats.l_value,
                  stats.l_aux, stats.entropy);
    text += row;
  }
  return text;
}

SolveResult solve_scene(const ActorCritic& model, const SceneSpec& scene,
                        const ProviderSet& providers, const EnvConfig& env_config) {
  if (!providers.embedder) throw_error(ErrorKind::contract, "solve_scene: no embedder");
  const auto start = std::chrono::steady_clock::now();
  PlacementEnv env(scene, env_config);
  run_episode(model, env, providers, ActMode::greedy, nullptr, 0.0, false);
  SolveResult result;
  result.layout = env.layout();
  result.energy = env.current_energy();
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  const std::size_t placed = result.layout.placements.size();
  result.pto_seconds = elapsed.count() / static_cast<double>(std::max<std::size_t>(placed, 1));
  return result;
}

}  // namespace placekit
