#pragma once
// Run-wide configuration resolved from, in rising precedence, built-in
// defaults, a JSON config file, provider environment variables, and command
// flags.  The resolved value is serialized into every JSON report so a run
// can be reproduced from its artifacts.

#include <cstdint>
#include <functional>
#include <string>

#include "placekit/agent.hpp"
#include "placekit/baselines.hpp"
#include "placekit/env.hpp"
#include "placekit/providers.hpp"
#include "placekit/roles.hpp"
#include "placekit/vr.hpp"

namespace placekit {

struct RunConfig {
  std::uint64_t seed = 0;       // propagated into every sub-config by finalize()
  std::string embed_url;        // empty selects the mock provider
  std::string scorer_url;
  std::string llm_url;
  EnvConfig env;                // placement grid + energy weights and params
  SolverBudget budget;          // baseline solver budgets
  TrainConfig train;            // agent training
  ModelConfig model;            // actor-critic architecture
  RoleTrainConfig roles;        // role-head training
  SamplerConfig vr;             // viewpoint sampling
  double eval_resolution = 0.1; // navigation grid for layout metrics
  int jobs = 0;                 // evaluation worker threads; 0 = logical cores
  bool deterministic_output = false;  // zero measured timings in artifacts

  // Copies the top-level seed into the sub-config seeds and validates the
  // resolved settings (contract error on a bad budget or sampler).
  void finalize();
};

// Overlays a JSON config document onto `config`.  Absent keys keep their
// current values; unknown keys are schema errors.
void apply_config_json(RunConfig& config, const std::string& json_text);

// Overlays the provider endpoint environment variables (LAYOUT_EMBED_URL,
// LAYOUT_SCORER_URL, LAYOUT_LLM_URL) when set and non-empty.  The lookup is
// injectable for tests; pass {} to read the process environment.
void apply_config_env(RunConfig& config,
                      const std::function<const char*(const char*)>& getenv_fn = {});

// Full serialization of the resolved config; parses back via
// apply_config_json onto defaults to an equivalent value.
std::string run_config_json(const RunConfig& config);

// Mock providers for empty URLs, remote providers otherwise, all seeded from
// config.seed.
ProviderSet make_providers(const RunConfig& config);

}  // namespace placekit
