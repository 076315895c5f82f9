#include "placekit/config.hpp"

#include <cstdlib>
#include <initializer_list>
#include <string>

#include "json.hpp"
#include "placekit/error.hpp"

namespace placekit {
namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) {
        known = true;
        break;
      }
    if (!known) throw_error(ErrorKind::schema, "config: unknown key " + where + item.key());
  }
}

const json* section(const json& root, const char* key) {
  if (!root.contains(key)) return nullptr;
  const json& j = root.at(key);
  if (!j.is_object())
    throw_error(ErrorKind::schema, std::string("config: ") + key + " must be an object");
  return &j;
}

void read_double(const json& obj, const std::string& where, const char* key, double& out) {
  if (!obj.contains(key)) return;
  if (!obj.at(key).is_number())
    throw_error(ErrorKind::schema, "config: " + where + key + " must be a number");
  out = obj.at(key).get<double>();
}

void read_int(const json& obj, const std::string& where, const char* key, int& out) {
  if (!obj.contains(key)) return;
  if (!obj.at(key).is_number_integer())
    throw_error(ErrorKind::schema, "config: " + where + key + " must be an integer");
  out = obj.at(key).get<int>();
}

void read_u64(const json& obj, const std::string& where, const char* key, std::uint64_t& out) {
  if (!obj.contains(key)) return;
  if (!obj.at(key).is_number_unsigned() && !obj.at(key).is_number_integer())
    throw_error(ErrorKind::schema, "config: " + where + key + " must be an integer");
  out = obj.at(key).get<std::uint64_t>();
}

void read_bool(const json& obj, const std::string& where, const char* key, bool& out) {
  if (!obj.contains(key)) return;
  if (!obj.at(key).is_boolean())
    throw_error(ErrorKind::schema, "config: " + where + key + " must be a boolean");
  out = obj.at(key).get<bool>();
}

void read_string(const json& obj, const std::string& where, const char* key, std::string& out) {
  if (!obj.contains(key)) return;
  if (!obj.at(key).is_string())
    throw_error(ErrorKind::schema, "config: " + where + key + " must be a string");
  out = obj.at(key).get<std::string>();
}

}  // namespace

void RunConfig::finalize() {
  budget.seed = seed;
  train.seed = seed;
  roles.seed = seed;
  vr.seed = seed;
  budget.validate();
  vr.validate();
  if (env.resolution <= 0.0)
    throw_error(ErrorKind::contract, "config: env.resolution must be positive");
  if (eval_resolution <= 0.0)
    throw_error(ErrorKind::contract, "config: eval.resolution must be positive");
  if (jobs < 0) throw_error(ErrorKind::contract, "config: jobs must be non-negative");
  if (train.epochs < 1 || train.batch_size < 1 || train.lr <= 0.0)
    throw_error(ErrorKind::contract, "config: train epochs, batch_size, and lr must be positive");
  if (roles.epochs < 1 || roles.batch_size < 1 || roles.lr <= 0.0)
    throw_error(ErrorKind::contract, "config: roles epochs, batch_size, and lr must be positive");
}

void apply_config_json(RunConfig& config, const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw_error(ErrorKind::parse, std::string("config: ") + e.what());
  }
  if (!root.is_object()) throw_error(ErrorKind::schema, "config: root must be an object");
  check_keys(root, "",
             {"seed", "providers", "env", "energy_weights", "energy_params", "budget", "train",
              "model", "roles", "vr", "eval", "jobs", "deterministic_output"});

  read_u64(root, "", "seed", config.seed);
  read_int(root, "", "jobs", config.jobs);
  read_bool(root, "", "deterministic_output", config.deterministic_output);

  if (const json* j = section(root, "providers")) {
    check_keys(*j, "providers.", {"embed_url", "scorer_url", "llm_url"});
    read_string(*j, "providers.", "embed_url", config.embed_url);
    read_string(*j, "providers.", "scorer_url", config.scorer_url);
    read_string(*j, "providers.", "llm_url", config.llm_url);
  }
  if (const json* j = section(root, "env")) {
    check_keys(*j, "env.", {"resolution", "tau_reject", "tau_contain", "n_retry", "delta_reward"});
    read_double(*j, "env.", "resolution", config.env.resolution);
    read_double(*j, "env.", "tau_reject", config.env.tau_reject);
    read_double(*j, "env.", "tau_contain", config.env.tau_contain);
    read_int(*j, "env.", "n_retry", config.env.n_retry);
    read_bool(*j, "env.", "delta_reward", config.env.delta_reward);
  }
  if (const json* j = section(root, "energy_weights")) {
    check_keys(*j, "energy_weights.",
               {"relational", "collision", "out_of_bounds", "navigation", "affordance"});
    read_double(*j, "energy_weights.", "relational", config.env.weights.relational);
    read_double(*j, "energy_weights.", "collision", config.env.weights.collision);
    read_double(*j, "energy_weights.", "out_of_bounds", config.env.weights.out_of_bounds);
    read_double(*j, "energy_weights.", "navigation", config.env.weights.navigation);
    read_double(*j, "energy_weights.", "affordance", config.env.weights.affordance);
  }
  if (const json* j = section(root, "energy_params")) {
    check_keys(*j, "energy_params.",
               {"prior_blend", "prior_e_max", "nav_resolution", "clearance_depth",
                "clearance_margin", "edge_margin", "wall_margin", "aff_blocked_weight",
                "aff_overlap_weight"});
    read_double(*j, "energy_params.", "prior_blend", config.env.params.prior_blend);
    read_double(*j, "energy_params.", "prior_e_max", config.env.params.prior_e_max);
    read_double(*j, "energy_params.", "nav_resolution", config.env.params.nav_resolution);
    read_double(*j, "energy_params.", "clearance_depth", config.env.params.clearance_depth);
    read_double(*j, "energy_params.", "clearance_margin", config.env.params.clearance_margin);
    read_double(*j, "energy_params.", "edge_margin", config.env.params.edge_margin);
    read_double(*j, "energy_params.", "wall_margin", config.env.params.wall_margin);
    read_double(*j, "energy_params.", "aff_blocked_weight", config.env.params.aff_blocked_weight);
    read_double(*j, "energy_params.", "aff_overlap_weight", config.env.params.aff_overlap_weight);
  }
  if (const json* j = section(root, "budget")) {
    check_keys(*j, "budget.", {"max_attempts_per_object", "anneal"});
    read_int(*j, "budget.", "max_attempts_per_object", config.budget.max_attempts_per_object);
    if (const json* a = section(*j, "anneal")) {
      check_keys(*a, "budget.anneal.", {"iters", "t0", "cooling"});
      read_int(*a, "budget.anneal.", "iters", config.budget.anneal.iters);
      read_double(*a, "budget.anneal.", "t0", config.budget.anneal.t0);
      read_double(*a, "budget.anneal.", "cooling", config.budget.anneal.cooling);
    }
  }
  if (const json* j = section(root, "train")) {
    check_keys(*j, "train.",
               {"epochs", "batch_size", "lr", "gamma", "lambda_policy", "lambda_value",
                "lambda_aux", "lambda_entropy", "alpha", "grad_clip"});
    read_int(*j, "train.", "epochs", config.train.epochs);
    read_int(*j, "train.", "batch_size", config.train.batch_size);
    read_double(*j, "train.", "lr", config.train.lr);
    read_double(*j, "train.", "gamma", config.train.gamma);
    read_double(*j, "train.", "lambda_policy", config.train.lambda_policy);
    read_double(*j, "train.", "lambda_value", config.train.lambda_value);
    read_double(*j, "train.", "lambda_aux", config.train.lambda_aux);
    read_double(*j, "train.", "lambda_entropy", config.train.lambda_entropy);
    read_double(*j, "train.", "alpha", config.train.alpha);
    read_double(*j, "train.", "grad_clip", config.train.grad_clip);
  }
  if (const json* j = section(root, "model")) {
    check_keys(*j, "model.", {"h_d", "mechanism", "heads", "sff_enabled", "aux_enabled"});
    read_int(*j, "model.", "h_d", config.model.h_d);
    read_int(*j, "model.", "heads", config.model.heads);
    read_bool(*j, "model.", "sff_enabled", config.model.sff_enabled);
    read_bool(*j, "model.", "aux_enabled", config.model.aux_enabled);
    if (j->contains("mechanism")) {
      if (!j->at("mechanism").is_string())
        throw_error(ErrorKind::schema, "config: model.mechanism must be a string");
      config.model.mechanism =
          learnkit::fusion_from_string(j->at("mechanism").get<std::string>());
    }
  }
  if (const json* j = section(root, "roles")) {
    check_keys(*j, "roles.", {"lr", "batch_size", "epochs"});
    read_double(*j, "roles.", "lr", config.roles.lr);
    read_int(*j, "roles.", "batch_size", config.roles.batch_size);
    read_int(*j, "roles.", "epochs", config.roles.epochs);
  }
  if (const json* j = section(root, "vr")) {
    check_keys(*j, "vr.", {"standoff", "trials", "interaction_reach", "body_radius"});
    read_double(*j, "vr.", "standoff", config.vr.standoff);
    read_int(*j, "vr.", "trials", config.vr.trials);
    read_double(*j, "vr.", "interaction_reach", config.vr.interaction_reach);
    read_double(*j, "vr.", "body_radius", config.vr.body_radius);
  }
  if (const json* j = section(root, "eval")) {
    check_keys(*j, "eval.", {"resolution"});
    read_double(*j, "eval.", "resolution", config.eval_resolution);
  }
}

void apply_config_env(RunConfig& config,
                      const std::function<const char*(const char*)>& getenv_fn) {
  const auto lookup = getenv_fn ? getenv_fn
                                : [](const char* name) { return std::getenv(name); };
  auto overlay = [&](const char* name, std::string& out) {
    const char* value = lookup(name);
    if (value != nullptr && value[0] != '\0') out = value;
  };
  overlay("LAYOUT_EMBED_URL", config.embed_url);
  overlay("LAYOUT_SCORER_URL", config.scorer_url);
  overlay("LAYOUT_LLM_URL", config.llm_url);
}

std::string run_config_json(const RunConfig& config) {
  nlohmann::ordered_json j;
  j["seed"] = config.seed;
  j["providers"] = {{"embed_url", config.embed_url},
                    {"scorer_url", config.scorer_url},
                    {"llm_url", config.llm_url}};
  j["env"] = {{"resolution", config.env.resolution},
              {"tau_reject", config.env.tau_reject},
              {"tau_contain", config.env.tau_contain},
              {"n_retry", config.env.n_retry},
              {"delta_reward", config.env.delta_reward}};
  j["energy_weights"] = {{"relational", config.env.weights.relational},
                         {"collision", config.env.weights.collision},
                         {"out_of_bounds", config.env.weights.out_of_bounds},
                         {"navigation", config.env.weights.navigation},
                         {"affordance", config.env.weights.affordance}};
  j["energy_params"] = {{"prior_blend", config.env.params.prior_blend},
                        {"prior_e_max", config.env.params.prior_e_max},
                        {"nav_resolution", config.env.params.nav_resolution},
                        {"clearance_depth", config.env.params.clearance_depth},
                        {"clearance_margin", config.env.params.clearance_margin},
                        {"edge_margin", config.env.params.edge_margin},
                        {"wall_margin", config.env.params.wall_margin},
                        {"aff_blocked_weight", config.env.params.aff_blocked_weight},
                        {"aff_overlap_weight", config.env.params.aff_overlap_weight}};
  j["budget"] = {{"max_attempts_per_object", config.budget.max_attempts_per_object},
                 {"anneal",
                  {{"iters", config.budget.anneal.iters},
                   {"t0", config.budget.anneal.t0},
                   {"cooling", config.budget.anneal.cooling}}}};
  j["train"] = {{"epochs", config.train.epochs},
                {"batch_size", config.train.batch_size},
                {"lr", config.train.lr},
                {"gamma", config.train.gamma},
                {"lambda_policy", config.train.lambda_policy},
                {"lambda_value", config.train.lambda_value},
                {"lambda_aux", config.train.lambda_aux},
                {"lambda_entropy", config.train.lambda_entropy},
                {"alpha", config.train.alpha},
                {"grad_clip", config.train.grad_clip}};
  j["model"] = {{"h_d", config.model.h_d},
                {"mechanism", learnkit::to_string(config.model.mechanism)},
                {"heads", config.model.heads},
                {"sff_enabled", config.model.sff_enabled},
                {"aux_enabled", config.model.aux_enabled}};
  j["roles"] = {{"lr", config.roles.lr},
                {"batch_size", config.roles.batch_size},
                {"epochs", config.roles.epochs}};
  j["vr"] = {{"standoff", config.vr.standoff},
             {"trials", config.vr.trials},
             {"interaction_reach", config.vr.interaction_reach},
             {"body_radius", config.vr.body_radius}};
  j["eval"] = {{"resolution", config.eval_resolution}};
  j["jobs"] = config.jobs;
  j["deterministic_output"] = config.deterministic_output;
  return j.dump(2) + "\n";
}

ProviderSet make_providers(const RunConfig& config) {
  ProviderOptions opts;
  opts.seed = config.seed;
  ProviderSet providers;
  providers.embedder = config.embed_url.empty()
                           ? make_mock_embedding_provider(opts)
                           : make_remote_embedding_provider(config.embed_url, opts);
  providers.scorer = config.scorer_url.empty()
                         ? make_mock_semantic_scorer(opts)
                         : make_remote_semantic_scorer(config.scorer_url, opts);
  providers.llm = config.llm_url.empty() ? make_mock_llm_client(opts)
                                         : make_remote_llm_client(config.llm_url, opts);
  return providers;
}

}  // namespace placekit
