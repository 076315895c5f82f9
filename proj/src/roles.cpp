#include "placekit/roles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "placekit/error.hpp"
#include "placekit/rng.hpp"

namespace placekit {
namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// softplus(z) - y*z: the per-class BCE written against the logit, which stays
// finite for saturated probabilities and is exactly zero once a correct
// prediction saturates.
double logit_bce(double z, double y) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))) - y * z;
}

std::vector<std::string> whitespace_tokens(const std::string& text) {
  std::vector<std::string> tokens;
  std::istringstream in(text);
  std::string token;
  while (in >> token) tokens.push_back(token);
  return tokens;
}

}  // namespace

const std::array<std::string, kRoleClassCount>& role_class_labels() {
  static const std::array<std::string, kRoleClassCount> kLabels = {"key", "anchor",
                                                                   "inference"};
  return kLabels;
}

std::vector<RoleExample> load_role_dataset(const std::string& json_text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw_error(ErrorKind::parse, std::string("role dataset: ") + e.what());
  }
  if (!root.is_array()) throw_error(ErrorKind::schema, "role dataset must be a JSON array");
  std::vector<RoleExample> dataset;
  for (const auto& item : root) {
    if (!item.is_object() || !item.contains("instruction") || !item.contains("object") ||
        !item.contains("labels"))
      throw_error(ErrorKind::schema,
                  "role example needs instruction, object, and labels fields");
    RoleExample ex;
    if (!item["instruction"].is_string() || !item["object"].is_string())
      throw_error(ErrorKind::schema, "instruction and object must be strings");
    ex.instruction = item["instruction"].get<std::string>();
    ex.object = item["object"].get<std::string>();
    if (ex.instruction.empty() || ex.object.empty())
      throw_error(ErrorKind::schema, "instruction and object must be non-empty");
    const auto& labels = item["labels"];
    if (!labels.is_object())
      throw_error(ErrorKind::schema, "labels must be an object of booleans");
    for (int k = 0; k < kRoleClassCount; ++k) {
      const std::string& name = role_class_labels()[k];
      if (!labels.contains(name) || !labels[name].is_boolean())
        throw_error(ErrorKind::schema, "labels." + name + " must be a boolean");
      ex.labels[k] = labels[name].get<bool>() ? 1.0 : 0.0;
    }
    dataset.push_back(std::move(ex));
  }
  return dataset;
}

std::string save_role_dataset(const std::vector<RoleExample>& dataset) {
  nlohmann::ordered_json root = nlohmann::ordered_json::array();
  for (const RoleExample& ex : dataset) {
    nlohmann::ordered_json item;
    item["instruction"] = ex.instruction;
    item["object"] = ex.object;
    nlohmann::ordered_json labels;
    for (int k = 0; k < kRoleClassCount; ++k)
      labels[role_class_labels()[k]] = ex.labels[k] != 0.0;
    item["labels"] = labels;
    root.push_back(item);
  }
  return root.dump(2) + "\n";
}

std::vector<double> encode_pair(const std::string& instruction, const std::string& object,
                                const EmbeddingProvider& embedder) {
  if (instruction.empty() || object.empty())
    throw_error(ErrorKind::contract, "encode_pair needs non-empty instruction and object");
  std::vector<std::string> tokens = whitespace_tokens(instruction + " [SEP] " + object);
  constexpr std::size_t kMaxTokens = 128;
  if (tokens.size() > kMaxTokens) tokens.resize(kMaxTokens);
  std::string joined;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) joined += ' ';
    joined += tokens[i];
  }
  return embedder.embed(joined);
}

RoleHead::RoleHead(std::size_t embed_dim, std::size_t hidden, std::uint64_t init_seed)
    : embed_dim_(embed_dim), hidden_(hidden) {
  if (embed_dim == 0 || hidden == 0)
    throw_error(ErrorKind::contract, "role head dimensions must be positive");
  Rng rng(init_seed);
  mlp_ = learnkit::Mlp(store_, "role", embed_dim, hidden, kRoleClassCount, rng);
}

std::vector<double> RoleHead::logits(const std::vector<double>& features,
                                     learnkit::Mlp::Cache* cache) const {
  if (features.size() != embed_dim_)
    throw_error(ErrorKind::contract, "feature width does not match the role head");
  return mlp_.forward(features, cache);
}

std::array<double, kRoleClassCount> RoleHead::predict(
    const std::vector<double>& features) const {
  const std::vector<double> z = logits(features);
  std::array<double, kRoleClassCount> probs{};
  for (int k = 0; k < kRoleClassCount; ++k) probs[k] = sigmoid(z[k]);
  return probs;
}

void RoleHead::save(const std::string& path) const {
  nlohmann::ordered_json config;
  config["embed_dim"] = embed_dim_;
  config["hidden"] = hidden_;
  learnkit::write_checkpoint(path, config.dump(), store_);
}

RoleHead RoleHead::load(const std::string& path) {
  const learnkit::CheckpointData data = learnkit::read_checkpoint(path);
  std::size_t embed_dim = 0, hidden = 0;
  try {
    const auto config = nlohmann::json::parse(data.config_json);
    embed_dim = config.at("embed_dim").get<std::size_t>();
    hidden = config.at("hidden").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw_error(ErrorKind::schema, std::string("role head config: ") + e.what());
  }
  RoleHead head(embed_dim, hidden, 0);
  learnkit::apply_checkpoint(data, head.store_);
  return head;
}

RolePrediction predict_roles(const RoleHead& head, const std::vector<double>& features,
                             double threshold) {
  RolePrediction out;
  out.probabilities = head.predict(features);
  for (int k = 0; k < kRoleClassCount; ++k) out.roles[k] = out.probabilities[k] >= threshold;
  return out;
}

double bce_loss(const std::array<double, kRoleClassCount>& probabilities,
                const std::array<double, kRoleClassCount>& labels) {
  double loss = 0.0;
  for (int k = 0; k < kRoleClassCount; ++k) {
    const double p = probabilities[k], y = labels[k];
    if (y > 0.0) loss -= y * std::log(p);
    if (y < 1.0) loss -= (1.0 - y) * std::log(1.0 - p);
  }
  return loss;
}

RoleTrainResult train_head(RoleHead& head, const std::vector<RoleExample>& dataset,
                           const EmbeddingProvider& embedder,
                           const RoleTrainConfig& config) {
  if (dataset.empty()) throw_error(ErrorKind::contract, "role dataset is empty");
  if (config.lr <= 0.0) throw_error(ErrorKind::contract, "learning rate must be positive");
  if (config.batch_size < 1) throw_error(ErrorKind::contract, "batch size must be positive");
  if (config.epochs < 1) throw_error(ErrorKind::contract, "epochs must be positive");
  for (const RoleExample& ex : dataset)
    for (double y : ex.labels)
      if (y != 0.0 && y != 1.0)
        throw_error(ErrorKind::contract, "role labels must be 0 or 1");

  RoleTrainResult result;
  for (int k = 0; k < kRoleClassCount; ++k) {
    int positives = 0;
    for (const RoleExample& ex : dataset) positives += ex.labels[k] != 0.0;
    if (positives == 0)
      result.warnings.push_back("class \"" + role_class_labels()[k] +
                                "\" has no positive examples");
    else if (positives == static_cast<int>(dataset.size()))
      result.warnings.push_back("class \"" + role_class_labels()[k] +
                                "\" has no negative examples");
  }

  // One embedding per distinct pair; repeated examples share the vector.
  std::map<std::string, std::vector<double>> embed_cache;
  std::vector<const std::vector<double>*> features;
  features.reserve(dataset.size());
  for (const RoleExample& ex : dataset) {
    const std::string key = ex.instruction + '\x1f' + ex.object;
    auto it = embed_cache.find(key);
    if (it == embed_cache.end())
      it = embed_cache.emplace(key, encode_pair(ex.instruction, ex.object, embedder)).first;
    features.push_back(&it->second);
  }

  learnkit::AdamConfig adam;
  adam.lr = config.lr;
  Rng rng(config.seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const double inv_batch = 1.0 / static_cast<double>(end - start);
      head.params().zero_grad();
      for (std::size_t i = start; i < end; ++i) {
        const std::size_t idx = order[i];
        learnkit::Mlp::Cache cache;
        const std::vector<double> z = head.logits(*features[idx], &cache);
        std::vector<double> dz(kRoleClassCount);
        for (int k = 0; k < kRoleClassCount; ++k)
          dz[k] = (sigmoid(z[k]) - dataset[idx].labels[k]) * inv_batch;
        head.mlp().backward(dz, cache);
      }
      learnkit::adam_step(head.params(), adam);
    }

    double epoch_loss = 0.0;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      const std::vector<double> z = head.logits(*features[i]);
      for (int k = 0; k < kRoleClassCount; ++k)
        epoch_loss += logit_bce(z[k], dataset[i].labels[k]);
    }
    result.epoch_loss.push_back(epoch_loss / static_cast<double>(dataset.size()));
  }
  return result;
}

}  // namespace placekit
