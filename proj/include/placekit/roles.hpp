#pragma once
// Multi-label object-role classification. A frozen text embedding of the
// (instruction, object) pair feeds a small trainable two-layer head that
// scores the key / anchor / inference roles independently.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "placekit/learnkit.hpp"
#include "placekit/providers.hpp"

namespace placekit {

inline constexpr int kRoleClassCount = 3;

// Class order used everywhere: key, anchor, inference.
const std::array<std::string, kRoleClassCount>& role_class_labels();

struct RoleExample {
  std::string instruction;
  std::string object;
  std::array<double, kRoleClassCount> labels{0.0, 0.0, 0.0};  // each 0 or 1
};

// JSON: [{"instruction":s,"object":s,
//         "labels":{"key":b,"anchor":b,"inference":b}}]
std::vector<RoleExample> load_role_dataset(const std::string& json_text);
std::string save_role_dataset(const std::vector<RoleExample>& dataset);

// Embeds "instruction [SEP] object" after truncating the joint text to 128
// whitespace tokens.  Both strings must be non-empty.  Deterministic for a
// deterministic embedder.
std::vector<double> encode_pair(const std::string& instruction, const std::string& object,
                                const EmbeddingProvider& embedder);

// Dense embed_dim -> hidden -> 3 with a ReLU between; sigmoid is applied by
// predict.  Checkpoints carry {"embed_dim","hidden"} and round-trip exactly.
class RoleHead {
 public:
  explicit RoleHead(std::size_t embed_dim = kEmbedDim, std::size_t hidden = 128,
                    std::uint64_t init_seed = 0);
  RoleHead(const RoleHead&) = delete;
  RoleHead& operator=(const RoleHead&) = delete;
  RoleHead(RoleHead&&) = default;
  RoleHead& operator=(RoleHead&&) = default;

  // Pre-sigmoid class scores; the cache enables a backward pass.
  std::vector<double> logits(const std::vector<double>& features,
                             learnkit::Mlp::Cache* cache = nullptr) const;
  // Sigmoid class probabilities, each in [0, 1].
  std::array<double, kRoleClassCount> predict(const std::vector<double>& features) const;

  void save(const std::string& path) const;
  static RoleHead load(const std::string& path);

  std::size_t embed_dim() const { return embed_dim_; }
  std::size_t hidden() const { return hidden_; }
  learnkit::ParamStore& params() { return store_; }
  const learnkit::ParamStore& params() const { return store_; }
  const learnkit::Mlp& mlp() const { return mlp_; }

 private:
  std::size_t embed_dim_ = 0;
  std::size_t hidden_ = 0;
  learnkit::ParamStore store_;
  learnkit::Mlp mlp_;
};

struct RolePrediction {
  std::array<double, kRoleClassCount> probabilities{0.0, 0.0, 0.0};
  std::array<bool, kRoleClassCount> roles{false, false, false};  // prob >= threshold
};

RolePrediction predict_roles(const RoleHead& head, const std::vector<double>& features,
                             double threshold = 0.5);

// Binary cross-entropy summed over the classes of one example, with the
// 0*log(0) = 0 convention so the loss is exactly zero iff the probabilities
// equal the labels elementwise.
double bce_loss(const std::array<double, kRoleClassCount>& probabilities,
                const std::array<double, kRoleClassCount>& labels);

struct RoleTrainConfig {
  double lr = 3e-4;
  int batch_size = 16;
  int epochs = 50;
  std::uint64_t seed = 0;
};

struct RoleTrainResult {
  std::vector<double> epoch_loss;        // mean per-example BCE after each epoch's updates
  std::vector<std::string> warnings;     // degenerate label columns, etc.
};

// Adam on mean-over-batch, sum-over-class BCE with shuffled epochs.
// Embeddings are computed once per distinct pair text and reused.  The
// dataset must be non-empty and labels must be 0 or 1; a class with no
// positives or no negatives is reported as a warning and training proceeds.
// Deterministic for a fixed seed and a deterministic embedder.
RoleTrainResult train_head(RoleHead& head, const std::vector<RoleExample>& dataset,
                           const EmbeddingProvider& embedder,
                           const RoleTrainConfig& config = {});

}  // namespace placekit
