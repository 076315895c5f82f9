#pragma once
// Minimal differentiable building blocks with hand-written backward passes.
// Everything is 64-bit floats: the networks are desk-scale, so determinism
// and gradient-check fidelity matter more than speed. Layers register their
// parameters in a ParamStore under stable names; forward passes fill a
// per-call cache that the matching backward pass consumes, so frozen
// snapshots can run forward from many threads at once.

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "placekit/rng.hpp"

namespace placekit::learnkit {

struct ParamTensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> value;
  std::vector<double> grad;
  std::vector<double> m;  // Adam first moment
  std::vector<double> v;  // Adam second moment
  std::int64_t step = 0;

  std::size_t size() const { return value.size(); }
};

class ParamStore {
 public:
  // Registers a tensor filled uniformly from ±bound (bound 0 → zeros).
  // Names must be unique; registration order is the serialization order.
  ParamTensor& add(const std::string& name, std::vector<std::size_t> shape,
                   double bound, Rng& rng);
  ParamTensor& at(const std::string& name);
  const ParamTensor& at(const std::string& name) const;
  bool contains(const std::string& name) const;
  std::size_t count() const { return tensors_.size(); }
  std::deque<ParamTensor>& tensors() { return tensors_; }
  const std::deque<ParamTensor>& tensors() const { return tensors_; }
  void zero_grad();

 private:
  std::deque<ParamTensor> tensors_;  // deque: references stay valid as we add
  std::map<std::string, std::size_t> index_;
};

// Uniform initialization bound sqrt(6 / (fan_in + fan_out)).
double glorot_bound(std::size_t fan_in, std::size_t fan_out);

// y = W x (+ b), optionally followed by ReLU. W is (out × in) row-major.
class Dense {
 public:
  struct Cache {
    std::vector<double> x;
    std::vector<double> pre;  // pre-activation, kept only when relu is on
  };

  Dense() = default;
  Dense(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t out,
        bool relu, Rng& rng, bool bias = true);

  std::vector<double> forward(const std::vector<double>& x, Cache* cache = nullptr) const;
  // Accumulates parameter gradients and returns dL/dx.
  std::vector<double> backward(const std::vector<double>& dy, const Cache& cache) const;

  std::size_t in_dim() const { return in_; }
  std::size_t out_dim() const { return out_; }
  ParamTensor& weight() { return *w_; }
  ParamTensor* bias() { return b_; }

 private:
  ParamTensor* w_ = nullptr;
  ParamTensor* b_ = nullptr;
  std::size_t in_ = 0;
  std::size_t out_ = 0;
  bool relu_ = false;
};

// Two dense layers with a ReLU between them.
class Mlp {
 public:
  struct Cache {
    Dense::Cache c1;
    Dense::Cache c2;
  };

  Mlp() = default;
  Mlp(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t hidden,
      std::size_t out, Rng& rng);

  std::vector<double> forward(const std::vector<double>& x, Cache* cache = nullptr) const;
  std::vector<double> backward(const std::vector<double>& dy, const Cache& cache) const;

  std::size_t in_dim() const { return l1_.in_dim(); }
  std::size_t out_dim() const { return l2_.out_dim(); }

 private:
  Dense l1_;
  Dense l2_;
};

// Two rounds of mean-aggregator graph convolution followed by global mean
// pooling. Each round: h_i ← ReLU(W_self h_i + W_neigh · mean_{j∈N(i)} h_j + b),
// with a zero neighbor mean for isolated nodes. Neighbor lists must be
// symmetric and self-loop free.
class SageEncoder {
 public:
  struct LayerCache {
    std::vector<std::vector<double>> inputs;
    std::vector<std::vector<double>> means;
    std::vector<std::vector<double>> pre;
  };
  struct Cache {
    LayerCache l1;
    LayerCache l2;
    std::size_t nodes = 0;
  };

  SageEncoder() = default;
  SageEncoder(ParamStore& store, const std::string& prefix, std::size_t in,
              std::size_t hidden, std::size_t out, Rng& rng);

  std::vector<double> forward(const std::vector<std::vector<double>>& nodes,
                              const std::vector<std::vector<int>>& neighbors,
                              Cache* cache = nullptr) const;
  // Parameter gradients only; node features are leaves of the graph.
  void backward(const std::vector<double>& dpooled, const Cache& cache,
                const std::vector<std::vector<int>>& neighbors) const;

  std::size_t in_dim() const { return in_; }
  std::size_t out_dim() const { return out_; }

 private:
  struct Layer {
    ParamTensor* w_self = nullptr;
    ParamTensor* w_neigh = nullptr;
    ParamTensor* b = nullptr;
    std::size_t in = 0;
    std::size_t out = 0;
  };

  std::vector<std::vector<double>> layer_forward(const Layer& layer,
                                                 const std::vector<std::vector<double>>& h,
                                                 const std::vector<std::vector<int>>& neighbors,
                                                 LayerCache* cache) const;
  std::vector<std::vector<double>> layer_backward(const Layer& layer,
                                                  const std::vector<std::vector<double>>& dout,
                                                  const LayerCache& cache,
                                                  const std::vector<std::vector<int>>& neighbors) const;

  Layer l1_;
  Layer l2_;
  std::size_t in_ = 0;
  std::size_t out_ = 0;
};

enum class FusionMechanism { cross, self_attention, concat };

std::string to_string(FusionMechanism mechanism);
FusionMechanism fusion_from_string(const std::string& text);

// Fuses two equal-width vectors into one.
//   cross:  multi-head attention with query = a and a single key/value token
//           from b, residual add, then a residual two-layer feed-forward
//           refinement of width 2·dim.
//   self:   multi-head self-attention over the two-token stack [a; b] with a
//           residual add per token, then the token mean.
//   concat: [a ∥ b] through a single dense layer back to dim.
class Fusion {
 public:
  struct Cache {
    std::vector<double> a;
    std::vector<double> b;
    Dense::Cache qc, kc, vc, oc, f1c, f2c;
    Dense::Cache qc2, kc2, vc2, oc2;  // self-attention second token
    std::vector<double> q, k, v, q2, k2, v2;
    std::vector<double> att;  // self-attention weights, per head × query token
    std::vector<double> x1;
    Dense::Cache concat_cache;
  };

  Fusion() = default;
  Fusion(ParamStore& store, const std::string& prefix, std::size_t dim,
         FusionMechanism mechanism, std::size_t heads, Rng& rng);

  std::vector<double> forward(const std::vector<double>& a, const std::vector<double>& b,
                              Cache* cache = nullptr) const;
  // Returns (dL/da, dL/db) and accumulates parameter gradients.
  std::pair<std::vector<double>, std::vector<double>> backward(const std::vector<double>& df,
                                                               const Cache& cache) const;

  FusionMechanism mechanism() const { return mechanism_; }
  std::size_t dim() const { return dim_; }

 private:
  FusionMechanism mechanism_ = FusionMechanism::concat;
  std::size_t dim_ = 0;
  std::size_t heads_ = 1;
  Dense q_, k_, v_, o_;   // attention projections (bias-free)
  Dense ffn1_, ffn2_;     // cross-mechanism refinement
  Dense concat_;
};

// f = P(x) ⊙ sigmoid(G(x)), layer-normalized, then compressed to `out`.
class GateProject {
 public:
  struct Cache {
    Dense::Cache pc, gc, cc;
    std::vector<double> p, s, f, xhat;
    double inv_std = 0.0;
  };

  GateProject() = default;
  GateProject(ParamStore& store, const std::string& prefix, std::size_t in,
              std::size_t dim, std::size_t out, Rng& rng);

  std::vector<double> forward(const std::vector<double>& x, Cache* cache = nullptr) const;
  std::vector<double> backward(const std::vector<double>& dy, const Cache& cache) const;

  std::size_t in_dim() const { return in_; }
  std::size_t out_dim() const { return out_; }

 private:
  Dense project_;
  Dense gate_;
  Dense compress_;
  ParamTensor* ln_gamma_ = nullptr;
  ParamTensor* ln_beta_ = nullptr;
  std::size_t in_ = 0;
  std::size_t dim_ = 0;
  std::size_t out_ = 0;
  static constexpr double kLnEps = 1e-5;
};

// Masked categorical distribution over action logits. Masked entries carry
// exactly zero probability; probabilities over the valid set sum to 1.
struct PolicyEval {
  std::vector<double> probs;
  std::vector<double> logp;  // log probabilities; -inf at masked entries
  std::vector<char> mask;
  double entropy = 0.0;
};

// Throws a contract error when no action is valid.
PolicyEval masked_policy(const std::vector<double>& logits, const std::vector<char>& mask);
double log_prob(const PolicyEval& policy, int action);
int sample_action(const PolicyEval& policy, Rng& rng);
// Highest probability; equal probabilities resolve to the lowest index.
int argmax_action(const PolicyEval& policy);
// dL/dlogits for L = logp_coeff · log π(action) + entropy_coeff · H(π).
std::vector<double> policy_logit_grad(const PolicyEval& policy, int action,
                                      double logp_coeff, double entropy_coeff);

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Standard bias-corrected Adam over every tensor in the store. Non-finite
// gradients or resulting values raise an error naming the parameter.
void adam_step(ParamStore& store, const AdamConfig& config);

// Central-difference gradient check. `backprop` must zero the store's
// gradients, run the forward pass, and run the backward pass; `loss` must
// recompute the same scalar from current parameter values without side
// effects. Returns the max relative error over every parameter entry.
double grad_check(ParamStore& store, const std::function<double()>& loss,
                  const std::function<void()>& backprop, double eps = 1e-5);

// Same comparison for an input buffer against its analytic gradient.
double grad_check_values(std::vector<double>& values, const std::vector<double>& analytic,
                         const std::function<double()>& loss, double eps = 1e-5);

// Versioned binary checkpoint: a config string plus every named parameter
// array (shape + row-major 64-bit values). Round-trips bit-exactly.
struct CheckpointArray {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> value;
};

struct CheckpointData {
  std::string config_json;
  std::vector<CheckpointArray> arrays;
};

void write_checkpoint(const std::string& path, const std::string& config_json,
                      const ParamStore& store);
CheckpointData read_checkpoint(const std::string& path);
// Copies arrays into an already-constructed store; name or shape mismatches
// are schema errors.
void apply_checkpoint(const CheckpointData& data, ParamStore& store);

}  // namespace placekit::learnkit
