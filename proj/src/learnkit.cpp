#include "placekit/learnkit.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "placekit/error.hpp"

namespace placekit::learnkit {
namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

void check_dim(std::size_t got, std::size_t want, const char* where) {
  if (got != want) {
    throw_error(ErrorKind::contract, std::string(where) + ": input has " +
                                         std::to_string(got) + " entries, expected " +
                                         std::to_string(want));
  }
}

}  // namespace

ParamTensor& ParamStore::add(const std::string& name, std::vector<std::size_t> shape,
                             double bound, Rng& rng) {
  if (index_.count(name) != 0) {
    throw_error(ErrorKind::contract, "parameter registered twice: " + name);
  }
  ParamTensor tensor;
  tensor.name = name;
  tensor.shape = std::move(shape);
  const std::size_t n = shape_product(tensor.shape);
  tensor.value.resize(n, 0.0);
  tensor.grad.resize(n, 0.0);
  tensor.m.resize(n, 0.0);
  tensor.v.resize(n, 0.0);
  if (bound != 0.0) {
    for (auto& x : tensor.value) x = rng.uniform(-bound, bound);
  }
  index_[name] = tensors_.size();
  tensors_.push_back(std::move(tensor));
  return tensors_.back();
}

ParamTensor& ParamStore::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) {
    throw_error(ErrorKind::reference, "unknown parameter: " + name);
  }
  return tensors_[it->second];
}

const ParamTensor& ParamStore::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) {
    throw_error(ErrorKind::reference, "unknown parameter: " + name);
  }
  return tensors_[it->second];
}

bool ParamStore::contains(const std::string& name) const {
  return index_.count(name) != 0;
}

void ParamStore::zero_grad() {
  for (auto& tensor : tensors_) {
    std::fill(tensor.grad.begin(), tensor.grad.end(), 0.0);
  }
}

double glorot_bound(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

Dense::Dense(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t out,
             bool relu, Rng& rng, bool bias)
    : in_(in), out_(out), relu_(relu) {
  w_ = &store.add(prefix + "/w", {out, in}, glorot_bound(in, out), rng);
  if (bias) b_ = &store.add(prefix + "/b", {out}, 0.0, rng);
}

std::vector<double> Dense::forward(const std::vector<double>& x, Cache* cache) const {
  check_dim(x.size(), in_, "dense forward");
  std::vector<double> y(out_, 0.0);
  const double* w = w_->value.data();
  for (std::size_t o = 0; o < out_; ++o) {
    double acc = b_ != nullptr ? b_->value[o] : 0.0;
    const double* row = w + o * in_;
    for (std::size_t i = 0; i < in_; ++i) acc += row[i] * x[i];
    y[o] = acc;
  }
  if (cache != nullptr) {
    cache->x = x;
    if (relu_) cache->pre = y;
  }
  if (relu_) {
    for (auto& v : y) v = v > 0.0 ? v : 0.0;
  }
  return y;
}

std::vector<double> Dense::backward(const std::vector<double>& dy, const Cache& cache) const {
  check_dim(dy.size(), out_, "dense backward");
  check_dim(cache.x.size(), in_, "dense backward cache");
  std::vector<double> dpre(dy);
  if (relu_) {
    for (std::size_t o = 0; o < out_; ++o) {
      if (cache.pre[o] <= 0.0) dpre[o] = 0.0;
    }
  }
  std::vector<double> dx(in_, 0.0);
  double* wg = w_->grad.data();
  const double* w = w_->value.data();
  for (std::size_t o = 0; o < out_; ++o) {
    const double g = dpre[o];
    if (b_ != nullptr) b_->grad[o] += g;
    double* grow = wg + o * in_;
    const double* row = w + o * in_;
    for (std::size_t i = 0; i < in_; ++i) {
      grow[i] += g * cache.x[i];
      dx[i] += row[i] * g;
    }
  }
  return dx;
}

Mlp::Mlp(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t hidden,
         std::size_t out, Rng& rng)
    : l1_(store, prefix + "/l1", in, hidden, true, rng),
      l2_(store, prefix + "/l2", hidden, out, false, rng) {}

std::vector<double> Mlp::forward(const std::vector<double>& x, Cache* cache) const {
  Dense::Cache local1;
  Dense::Cache local2;
  Dense::Cache* c1 = cache != nullptr ? &cache->c1 : &local1;
  Dense::Cache* c2 = cache != nullptr ? &cache->c2 : &local2;
  return l2_.forward(l1_.forward(x, c1), c2);
}

std::vector<double> Mlp::backward(const std::vector<double>& dy, const Cache& cache) const {
  return l1_.backward(l2_.backward(dy, cache.c2), cache.c1);
}

SageEncoder::SageEncoder(ParamStore& store, const std::string& prefix, std::size_t in,
                         std::size_t hidden, std::size_t out, Rng& rng)
    : in_(in), out_(out) {
  const double bound1 = glorot_bound(in, hidden);
  l1_.w_self = &store.add(prefix + "/l1/w_self", {hidden, in}, bound1, rng);
  l1_.w_neigh = &store.add(prefix + "/l1/w_neigh", {hidden, in}, bound1, rng);
  l1_.b = &store.add(prefix + "/l1/b", {hidden}, 0.0, rng);
  l1_.in = in;
  l1_.out = hidden;
  const double bound2 = glorot_bound(hidden, out);
  l2_.w_self = &store.add(prefix + "/l2/w_self", {out, hidden}, bound2, rng);
  l2_.w_neigh = &store.add(prefix + "/l2/w_neigh", {out, hidden}, bound2, rng);
  l2_.b = &store.add(prefix + "/l2/b", {out}, 0.0, rng);
  l2_.in = hidden;
  l2_.out = out;
}

std::vector<std::vector<double>> SageEncoder::layer_forward(
    const Layer& layer, const std::vector<std::vector<double>>& h,
    const std::vector<std::vector<int>>& neighbors, LayerCache* cache) const {
  const std::size_t nodes = h.size();
  std::vector<std::vector<double>> out(nodes);
  if (cache != nullptr) {
    cache->inputs = h;
    cache->means.assign(nodes, {});
    cache->pre.assign(nodes, {});
  }
  for (std::size_t i = 0; i < nodes; ++i) {
    check_dim(h[i].size(), layer.in, "sage layer forward");
    std::vector<double> mean(layer.in, 0.0);
    if (!neighbors[i].empty()) {
      for (int j : neighbors[i]) {
        for (std::size_t d = 0; d < layer.in; ++d) mean[d] += h[static_cast<std::size_t>(j)][d];
      }
      const double inv = 1.0 / static_cast<double>(neighbors[i].size());
      for (auto& v : mean) v *= inv;
    }
    std::vector<double> pre(layer.out, 0.0);
    for (std::size_t o = 0; o < layer.out; ++o) {
      double acc = layer.b->value[o];
      const double* ws = layer.w_self->value.data() + o * layer.in;
      const double* wn = layer.w_neigh->value.data() + o * layer.in;
      for (std::size_t d = 0; d < layer.in; ++d) acc += ws[d] * h[i][d] + wn[d] * mean[d];
      pre[o] = acc;
    }
    if (cache != nullptr) {
      cache->means[i] = mean;
      cache->pre[i] = pre;
    }
    out[i] = pre;
    for (auto& v : out[i]) v = v > 0.0 ? v : 0.0;
  }
  return out;
}

std::vector<std::vector<double>> SageEncoder::layer_backward(
    const Layer& layer, const std::vector<std::vector<double>>& dout, const LayerCache& cache,
    const std::vector<std::vector<int>>& neighbors) const {
  const std::size_t nodes = dout.size();
  std::vector<std::vector<double>> dh(nodes, std::vector<double>(layer.in, 0.0));
  for (std::size_t i = 0; i < nodes; ++i) {
    std::vector<double> dpre(dout[i]);
    for (std::size_t o = 0; o < layer.out; ++o) {
      if (cache.pre[i][o] <= 0.0) dpre[o] = 0.0;
    }
    const double inv =
        neighbors[i].empty() ? 0.0 : 1.0 / static_cast<double>(neighbors[i].size());
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double g = dpre[o];
      if (g == 0.0) continue;
      layer.b->grad[o] += g;
      double* gs = layer.w_self->grad.data() + o * layer.in;
      double* gn = layer.w_neigh->grad.data() + o * layer.in;
      const double* ws = layer.w_self->value.data() + o * layer.in;
      const double* wn = layer.w_neigh->value.data() + o * layer.in;
      for (std::size_t d = 0; d < layer.in; ++d) {
        gs[d] += g * cache.inputs[i][d];
        gn[d] += g * cache.means[i][d];
        dh[i][d] += ws[d] * g;
      }
      for (int j : neighbors[i]) {
        auto& row = dh[static_cast<std::size_t>(j)];
        for (std::size_t d = 0; d < layer.in; ++d) row[d] += wn[d] * g * inv;
      }
    }
  }
  return dh;
}

std::vector<double> SageEncoder::forward(const std::vector<std::vector<double>>& nodes,
                                         const std::vector<std::vector<int>>& neighbors,
                                         Cache* cache) const {
  if (nodes.empty()) {
    throw_error(ErrorKind::contract, "sage forward: at least one node is required");
  }
  check_dim(neighbors.size(), nodes.size(), "sage forward adjacency");
  LayerCache local1;
  LayerCache local2;
  LayerCache* c1 = cache != nullptr ? &cache->l1 : &local1;
  LayerCache* c2 = cache != nullptr ? &cache->l2 : &local2;
  const auto h1 = layer_forward(l1_, nodes, neighbors, c1);
  const auto h2 = layer_forward(l2_, h1, neighbors, c2);
  if (cache != nullptr) cache->nodes = nodes.size();
  std::vector<double> pooled(out_, 0.0);
  for (const auto& row : h2) {
    for (std::size_t d = 0; d < out_; ++d) pooled[d] += row[d];
  }
  const double inv = 1.0 / static_cast<double>(nodes.size());
  for (auto& v : pooled) v *= inv;
  return pooled;
}

void SageEncoder::backward(const std::vector<double>& dpooled, const Cache& cache,
                           const std::vector<std::vector<int>>& neighbors) const {
  check_dim(dpooled.size(), out_, "sage backward");
  const double inv = 1.0 / static_cast<double>(cache.nodes);
  std::vector<double> dnode(out_);
  for (std::size_t d = 0; d < out_; ++d) dnode[d] = dpooled[d] * inv;
  std::vector<std::vector<double>> dout2(cache.nodes, dnode);
  const auto dh1 = layer_backward(l2_, dout2, cache.l2, neighbors);
  layer_backward(l1_, dh1, cache.l1, neighbors);
}

std::string to_string(FusionMechanism mechanism) {
  switch (mechanism) {
    case FusionMechanism::cross: return "cross";
    case FusionMechanism::self_attention: return "self";
    case FusionMechanism::concat: return "concat";
  }
  throw_error(ErrorKind::contract, "unknown fusion mechanism");
}

FusionMechanism fusion_from_string(const std::string& text) {
  if (text == "cross") return FusionMechanism::cross;
  if (text == "self") return FusionMechanism::self_attention;
  if (text == "concat") return FusionMechanism::concat;
  throw_error(ErrorKind::parse, "unknown fusion mechanism: " + text +
                                    " (expected cross, self, or concat)");
}

Fusion::Fusion(ParamStore& store, const std::string& prefix, std::size_t dim,
               FusionMechanism mechanism, std::size_t heads, Rng& rng)
    : mechanism_(mechanism), dim_(dim), heads_(heads) {
  if (mechanism_ == FusionMechanism::concat) {
    heads_ = 1;
    concat_ = Dense(store, prefix + "/concat", 2 * dim, dim, false, rng);
    return;
  }
  if (heads_ == 0 || dim % heads_ != 0) {
    throw_error(ErrorKind::contract, "fusion: dim " + std::to_string(dim) +
                                         " is not divisible by " + std::to_string(heads_) +
                                         " heads");
  }
  q_ = Dense(store, prefix + "/q", dim, dim, false, rng, false);
  k_ = Dense(store, prefix + "/k", dim, dim, false, rng, false);
  v_ = Dense(store, prefix + "/v", dim, dim, false, rng, false);
  o_ = Dense(store, prefix + "/o", dim, dim, false, rng, false);
  if (mechanism_ == FusionMechanism::cross) {
    ffn1_ = Dense(store, prefix + "/ffn1", dim, 2 * dim, true, rng);
    ffn2_ = Dense(store, prefix + "/ffn2", 2 * dim, dim, false, rng);
  }
}

std::vector<double> Fusion::forward(const std::vector<double>& a, const std::vector<double>& b,
                                    Cache* cache) const {
  check_dim(a.size(), dim_, "fusion forward (first input)");
  check_dim(b.size(), dim_, "fusion forward (second input)");
  Cache local;
  Cache& c = cache != nullptr ? *cache : local;
  c.a = a;
  c.b = b;
  switch (mechanism_) {
    case FusionMechanism::concat: {
      std::vector<double> z(a);
      z.insert(z.end(), b.begin(), b.end());
      return concat_.forward(z, &c.concat_cache);
    }
    case FusionMechanism::cross: {
      // A single key/value token: every head's attention weight is exactly 1,
      // so the attended vector is the value projection itself. The query and
      // key projections stay part of the architecture but receive no
      // gradient through the constant softmax.
      c.q = q_.forward(a, &c.qc);
      c.k = k_.forward(b, &c.kc);
      c.v = v_.forward(b, &c.vc);
      const auto attended = o_.forward(c.v, &c.oc);
      c.x1.resize(dim_);
      for (std::size_t d = 0; d < dim_; ++d) c.x1[d] = a[d] + attended[d];
      auto refined = ffn2_.forward(ffn1_.forward(c.x1, &c.f1c), &c.f2c);
      for (std::size_t d = 0; d < dim_; ++d) refined[d] += c.x1[d];
      return refined;
    }
    case FusionMechanism::self_attention: {
      const std::size_t head_dim = dim_ / heads_;
      const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
      c.q = q_.forward(a, &c.qc);
      c.k = k_.forward(a, &c.kc);
      c.v = v_.forward(a, &c.vc);
      c.q2 = q_.forward(b, &c.qc2);
      c.k2 = k_.forward(b, &c.kc2);
      c.v2 = v_.forward(b, &c.vc2);
      const std::vector<double>* q[2] = {&c.q, &c.q2};
      const std::vector<double>* k[2] = {&c.k, &c.k2};
      const std::vector<double>* v[2] = {&c.v, &c.v2};
      c.att.assign(heads_ * 4, 0.0);
      std::vector<double> attended[2] = {std::vector<double>(dim_, 0.0),
                                         std::vector<double>(dim_, 0.0)};
      for (std::size_t h = 0; h < heads_; ++h) {
        const std::size_t base = h * head_dim;
        for (int i = 0; i < 2; ++i) {
          double score[2];
          for (int j = 0; j < 2; ++j) {
            double dot = 0.0;
            for (std::size_t d = 0; d < head_dim; ++d) {
              dot += (*q[i])[base + d] * (*k[j])[base + d];
            }
            score[j] = dot * scale;
          }
          const double mx = std::max(score[0], score[1]);
          const double e0 = std::exp(score[0] - mx);
          const double e1 = std::exp(score[1] - mx);
          const double w0 = e0 / (e0 + e1);
          const double w1 = e1 / (e0 + e1);
          c.att[(static_cast<std::size_t>(i) * heads_ + h) * 2 + 0] = w0;
          c.att[(static_cast<std::size_t>(i) * heads_ + h) * 2 + 1] = w1;
          for (std::size_t d = 0; d < head_dim; ++d) {
            attended[i][base + d] = w0 * (*v[0])[base + d] + w1 * (*v[1])[base + d];
          }
        }
      }
      const auto y0 = o_.forward(attended[0], &c.oc);
      const auto y1 = o_.forward(attended[1], &c.oc2);
      std::vector<double> out(dim_);
      for (std::size_t d = 0; d < dim_; ++d) {
        out[d] = 0.5 * ((a[d] + y0[d]) + (b[d] + y1[d]));
      }
      return out;
    }
  }
  throw_error(ErrorKind::contract, "unknown fusion mechanism");
}

std::pair<std::vector<double>, std::vector<double>> Fusion::backward(
    const std::vector<double>& df, const Cache& c) const {
  check_dim(df.size(), dim_, "fusion backward");
  switch (mechanism_) {
    case FusionMechanism::concat: {
      const auto dz = concat_.backward(df, c.concat_cache);
      std::vector<double> da(dz.begin(), dz.begin() + static_cast<std::ptrdiff_t>(dim_));
      std::vector<double> db(dz.begin() + static_cast<std::ptrdiff_t>(dim_), dz.end());
      return {std::move(da), std::move(db)};
    }
    case FusionMechanism::cross: {
      std::vector<double> dx1 = df;
      const auto dffn_in = ffn1_.backward(ffn2_.backward(df, c.f2c), c.f1c);
      for (std::size_t d = 0; d < dim_; ++d) dx1[d] += dffn_in[d];
      std::vector<double> da = dx1;
      const auto dattended = o_.backward(dx1, c.oc);
      auto db = v_.backward(dattended, c.vc);
      return {std::move(da), std::move(db)};
    }
    case FusionMechanism::self_attention: {
      const std::size_t head_dim = dim_ / heads_;
      const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
      std::vector<double> dy(dim_);
      for (std::size_t d = 0; d < dim_; ++d) dy[d] = 0.5 * df[d];
      std::vector<double> da = dy;
      std::vector<double> db = dy;
      const auto datt0 = o_.backward(dy, c.oc);
      const auto datt1 = o_.backward(dy, c.oc2);
      const std::vector<double>* dattended[2] = {&datt0, &datt1};
      const std::vector<double>* q[2] = {&c.q, &c.q2};
      const std::vector<double>* k[2] = {&c.k, &c.k2};
      const std::vector<double>* v[2] = {&c.v, &c.v2};
      std::vector<double> dq[2] = {std::vector<double>(dim_, 0.0),
                                   std::vector<double>(dim_, 0.0)};
      std::vector<double> dk[2] = {std::vector<double>(dim_, 0.0),
                                   std::vector<double>(dim_, 0.0)};
      std::vector<double> dv[2] = {std::vector<double>(dim_, 0.0),
                                   std::vector<double>(dim_, 0.0)};
      for (std::size_t h = 0; h < heads_; ++h) {
        const std::size_t base = h * head_dim;
        for (int i = 0; i < 2; ++i) {
          const double w[2] = {c.att[(static_cast<std::size_t>(i) * heads_ + h) * 2 + 0],
                               c.att[(static_cast<std::size_t>(i) * heads_ + h) * 2 + 1]};
          double dw[2] = {0.0, 0.0};
          for (int j = 0; j < 2; ++j) {
            for (std::size_t d = 0; d < head_dim; ++d) {
              dw[j] += (*dattended[i])[base + d] * (*v[j])[base + d];
              dv[j][base + d] += w[j] * (*dattended[i])[base + d];
            }
          }
          const double inner = w[0] * dw[0] + w[1] * dw[1];
          for (int j = 0; j < 2; ++j) {
            const double ds = w[j] * (dw[j] - inner);
            for (std::size_t d = 0; d < head_dim; ++d) {
              dq[i][base + d] += ds * (*k[j])[base + d] * scale;
              dk[j][base + d] += ds * (*q[i])[base + d] * scale;
            }
          }
        }
      }
      const auto add_into = [](std::vector<double>& acc, const std::vector<double>& inc) {
        for (std::size_t d = 0; d < acc.size(); ++d) acc[d] += inc[d];
      };
      add_into(da, q_.backward(dq[0], c.qc));
      add_into(da, k_.backward(dk[0], c.kc));
      add_into(da, v_.backward(dv[0], c.vc));
      add_into(db, q_.backward(dq[1], c.qc2));
      add_into(db, k_.backward(dk[1], c.kc2));
      add_into(db, v_.backward(dv[1], c.vc2));
      return {std::move(da), std::move(db)};
    }
  }
  throw_error(ErrorKind::contract, "unknown fusion mechanism");
}

GateProject::GateProject(ParamStore& store, const std::string& prefix, std::size_t in,
                         std::size_t dim, std::size_t out, Rng& rng)
    : project_(store, prefix + "/project", in, dim, false, rng),
      gate_(store, prefix + "/gate", in, dim, false, rng),
      compress_(store, prefix + "/compress", dim, out, false, rng),
      in_(in),
      dim_(dim),
      out_(out) {
  ln_gamma_ = &store.add(prefix + "/ln/gamma", {dim}, 0.0, rng);
  std::fill(ln_gamma_->value.begin(), ln_gamma_->value.end(), 1.0);
  ln_beta_ = &store.add(prefix + "/ln/beta", {dim}, 0.0, rng);
}

std::vector<double> GateProject::forward(const std::vector<double>& x, Cache* cache) const {
  check_dim(x.size(), in_, "gate projection forward");
  Cache local;
  Cache& c = cache != nullptr ? *cache : local;
  c.p = project_.forward(x, &c.pc);
  const auto g = gate_.forward(x, &c.gc);
  c.s.resize(dim_);
  c.f.resize(dim_);
  for (std::size_t d = 0; d < dim_; ++d) {
    c.s[d] = 1.0 / (1.0 + std::exp(-g[d]));
    c.f[d] = c.p[d] * c.s[d];
  }
  double mean = 0.0;
  for (double f : c.f) mean += f;
  mean /= static_cast<double>(dim_);
  double var = 0.0;
  for (double f : c.f) var += (f - mean) * (f - mean);
  var /= static_cast<double>(dim_);
  c.inv_std = 1.0 / std::sqrt(var + kLnEps);
  c.xhat.resize(dim_);
  std::vector<double> normed(dim_);
  for (std::size_t d = 0; d < dim_; ++d) {
    c.xhat[d] = (c.f[d] - mean) * c.inv_std;
    normed[d] = ln_gamma_->value[d] * c.xhat[d] + ln_beta_->value[d];
  }
  return compress_.forward(normed, &c.cc);
}

std::vector<double> GateProject::backward(const std::vector<double>& dy, const Cache& c) const {
  check_dim(dy.size(), out_, "gate projection backward");
  const auto dnormed = compress_.backward(dy, c.cc);
  std::vector<double> dxhat(dim_);
  for (std::size_t d = 0; d < dim_; ++d) {
    ln_gamma_->grad[d] += dnormed[d] * c.xhat[d];
    ln_beta_->grad[d] += dnormed[d];
    dxhat[d] = dnormed[d] * ln_gamma_->value[d];
  }
  double mean_dxhat = 0.0;
  double mean_dxhat_xhat = 0.0;
  for (std::size_t d = 0; d < dim_; ++d) {
    mean_dxhat += dxhat[d];
    mean_dxhat_xhat += dxhat[d] * c.xhat[d];
  }
  mean_dxhat /= static_cast<double>(dim_);
  mean_dxhat_xhat /= static_cast<double>(dim_);
  std::vector<double> dp(dim_);
  std::vector<double> dg(dim_);
  for (std::size_t d = 0; d < dim_; ++d) {
    const double df = c.inv_std * (dxhat[d] - mean_dxhat - c.xhat[d] * mean_dxhat_xhat);
    dp[d] = df * c.s[d];
    dg[d] = df * c.p[d] * c.s[d] * (1.0 - c.s[d]);
  }
  auto dx = project_.backward(dp, c.pc);
  const auto dx_gate = gate_.backward(dg, c.gc);
  for (std::size_t d = 0; d < in_; ++d) dx[d] += dx_gate[d];
  return dx;
}

PolicyEval masked_policy(const std::vector<double>& logits, const std::vector<char>& mask) {
  check_dim(mask.size(), logits.size(), "masked policy");
  PolicyEval out;
  out.mask = mask;
  out.probs.assign(logits.size(), 0.0);
  out.logp.assign(logits.size(), -std::numeric_limits<double>::infinity());
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (mask[i] != 0) mx = std::max(mx, logits[i]);
  }
  if (!std::isfinite(mx)) {
    throw_error(ErrorKind::contract, "masked policy: every action is masked");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (mask[i] != 0) sum += std::exp(logits[i] - mx);
  }
  const double log_sum = std::log(sum);
  out.entropy = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (mask[i] == 0) continue;
    out.logp[i] = logits[i] - mx - log_sum;
    out.probs[i] = std::exp(out.logp[i]);
    if (out.probs[i] > 0.0) out.entropy -= out.probs[i] * out.logp[i];
  }
  return out;
}

double log_prob(const PolicyEval& policy, int action) {
  const auto idx = static_cast<std::size_t>(action);
  if (action < 0 || idx >= policy.probs.size() || policy.mask[idx] == 0) {
    throw_error(ErrorKind::contract, "log_prob: action is masked or out of range");
  }
  return policy.logp[idx];
}

int sample_action(const PolicyEval& policy, Rng& rng) {
  const double r = rng.uniform01();
  double acc = 0.0;
  int last_valid = -1;
  for (std::size_t i = 0; i < policy.probs.size(); ++i) {
    if (policy.mask[i] == 0) continue;
    last_valid = static_cast<int>(i);
    acc += policy.probs[i];
    if (r < acc) return static_cast<int>(i);
  }
  return last_valid;
}

int argmax_action(const PolicyEval& policy) {
  int best = -1;
  double best_p = -1.0;
  for (std::size_t i = 0; i < policy.probs.size(); ++i) {
    if (policy.mask[i] == 0) continue;
    if (policy.probs[i] > best_p) {
      best_p = policy.probs[i];
      best = static_cast<int>(i);
    }
  }
  if (best < 0) {
    throw_error(ErrorKind::contract, "argmax_action: every action is masked");
  }
  return best;
}

std::vector<double> policy_logit_grad(const PolicyEval& policy, int action, double logp_coeff,
                                      double entropy_coeff) {
  std::vector<double> dz(policy.probs.size(), 0.0);
  for (std::size_t i = 0; i < policy.probs.size(); ++i) {
    if (policy.mask[i] == 0) continue;
    const double p = policy.probs[i];
    double g = logp_coeff * ((static_cast<int>(i) == action ? 1.0 : 0.0) - p);
    if (p > 0.0) {
      g += entropy_coeff * (-p * (policy.logp[i] + policy.entropy));
    }
    dz[i] = g;
  }
  return dz;
}

void adam_step(ParamStore& store, const AdamConfig& config) {
  for (auto& tensor : store.tensors()) {
    for (double g : tensor.grad) {
      if (!std::isfinite(g)) {
        throw_error(ErrorKind::contract, "non-finite gradient in parameter " + tensor.name);
      }
    }
    tensor.step += 1;
    const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(tensor.step));
    const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(tensor.step));
    for (std::size_t i = 0; i < tensor.size(); ++i) {
      const double g = tensor.grad[i];
      tensor.m[i] = config.beta1 * tensor.m[i] + (1.0 - config.beta1) * g;
      tensor.v[i] = config.beta2 * tensor.v[i] + (1.0 - config.beta2) * g * g;
      const double mhat = tensor.m[i] / bc1;
      const double vhat = tensor.v[i] / bc2;
      tensor.value[i] -= config.lr * mhat / (std::sqrt(vhat) + config.eps);
      if (!std::isfinite(tensor.value[i])) {
        throw_error(ErrorKind::contract,
                    "non-finite value after update in parameter " + tensor.name);
      }
    }
  }
}

namespace {

double relative_error(double a, double b) {
  const double diff = std::abs(a - b);
  if (diff == 0.0) return 0.0;
  return diff / std::max({std::abs(a), std::abs(b), 1e-5});
}

}  // namespace

double grad_check(ParamStore& store, const std::function<double()>& loss,
                  const std::function<void()>& backprop, double eps) {
  backprop();
  std::vector<std::vector<double>> analytic;
  analytic.reserve(store.count());
  for (const auto& tensor : store.tensors()) analytic.push_back(tensor.grad);
  double worst = 0.0;
  std::size_t t = 0;
  for (auto& tensor : store.tensors()) {
    for (std::size_t i = 0; i < tensor.size(); ++i) {
      const double original = tensor.value[i];
      tensor.value[i] = original + eps;
      const double up = loss();
      tensor.value[i] = original - eps;
      const double down = loss();
      tensor.value[i] = original;
      const double numeric = (up - down) / (2.0 * eps);
      worst = std::max(worst, relative_error(analytic[t][i], numeric));
    }
    ++t;
  }
  return worst;
}

double grad_check_values(std::vector<double>& values, const std::vector<double>& analytic,
                         const std::function<double()>& loss, double eps) {
  double worst = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double original = values[i];
    values[i] = original + eps;
    const double up = loss();
    values[i] = original - eps;
    const double down = loss();
    values[i] = original;
    const double numeric = (up - down) / (2.0 * eps);
    worst = std::max(worst, relative_error(analytic[i], numeric));
  }
  return worst;
}

namespace {

void append_u64(std::string& out, std::uint64_t x) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
}

void append_f64(std::string& out, double x) {
  append_u64(out, std::bit_cast<std::uint64_t>(x));
}

class ByteReader {
 public:
  ByteReader(const std::string& data, const std::string& path) : data_(data), path_(path) {}

  std::uint64_t read_u64() {
    require(8);
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i) {
      x |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[at_ + i])) << (8 * i);
    }
    at_ += 8;
    return x;
  }

  double read_f64() { return std::bit_cast<double>(read_u64()); }

  std::string read_bytes(std::uint64_t n) {
    require(n);
    std::string out = data_.substr(at_, n);
    at_ += n;
    return out;
  }

  bool exhausted() const { return at_ == data_.size(); }

 private:
  void require(std::uint64_t n) {
    if (n > data_.size() - at_) {
      throw_error(ErrorKind::schema, "checkpoint file is truncated: " + path_);
    }
  }

  const std::string& data_;
  std::string path_;
  std::size_t at_ = 0;
};

constexpr char kMagic[8] = {'P', 'K', 'C', 'K', 'P', 'T', '0', '1'};

}  // namespace

void write_checkpoint(const std::string& path, const std::string& config_json,
                      const ParamStore& store) {
  std::string out(kMagic, sizeof(kMagic));
  append_u64(out, config_json.size());
  out += config_json;
  append_u64(out, store.count());
  for (const auto& tensor : store.tensors()) {
    append_u64(out, tensor.name.size());
    out += tensor.name;
    append_u64(out, tensor.shape.size());
    for (std::size_t d : tensor.shape) append_u64(out, d);
    for (double x : tensor.value) append_f64(out, x);
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) {
    throw_error(ErrorKind::io, "cannot write checkpoint file: " + path);
  }
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) {
    throw_error(ErrorKind::io, "failed writing checkpoint file: " + path);
  }
}

CheckpointData read_checkpoint(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    throw_error(ErrorKind::io, "cannot read checkpoint file: " + path);
  }
  std::string data((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  ByteReader reader(data, path);
  if (reader.read_bytes(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) {
    throw_error(ErrorKind::schema, "not a checkpoint file (bad magic): " + path);
  }
  CheckpointData out;
  out.config_json = reader.read_bytes(reader.read_u64());
  const std::uint64_t count = reader.read_u64();
  out.arrays.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    CheckpointArray array;
    array.name = reader.read_bytes(reader.read_u64());
    const std::uint64_t ndim = reader.read_u64();
    if (ndim > 4) {
      throw_error(ErrorKind::schema, "checkpoint array " + array.name +
                                         " has an implausible rank: " + path);
    }
    std::size_t n = 1;
    for (std::uint64_t d = 0; d < ndim; ++d) {
      const std::uint64_t dim = reader.read_u64();
      if (dim > (1u << 24)) {
        throw_error(ErrorKind::schema, "checkpoint array " + array.name +
                                           " has an implausible dimension: " + path);
      }
      array.shape.push_back(dim);
      n *= array.shape.back();
      if (n > (1u << 28)) {
        throw_error(ErrorKind::schema, "checkpoint array " + array.name +
                                           " has an implausible element count: " + path);
      }
    }
    array.value.resize(n);
    for (auto& x : array.value) x = reader.read_f64();
    out.arrays.push_back(std::move(array));
  }
  if (!reader.exhausted()) {
    throw_error(ErrorKind::schema, "checkpoint file has trailing bytes: " + path);
  }
  return out;
}

void apply_checkpoint(const CheckpointData& data, ParamStore& store) {
  if (data.arrays.size() != store.count()) {
    throw_error(ErrorKind::schema, "checkpoint carries " + std::to_string(data.arrays.size()) +
                                       " arrays, model expects " +
                                       std::to_string(store.count()));
  }
  for (const auto& array : data.arrays) {
    if (!store.contains(array.name)) {
      throw_error(ErrorKind::schema, "checkpoint has unknown parameter: " + array.name);
    }
    auto& tensor = store.at(array.name);
    if (tensor.shape != array.shape) {
      throw_error(ErrorKind::schema, "checkpoint shape mismatch for parameter: " + array.name);
    }
    tensor.value = array.value;
  }
}

}  // namespace placekit::learnkit
