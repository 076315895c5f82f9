#include "placekit/providers.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <utility>

#include "httplib.h"
#include "json.hpp"
#include "placekit/error.hpp"
#include "placekit/prompt_resource.hpp"
#include "placekit/rng.hpp"

namespace placekit {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string lowercased(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string trimmed(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string bracketed_list(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ", ";
    out += items[i];
  }
  out += "]";
  return out;
}

// Expands a 64-bit key into `dim` pseudo-random values in [-1, 1]. Only
// integer mixing plus exact float arithmetic, so results are byte-identical
// across platforms.
std::vector<double> hash_expand(std::uint64_t key, int dim) {
  Rng rng(key);
  std::vector<double> v(static_cast<std::size_t>(dim));
  for (auto& x : v) x = rng.uniform01() * 2.0 - 1.0;
  return v;
}

class MockEmbedding final : public EmbeddingProvider {
 public:
  explicit MockEmbedding(const ProviderOptions& opts) : seed_(opts.seed) {}

  std::vector<double> embed(const std::string& text) const override {
    auto v = hash_expand(fnv1a64(lowercased(text)) ^ seed_ ^ 0x9e3779b97f4a7c15ull,
                         kEmbedDim);
    double norm2 = 0.0;
    for (double x : v) norm2 += x * x;
    if (norm2 < 1e-24) {
      v[0] = 1.0;
      return v;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& x : v) x *= inv;
    return v;
  }

 private:
  std::uint64_t seed_;
};

class MockScorer final : public SemanticScorer {
 public:
  explicit MockScorer(const ProviderOptions& opts)
      : seed_(opts.seed), reference_(opts.score_reference_energy) {}

  SemanticJudgement score(const std::string& summary) const override {
    const json parsed = json::parse(summary, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("energy") ||
        !parsed["energy"].contains("total") || !parsed["energy"]["total"].is_number()) {
      throw_error(ErrorKind::contract,
                  "semantic scorer requires a layout summary carrying energy.total");
    }
    const double total = parsed["energy"]["total"].get<double>();
    SemanticJudgement out;
    out.score = std::clamp(1.0 - total / reference_, 0.0, 1.0);
    out.features =
        hash_expand(fnv1a64(summary) ^ seed_ ^ 0xc2b2ae3d27d4eb4full, kSemanticDim);
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "total energy %.6g maps to realism %.6g on a 0..%.6g scale", total,
                  out.score, reference_);
    out.explanation = buf;
    return out;
  }

 private:
  std::uint64_t seed_;
  double reference_;
};

// Pulls the bracketed list that follows the last occurrence of `label`.
std::vector<std::string> last_bracketed_list(const std::string& prompt,
                                             const std::string& label) {
  std::vector<std::string> items;
  const std::size_t at = prompt.rfind(label);
  if (at == std::string::npos) return items;
  const std::size_t open = prompt.find('[', at);
  if (open == std::string::npos) return items;
  const std::size_t close = prompt.find(']', open);
  if (close == std::string::npos) return items;
  std::string body = prompt.substr(open + 1, close - open - 1);
  std::size_t start = 0;
  while (start <= body.size()) {
    std::size_t comma = body.find(',', start);
    if (comma == std::string::npos) comma = body.size();
    std::string item = trimmed(body.substr(start, comma - start));
    if (!item.empty()) items.push_back(item);
    start = comma + 1;
  }
  return items;
}

class MockLlm final : public LLMClient {
 public:
  explicit MockLlm(const ProviderOptions&) {}

  std::string complete(const std::string& prompt) const override {
    const auto rooms = last_bracketed_list(prompt, "Possible rooms:");
    const auto objects = last_bracketed_list(prompt, "Objects:");
    if (rooms.empty()) return "unknown";
    static constexpr std::pair<const char*, const char*> kKeywordRooms[] = {
        {"bed", "bedroom"},
        {"toilet", "bathroom"},
        {"sofa", "living room"},
        {"stove", "kitchen"},
    };
    for (const auto& [keyword, room] : kKeywordRooms) {
      bool hit = false;
      for (const auto& obj : objects) {
        if (lowercased(obj).find(keyword) != std::string::npos) {
          hit = true;
          break;
        }
      }
      if (!hit) continue;
      for (const auto& offered : rooms) {
        if (lowercased(offered) == room) return offered;
      }
    }
    return rooms.front();
  }
};

struct ParsedUrl {
  std::string host;
  int port = 80;
  std::string path = "/";
};

ParsedUrl parse_http_url(const std::string& url) {
  const std::string scheme = "http://";
  if (url.rfind(scheme, 0) != 0) {
    throw_error(ErrorKind::parse, "provider endpoint must start with http://: " + url);
  }
  std::string rest = url.substr(scheme.size());
  ParsedUrl out;
  const std::size_t slash = rest.find('/');
  std::string hostport = slash == std::string::npos ? rest : rest.substr(0, slash);
  if (slash != std::string::npos) out.path = rest.substr(slash);
  const std::size_t colon = hostport.rfind(':');
  if (colon == std::string::npos) {
    out.host = hostport;
  } else {
    out.host = hostport.substr(0, colon);
    const std::string digits = hostport.substr(colon + 1);
    if (digits.empty() ||
        digits.find_first_not_of("0123456789") != std::string::npos) {
      throw_error(ErrorKind::parse, "provider endpoint has a malformed port: " + url);
    }
    out.port = std::stoi(digits);
  }
  if (out.host.empty()) {
    throw_error(ErrorKind::parse, "provider endpoint has an empty host: " + url);
  }
  return out;
}

// Minimal counting semaphore; bounds in-flight requests per remote client.
class Slots {
 public:
  explicit Slots(int n) : free_(n) {}

  void acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return free_ > 0; });
    --free_;
  }

  void release() {
    {
      std::lock_guard lock(mu_);
      ++free_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int free_;
};

class SlotGuard {
 public:
  explicit SlotGuard(Slots& s) : slots_(s) { slots_.acquire(); }
  ~SlotGuard() { slots_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  Slots& slots_;
};

class RemoteCaller {
 public:
  RemoteCaller(std::string url, const ProviderOptions& opts)
      : url_(std::move(url)),
        parsed_(parse_http_url(url_)),
        timeout_(opts.timeout_seconds),
        slots_(std::max(1, opts.max_in_flight)) {}

  json call(const std::string& kind, const json& payload) const {
    SlotGuard guard(slots_);
    json request{{"kind", kind}, {"payload", payload}};
    const std::string body = request.dump();
    httplib::Error last_error = httplib::Error::Success;
    int last_status = 0;
    for (int attempt = 0; attempt < 2; ++attempt) {
      if (attempt > 0) {
        Rng jitter(fnv1a64(body) ^ 0xb0ffull);
        std::this_thread::sleep_for(
            std::chrono::milliseconds(50 + jitter.uniform_int(100)));
      }
      httplib::Client client(parsed_.host, parsed_.port);
      const auto timeout = std::chrono::duration<double>(timeout_);
      client.set_connection_timeout(timeout);
      client.set_read_timeout(timeout);
      client.set_write_timeout(timeout);
      auto res = client.Post(parsed_.path, body, "application/json");
      if (res && res->status == 200) {
        json parsed = json::parse(res->body, nullptr, false);
        if (parsed.is_discarded()) {
          throw_error(ErrorKind::schema,
                      "provider response from " + url_ + " is not valid JSON");
        }
        return parsed;
      }
      last_error = res ? httplib::Error::Success : res.error();
      last_status = res ? res->status : 0;
    }
    if (last_error == httplib::Error::ConnectionTimeout ||
        last_error == httplib::Error::Read || last_error == httplib::Error::Write) {
      throw_error(ErrorKind::timeout, "provider request to " + url_ + " timed out after " +
                                          std::to_string(timeout_) + " s (retried once)");
    }
    if (last_error != httplib::Error::Success) {
      throw_error(ErrorKind::network, "provider request to " + url_ +
                                          " failed: " + httplib::to_string(last_error) +
                                          " (retried once)");
    }
    throw_error(ErrorKind::network, "provider request to " + url_ +
                                        " failed: HTTP status " +
                                        std::to_string(last_status) + " (retried once)");
  }

  const std::string& url() const { return url_; }

 private:
  std::string url_;
  ParsedUrl parsed_;
  double timeout_;
  mutable Slots slots_;
};

double require_finite_number(const json& value, const std::string& field,
                             const std::string& url) {
  if (!value.is_number()) {
    throw_error(ErrorKind::schema, "provider response from " + url + " has a non-numeric " +
                                       field + " entry");
  }
  const double x = value.get<double>();
  if (!std::isfinite(x)) {
    throw_error(ErrorKind::schema,
                "provider response from " + url + " has a non-finite " + field + " entry");
  }
  return x;
}

std::vector<double> require_vector(const json& response, const std::string& url, int dim) {
  if (!response.contains("vector") || !response["vector"].is_array()) {
    throw_error(ErrorKind::schema,
                "provider response from " + url + " is missing field: vector");
  }
  const auto& arr = response["vector"];
  if (static_cast<int>(arr.size()) != dim) {
    throw_error(ErrorKind::schema, "provider response from " + url + " carries a vector of " +
                                       std::to_string(arr.size()) + " entries, expected " +
                                       std::to_string(dim));
  }
  std::vector<double> out;
  out.reserve(arr.size());
  for (const auto& v : arr) out.push_back(require_finite_number(v, "vector", url));
  return out;
}

class RemoteEmbedding final : public EmbeddingProvider {
 public:
  RemoteEmbedding(const std::string& url, const ProviderOptions& opts)
      : caller_(url, opts) {}

  std::vector<double> embed(const std::string& text) const override {
    const json response = caller_.call("embed", text);
    auto v = require_vector(response, caller_.url(), kEmbedDim);
    double norm2 = 0.0;
    for (double x : v) norm2 += x * x;
    if (norm2 < 1e-24) {
      throw_error(ErrorKind::schema,
                  "provider response from " + caller_.url() + " carries a zero vector");
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& x : v) x *= inv;
    return v;
  }

 private:
  RemoteCaller caller_;
};

class RemoteScorer final : public SemanticScorer {
 public:
  RemoteScorer(const std::string& url, const ProviderOptions& opts) : caller_(url, opts) {}

  SemanticJudgement score(const std::string& summary) const override {
    const json response = caller_.call("score", summary);
    SemanticJudgement out;
    out.features = require_vector(response, caller_.url(), kSemanticDim);
    if (!response.contains("score")) {
      throw_error(ErrorKind::schema,
                  "provider response from " + caller_.url() + " is missing field: score");
    }
    out.score = require_finite_number(response["score"], "score", caller_.url());
    if (out.score < 0.0 || out.score > 1.0) {
      throw_error(ErrorKind::schema, "provider response from " + caller_.url() +
                                         " has score outside [0, 1]");
    }
    if (response.contains("explanation")) {
      if (!response["explanation"].is_string()) {
        throw_error(ErrorKind::schema, "provider response from " + caller_.url() +
                                           " has a non-string explanation");
      }
      out.explanation = response["explanation"].get<std::string>();
    }
    return out;
  }

 private:
  RemoteCaller caller_;
};

class RemoteLlm final : public LLMClient {
 public:
  RemoteLlm(const std::string& url, const ProviderOptions& opts) : caller_(url, opts) {}

  std::string complete(const std::string& prompt) const override {
    const json response = caller_.call("complete", prompt);
    if (!response.contains("text") || !response["text"].is_string()) {
      throw_error(ErrorKind::schema,
                  "provider response from " + caller_.url() + " is missing field: text");
    }
    return response["text"].get<std::string>();
  }

 private:
  RemoteCaller caller_;
};

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v == nullptr ? std::string() : std::string(v);
}

void replace_all(std::string& text, const std::string& needle, const std::string& value) {
  std::size_t at = 0;
  while ((at = text.find(needle, at)) != std::string::npos) {
    text.replace(at, needle.size(), value);
    at += value.size();
  }
}

}  // namespace

std::shared_ptr<EmbeddingProvider> make_mock_embedding_provider(const ProviderOptions& opts) {
  return std::make_shared<MockEmbedding>(opts);
}

std::shared_ptr<SemanticScorer> make_mock_semantic_scorer(const ProviderOptions& opts) {
  return std::make_shared<MockScorer>(opts);
}

std::shared_ptr<LLMClient> make_mock_llm_client(const ProviderOptions& opts) {
  return std::make_shared<MockLlm>(opts);
}

std::shared_ptr<EmbeddingProvider> make_remote_embedding_provider(
    const std::string& url, const ProviderOptions& opts) {
  return std::make_shared<RemoteEmbedding>(url, opts);
}

std::shared_ptr<SemanticScorer> make_remote_semantic_scorer(const std::string& url,
                                                            const ProviderOptions& opts) {
  return std::make_shared<RemoteScorer>(url, opts);
}

std::shared_ptr<LLMClient> make_remote_llm_client(const std::string& url,
                                                  const ProviderOptions& opts) {
  return std::make_shared<RemoteLlm>(url, opts);
}

ProviderSet providers_from_env(const ProviderOptions& opts) {
  ProviderSet set;
  const std::string embed_url = env_or_empty("LAYOUT_EMBED_URL");
  const std::string scorer_url = env_or_empty("LAYOUT_SCORER_URL");
  const std::string llm_url = env_or_empty("LAYOUT_LLM_URL");
  set.embedder = embed_url.empty() ? make_mock_embedding_provider(opts)
                                   : make_remote_embedding_provider(embed_url, opts);
  set.scorer = scorer_url.empty() ? make_mock_semantic_scorer(opts)
                                  : make_remote_semantic_scorer(scorer_url, opts);
  set.llm = llm_url.empty() ? make_mock_llm_client(opts)
                            : make_remote_llm_client(llm_url, opts);
  return set;
}

std::string layout_summary(const SceneSpec& scene, const Layout& layout,
                           const EnergyBreakdown& energy) {
  ordered_json doc;
  doc["room"] = {{"width", scene.room.width}, {"depth", scene.room.depth}};
  ordered_json objects = ordered_json::array();
  for (const auto& p : layout.placements) {
    ordered_json entry;
    entry["id"] = p.object_id;
    if (const ObjectSpec* spec = scene.find_object(p.object_id); spec != nullptr) {
      entry["width"] = spec->dims[0];
      entry["depth"] = spec->dims[1];
    }
    entry["x"] = p.x;
    entry["y"] = p.y;
    entry["theta"] = p.theta;
    objects.push_back(std::move(entry));
  }
  doc["objects"] = std::move(objects);
  doc["skipped"] = layout.skipped;
  doc["energy"] = {{"relational", energy.relational},
                   {"collision", energy.collision},
                   {"out_of_bounds", energy.out_of_bounds},
                   {"navigation", energy.navigation},
                   {"affordance", energy.affordance},
                   {"total", energy.total}};
  return doc.dump();
}

std::string render_room_prompt(const std::vector<std::string>& objects,
                               const std::vector<std::string>& room_types) {
  std::string prompt = detail::kRoomClassifierPromptRaw;
  while (!prompt.empty() && (prompt.back() == '\n' || prompt.back() == '\r')) {
    prompt.pop_back();
  }
  replace_all(prompt, "{room_types}", bracketed_list(room_types));
  replace_all(prompt, "{objects}", bracketed_list(objects));
  return prompt;
}

std::string classify_room_type(const std::vector<std::string>& objects,
                               const std::vector<std::string>& room_types,
                               const LLMClient& client) {
  if (objects.empty() || room_types.empty()) {
    throw_error(ErrorKind::contract,
                "classify_room_type requires non-empty object and room-type lists");
  }
  const std::string prompt = render_room_prompt(objects, room_types);
  try {
    return trimmed(client.complete(prompt));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::timeout) {
      throw_error(ErrorKind::timeout, std::string(e.what()) + "; prompt was: " + prompt);
    }
    throw;
  }
}

}  // namespace placekit
