#pragma once
// Pluggable text-intelligence providers: a text embedder, a layout scorer,
// and a completion client. Each has a deterministic in-process mock plus an
// HTTP-backed variant selected through the LAYOUT_*_URL environment
// variables; both sides of a pair satisfy the same interface contract.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "placekit/energy.hpp"
#include "placekit/scene.hpp"

namespace placekit {

inline constexpr int kEmbedDim = 512;
inline constexpr int kSemanticDim = 2048;

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  // Deterministic per text (case-insensitive); unit L2 norm within 1e-9.
  virtual std::vector<double> embed(const std::string& text) const = 0;
};

struct SemanticJudgement {
  std::vector<double> features;  // kSemanticDim entries, all finite
  double score = 0.0;            // in [0, 1]
  std::string explanation;
};

class SemanticScorer {
 public:
  virtual ~SemanticScorer() = default;
  virtual SemanticJudgement score(const std::string& layout_summary) const = 0;
};

class LLMClient {
 public:
  virtual ~LLMClient() = default;
  virtual std::string complete(const std::string& prompt) const = 0;
};

struct ProviderOptions {
  std::uint64_t seed = 0;
  // Mock scorer maps a total energy E to clamp(1 - E / reference, 0, 1).
  double score_reference_energy = 10.0;
  double timeout_seconds = 30.0;
  int max_in_flight = 4;  // remote clients bound concurrent requests
};

std::shared_ptr<EmbeddingProvider> make_mock_embedding_provider(
    const ProviderOptions& opts = {});
std::shared_ptr<SemanticScorer> make_mock_semantic_scorer(
    const ProviderOptions& opts = {});
std::shared_ptr<LLMClient> make_mock_llm_client(const ProviderOptions& opts = {});

// `url` must be of the form http://host[:port][/path].
std::shared_ptr<EmbeddingProvider> make_remote_embedding_provider(
    const std::string& url, const ProviderOptions& opts = {});
std::shared_ptr<SemanticScorer> make_remote_semantic_scorer(
    const std::string& url, const ProviderOptions& opts = {});
std::shared_ptr<LLMClient> make_remote_llm_client(const std::string& url,
                                                  const ProviderOptions& opts = {});

struct ProviderSet {
  std::shared_ptr<EmbeddingProvider> embedder;
  std::shared_ptr<SemanticScorer> scorer;
  std::shared_ptr<LLMClient> llm;
};

// Reads LAYOUT_EMBED_URL, LAYOUT_SCORER_URL, and LAYOUT_LLM_URL; every unset
// (or empty) variable selects the corresponding mock.
ProviderSet providers_from_env(const ProviderOptions& opts = {});

// Compact JSON summary of a layout — room size, per-object poses, skipped
// ids, and the energy breakdown — which is what the semantic scorer consumes.
std::string layout_summary(const SceneSpec& scene, const Layout& layout,
                           const EnergyBreakdown& energy);

// Renders the room-classifier prompt template with {room_types} and
// {objects} substituted as bracketed comma-separated lists.
std::string render_room_prompt(const std::vector<std::string>& objects,
                               const std::vector<std::string>& room_types);

// Asks `client` for the most likely room type given the object names. Both
// lists must be non-empty. A timeout raised by a remote client is re-thrown
// with the rendered prompt appended for diagnosis.
std::string classify_room_type(const std::vector<std::string>& objects,
                               const std::vector<std::string>& room_types,
                               const LLMClient& client);

}  // namespace placekit
