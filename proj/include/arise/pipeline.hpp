#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "arise/config.hpp"
#include "arise/dataset.hpp"
#include "arise/bundle.hpp"
#include "arise/fusion.hpp"
#include "arise/semantics.hpp"

namespace arise {

/// Loads the dataset named by the config and checks the clustering
/// preconditions.
Dataset load_run_dataset(const RunConfig& cfg);

/// Builds the description source selected by `cfg.llm`. With LlmMode::none
/// the source refuses every query, so only cached values resolve.
std::unique_ptr<DescriptionSource> make_description_source(const RunConfig& cfg);

struct SemanticEncoding {
  std::optional<EnrichReport> enrichment; // stub encoder only
  EncodeReport encoded;
  std::vector<std::string> warnings;
};

/// Value embeddings per `cfg.encoder`: pooled bundle entries, or stub token
/// states over descriptions resolved through the cache and `cfg.llm`.
SemanticEncoding encode_semantics(const Dataset& ds, const Vocabulary& vocab, const RunConfig& cfg);

/// Normalized anchor and semantic views; everything before the alpha search.
struct Representations {
  Vocabulary vocab;
  Matrix anchor_hat;   // N x |V|
  Matrix semantic_hat; // N x (M * d); N x 0 when the semantic view is skipped
  std::size_t block_dim = 0;
  bool semantic_skipped = false;
  std::optional<EnrichReport> enrichment;
  std::vector<std::string> warnings;
  double offline_seconds = 0.0;  // enrichment and token pooling
  double assembly_seconds = 0.0; // anchor, semantic matrix and z-scoring
};

/// Enrichment, encoding, anchor construction and normalization. The
/// semantic view is skipped when no alpha in the grid gives it weight.
Representations prepare_representations(const Dataset& ds, const RunConfig& cfg);

struct ClusterResult {
  AlphaSearchTrace trace;
  KMeansResult final;
  std::uint64_t search_seed = 0;
  std::uint64_t final_seed = 0;
  FinalMode final_mode = FinalMode::rerun;
  std::size_t k = 0;
  std::vector<std::string> warnings;
  double online_seconds = 0.0;

  double alpha_star() const { return trace.alpha_star(); }
};

/// Alpha search on the prepared views, then the final k-Means on Z at the
/// selected alpha (re-run with derive_seed(seed, kFinalStream), or the
/// search labels when the config asks for reuse).
ClusterResult cluster_representations(const Representations& reps, std::size_t k,
                                      const RunConfig& cfg, std::uint64_t seed);

/// Full pipeline for one seed.
ClusterResult run_arise(const Dataset& ds, const RunConfig& cfg);

/// result.json contents. Byte-stable for identical inputs: no timings, no
/// timestamps.
nlohmann::json result_to_json(const ClusterResult& result, const RunConfig& cfg);

} // namespace arise
