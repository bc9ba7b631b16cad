#include "arise/pipeline.hpp"

#include <chrono>
#include <cstdlib>
#include <set>

#include "arise/bundle.hpp"
#include "arise/error.hpp"
#include "arise/random.hpp"

namespace arise {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Resolves values from the cache only; every query is a failure.
class CacheOnlySource final : public DescriptionSource {
public:
  explicit CacheOnlySource(std::string model) : model_(std::move(model)) {}
  std::string describe(const std::string&, std::string_view value, std::string_view attribute,
                       std::span<const std::string>) override {
    throw TransportError(Stage::semantics, "no cached description for " + std::string(attribute) +
                                               "=" + std::string(value) +
                                               " and --llm none forbids querying; run "
                                               "'arise describe' first");
  }
  std::string model() const override { return model_; }

private:
  std::string model_;
};

std::string cache_model(const DescriptionCache& cache, const std::string& fallback) {
  std::set<std::string> models;
  for (const auto& r : cache.records()) models.insert(r.model);
  return models.size() == 1 ? *models.begin() : fallback;
}

} // namespace

Dataset load_run_dataset(const RunConfig& cfg) {
  Dataset ds = load_dataset(cfg.dataset, cfg.load_options());
  ds.validate_for_clustering();
  return ds;
}

std::unique_ptr<DescriptionSource> make_description_source(const RunConfig& cfg) {
  switch (cfg.llm) {
  case LlmMode::stub: return std::make_unique<StubLlm>();
  case LlmMode::http: {
    LlmEndpointConfig endpoint = cfg.endpoint;
    if (endpoint.api_key.empty() && !cfg.api_key_env.empty()) {
      if (const char* key = std::getenv(cfg.api_key_env.c_str())) endpoint.api_key = key;
    }
    return std::make_unique<HttpLlm>(std::move(endpoint));
  }
  case LlmMode::none: break;
  }
  return std::make_unique<CacheOnlySource>(cfg.endpoint.model);
}

SemanticEncoding encode_semantics(const Dataset& ds, const Vocabulary& vocab, const RunConfig& cfg) {
  SemanticEncoding out;
  if (cfg.encoder == EncoderMode::none) {
    throw ConfigError(Stage::encoding, "no semantic encoder configured");
  }
  if (cfg.encoder == EncoderMode::bundle) {
    const Bundle bundle(cfg.bundle);
    out.encoded = encode_vocabulary(ds, vocab, bundle, cfg.pooling, cfg.best_effort);
  } else {
    DescriptionCache cache = cfg.cache.empty() ? DescriptionCache() : DescriptionCache(cfg.cache);
    std::unique_ptr<DescriptionSource> source;
    if (cfg.llm == LlmMode::none) {
      source = std::make_unique<CacheOnlySource>(cache_model(cache, cfg.endpoint.model));
    } else {
      source = make_description_source(cfg);
    }
    const PromptSpec spec = load_prompt_spec(cfg.prompt_template, cfg.max_words);
    EnrichOptions eopts;
    eopts.parallelism = cfg.parallelism;
    eopts.best_effort = cfg.best_effort;
    out.enrichment = enrich_vocabulary(ds, vocab, *source, spec, cache, eopts);
    out.warnings = out.enrichment->failures;
    out.encoded = encode_vocabulary_stub(vocab, out.enrichment->records, cfg.stub_dim, cfg.pooling,
                                         cfg.best_effort);
  }
  for (const auto& w : out.encoded.warnings) out.warnings.push_back(w);
  return out;
}

Representations prepare_representations(const Dataset& ds, const RunConfig& cfg) {
  Representations reps;
  reps.vocab = extract_vocabulary(ds);
  const std::size_t n = ds.rows();

  const auto t_offline = Clock::now();
  std::optional<EncodeReport> encoded;
  if (!cfg.needs_semantics() || cfg.encoder == EncoderMode::none) {
    reps.semantic_skipped = true;
  } else {
    SemanticEncoding sem = encode_semantics(ds, reps.vocab, cfg);
    reps.enrichment = std::move(sem.enrichment);
    reps.warnings = std::move(sem.warnings);
    encoded = std::move(sem.encoded);
  }
  reps.offline_seconds = seconds_since(t_offline);

  const auto t_assembly = Clock::now();
  reps.anchor_hat = zscore_normalize(one_hot_matrix(ds, reps.vocab).values);
  if (encoded) {
    SemanticMatrix sem = assemble_semantic_matrix(ds, reps.vocab, encoded->embeddings);
    reps.block_dim = sem.block_dim;
    reps.semantic_hat = zscore_normalize(sem.values);
  } else {
    reps.semantic_hat.resize(static_cast<Eigen::Index>(n), 0);
  }
  reps.assembly_seconds = seconds_since(t_assembly);
  return reps;
}

ClusterResult cluster_representations(const Representations& reps, std::size_t k,
                                      const RunConfig& cfg, std::uint64_t seed) {
  const auto t0 = Clock::now();
  ClusterResult result;
  result.k = k;
  result.search_seed = seed;
  result.final_mode = cfg.final_mode;
  result.warnings = reps.warnings;

  FusionConfig fc = cfg.fusion_config();
  fc.silhouette.seed = derive_seed(seed, kSilhouetteStream);
  result.trace = select_alpha(reps.anchor_hat, reps.semantic_hat, k, fc, seed);

  if (cfg.final_mode == FinalMode::reuse) {
    result.final_seed = seed;
    result.final = result.trace.candidates[result.trace.selected].clustering;
  } else {
    result.final_seed = derive_seed(seed, kFinalStream);
    const FusedRepresentation z = fuse(reps.anchor_hat, reps.semantic_hat, result.alpha_star());
    result.final = kmeans(z.z, k, result.final_seed, fc.kmeans);
  }
  result.online_seconds = reps.assembly_seconds + seconds_since(t0);
  return result;
}

ClusterResult run_arise(const Dataset& ds, const RunConfig& cfg) {
  const Representations reps = prepare_representations(ds, cfg);
  return cluster_representations(reps, ds.k, cfg, cfg.seed);
}

nlohmann::json result_to_json(const ClusterResult& result, const RunConfig& cfg) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& c : result.trace.candidates) {
    nlohmann::json row;
    row["alpha"] = c.alpha;
    // Degenerate partitions carry the sentinel -1 and an explicit flag.
    row["s"] = c.silhouette.value_or(-1.0);
    row["degenerate"] = !c.silhouette.has_value();
    row["inertia"] = c.inertia;
    row["seed"] = c.seed;
    trace.push_back(std::move(row));
  }
  nlohmann::json j;
  j["tool_version"] = kToolVersion;
  j["config_echo"] = cfg.echo();
  j["k"] = result.k;
  j["alpha_star"] = result.alpha_star();
  j["silhouette_trace"] = std::move(trace);
  j["final"] = to_string(result.final_mode);
  j["final_seed"] = result.final_seed;
  j["labels"] = result.final.labels;
  j["inertia"] = result.final.inertia;
  j["iterations"] = result.final.iterations;
  j["converged"] = result.final.converged;
  j["warnings"] = result.warnings;
  return j;
}

} // namespace arise
