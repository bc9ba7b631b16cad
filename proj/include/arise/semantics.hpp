#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "arise/dataset.hpp"

namespace arise {

/// Structured description prompt. The four aspects (definition, indicators,
/// context, contrast) are numbered instructions inside the template.
struct PromptSpec {
  static const std::string kDefaultTemplate;
  static constexpr std::array<std::string_view, 4> kAspects = {
      "Definition", "Indicators", "Context", "Contrast"};

  std::string template_text = kDefaultTemplate;
  std::size_t max_words = 40;

  /// Checks the placeholders and, in order, the four numbered aspects.
  void validate() const;
};

PromptSpec load_prompt_spec(const std::string& template_path, std::size_t max_words);

/// Renders the prompt for `value` of `attribute` with sibling domain `domain`.
/// Byte-identical for identical inputs. Throws ContractViolation if `value`
/// is not in `domain`.
std::string build_prompt(std::string_view value, std::string_view attribute,
                         std::span<const std::string> domain, const PromptSpec& spec);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

struct DescriptionRecord {
  std::string attribute;
  std::string value;
  std::string description;
  std::string model;
  std::string prompt_hash;
  std::string created_at;
  nlohmann::json extra = nlohmann::json::object(); // unknown fields, kept verbatim

  nlohmann::json to_json() const;
  static DescriptionRecord from_json(const nlohmann::json& j);
};

/// Append-only JSON-lines store of descriptions keyed by
/// (attribute, value, model, prompt_hash). Appends are serialized.
class DescriptionCache {
public:
  using Key = std::tuple<std::string, std::string, std::string, std::string>;

  /// In-memory cache; nothing is persisted.
  DescriptionCache() = default;
  /// Loads `path` if it exists; later appends go to the same file.
  explicit DescriptionCache(std::string path);

  DescriptionCache(const DescriptionCache&) = delete;
  DescriptionCache& operator=(const DescriptionCache&) = delete;

  std::optional<DescriptionRecord> find(const std::string& attribute, const std::string& value,
                                        const std::string& model,
                                        const std::string& prompt_hash) const;
  /// Looks up by (attribute, value) ignoring model and prompt. Returns the
  /// first matching record in file order.
  std::optional<DescriptionRecord> find_any(const std::string& attribute,
                                            const std::string& value) const;

  /// Adds a record and appends it to the backing file. A record whose key is
  /// already present is ignored and false is returned.
  bool append(const DescriptionRecord& record);

  std::vector<DescriptionRecord> records() const;
  std::size_t size() const;
  const std::string& path() const noexcept { return path_; }

private:
  std::string path_;
  mutable std::mutex mutex_;
  std::vector<DescriptionRecord> records_;
  std::map<Key, std::size_t> index_;
};

void write_cache_file(const std::string& path, std::span<const DescriptionRecord> records);

struct LlmEndpointConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-4o-mini";
  std::string api_key; // taken from the environment, never from flags
  double temperature = 0.0;
  int max_retries = 3;
  int timeout_seconds = 60;
  int retry_backoff_ms = 500;

  void validate() const;
};

/// Something that turns a rendered prompt into a description.
class DescriptionSource {
public:
  virtual ~DescriptionSource() = default;

  /// `value`, `attribute` and `domain` are passed along for test doubles;
  /// real endpoints only see the prompt.
  virtual std::string describe(const std::string& prompt, std::string_view value,
                               std::string_view attribute,
                               std::span<const std::string> domain) = 0;
  virtual std::string model() const = 0;
};

/// Deterministic double: "VALUE {value} OF {attribute} AMONG {domain}".
class StubLlm final : public DescriptionSource {
public:
  explicit StubLlm(std::string model = "stub") : model_(std::move(model)) {}
  std::string describe(const std::string& prompt, std::string_view value,
                       std::string_view attribute,
                       std::span<const std::string> domain) override;
  std::string model() const override { return model_; }

private:
  std::string model_;
};

/// OpenAI-compatible chat-completions client.
class HttpLlm final : public DescriptionSource {
public:
  explicit HttpLlm(LlmEndpointConfig cfg);
  std::string describe(const std::string& prompt, std::string_view value,
                       std::string_view attribute,
                       std::span<const std::string> domain) override;
  std::string model() const override { return cfg_.model; }

private:
  LlmEndpointConfig cfg_;
};

/// One completion for `prompt`, trimmed. Throws TransportError once retries
/// are exhausted and EmptyDescriptionError for blank completions.
std::string describe_value(const LlmEndpointConfig& cfg, const std::string& prompt);

struct EnrichOptions {
  std::size_t parallelism = 4;
  /// Keep going after transport failures; failed values are reported.
  bool best_effort = false;
};

struct EnrichReport {
  std::size_t vocab_size = 0;
  std::size_t queries = 0;    // requests actually issued
  std::size_t cache_hits = 0;
  std::vector<std::string> failures; // "attribute=value: reason"
  /// One record per vocabulary entry in vocabulary order; empty optional
  /// for values that failed in best-effort mode.
  std::vector<std::optional<DescriptionRecord>> records;
};

/// Describes every vocabulary entry, one query per value not already cached.
EnrichReport enrich_vocabulary(const Dataset& ds, const Vocabulary& vocab,
                               DescriptionSource& source, const PromptSpec& spec,
                               DescriptionCache& cache, const EnrichOptions& options = {});

/// Fraction of queries saved by describing values instead of cells:
/// 1 - |V| / (N * M). Not clamped.
double amortization_ratio(std::size_t n, std::size_t m, std::size_t vocab_size);

/// ISO-8601 UTC timestamp; honours SOURCE_DATE_EPOCH for reproducible caches.
std::string utc_timestamp();

} // namespace arise
