#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "arise/dataset.hpp"
#include "arise/encoding.hpp"
#include "arise/fusion.hpp"
#include "arise/semantics.hpp"

namespace arise {

inline constexpr std::string_view kToolVersion = "arise 0.1.0";

enum class LlmMode { none, stub, http };
enum class EncoderMode { none, stub, bundle };
enum class FinalMode { rerun, reuse };

std::string_view to_string(LlmMode m) noexcept;
std::string_view to_string(EncoderMode m) noexcept;
std::string_view to_string(FinalMode m) noexcept;
std::string_view to_string(SilhouetteMode m) noexcept;
std::string_view to_string(MissingPolicy m) noexcept;
LlmMode parse_llm_mode(std::string_view s);
EncoderMode parse_encoder_mode(std::string_view s);
FinalMode parse_final_mode(std::string_view s);
SilhouetteMode parse_silhouette_mode(std::string_view s);
MissingPolicy parse_missing_policy(std::string_view s);

/// "0:1:0.1" (inclusive range) or a comma list such as "0,0.5,1".
std::vector<double> parse_alpha_grid(std::string_view text);

/// "0..9" (inclusive) or a comma list.
std::vector<std::uint64_t> parse_seed_list(std::string_view text);

/// Everything a run depends on. Output locations are not included, so
/// that the echo is identical for runs that differ only in where they write.
struct RunConfig {
  // dataset
  std::string dataset;
  std::optional<std::string> label_column;
  std::size_t k = 2;
  char delimiter = ',';
  std::string domains; // declared-domain JSON, optional
  MissingPolicy missing = MissingPolicy::token;

  // semantics
  LlmMode llm = LlmMode::none;
  LlmEndpointConfig endpoint;
  std::string api_key_env = "OPENAI_API_KEY";
  std::string cache; // JSON-lines path; empty keeps descriptions in memory
  std::string prompt_template;
  std::size_t max_words = 40;
  std::size_t parallelism = 4;
  bool best_effort = false;

  // encoding
  EncoderMode encoder = EncoderMode::bundle;
  std::string bundle;
  std::size_t stub_dim = 64;
  Pooling pooling = Pooling::attention;

  // fusion
  std::vector<double> alphas = default_alpha_grid();
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  SilhouetteMode silhouette = SilhouetteMode::subsample;
  std::size_t silhouette_sample = 2000;
  std::size_t max_iter = 300;
  double tol = 1e-4;
  FinalMode final_mode = FinalMode::rerun;

  /// True when some alpha gives the semantic view nonzero weight.
  bool needs_semantics() const;

  /// Throws ConfigError with a remediation hint on the first problem found.
  void validate() const;

  LoadOptions load_options() const;
  FusionConfig fusion_config() const;

  /// Stable JSON echo; never contains the API key.
  nlohmann::json echo() const;
};

} // namespace arise
