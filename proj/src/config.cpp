#include "arise/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>

#include "arise/error.hpp"
#include "arise/random.hpp"

namespace arise {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_real(const std::string& s, std::string_view what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError(Stage::cli, "cannot parse " + std::string(what) + " '" + s + "' as a number");
  }
  return v;
}

std::uint64_t parse_uint(const std::string& s, std::string_view what) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError(Stage::cli, "cannot parse " + std::string(what) + " '" + s +
                                      "' as a non-negative integer");
  }
  return v;
}

[[noreturn]] void bad_choice(std::string_view what, std::string_view got, std::string_view options) {
  throw ConfigError(Stage::cli, "unknown " + std::string(what) + " '" + std::string(got) +
                                    "' (expected " + std::string(options) + ")");
}

bool file_exists(const std::string& p) { return std::filesystem::is_regular_file(p); }

} // namespace

std::string_view to_string(LlmMode m) noexcept {
  switch (m) {
  case LlmMode::none: return "none";
  case LlmMode::stub: return "stub";
  case LlmMode::http: return "http";
  }
  return "none";
}

std::string_view to_string(EncoderMode m) noexcept {
  switch (m) {
  case EncoderMode::none: return "none";
  case EncoderMode::stub: return "stub";
  case EncoderMode::bundle: return "bundle";
  }
  return "none";
}

std::string_view to_string(FinalMode m) noexcept {
  return m == FinalMode::rerun ? "rerun" : "reuse";
}

std::string_view to_string(SilhouetteMode m) noexcept {
  return m == SilhouetteMode::exact ? "exact" : "subsample";
}

std::string_view to_string(MissingPolicy m) noexcept {
  return m == MissingPolicy::token ? "token" : "mode";
}

LlmMode parse_llm_mode(std::string_view s) {
  if (s == "none") return LlmMode::none;
  if (s == "stub") return LlmMode::stub;
  if (s == "http") return LlmMode::http;
  bad_choice("llm mode", s, "none, stub or http");
}

EncoderMode parse_encoder_mode(std::string_view s) {
  if (s == "none") return EncoderMode::none;
  if (s == "stub") return EncoderMode::stub;
  if (s == "bundle") return EncoderMode::bundle;
  bad_choice("encoder mode", s, "none, stub or bundle");
}

FinalMode parse_final_mode(std::string_view s) {
  if (s == "rerun") return FinalMode::rerun;
  if (s == "reuse") return FinalMode::reuse;
  bad_choice("final mode", s, "rerun or reuse");
}

SilhouetteMode parse_silhouette_mode(std::string_view s) {
  if (s == "exact") return SilhouetteMode::exact;
  if (s == "subsample") return SilhouetteMode::subsample;
  bad_choice("silhouette mode", s, "exact or subsample");
}

MissingPolicy parse_missing_policy(std::string_view s) {
  if (s == "token") return MissingPolicy::token;
  if (s == "mode") return MissingPolicy::mode;
  bad_choice("missing-value policy", s, "token or mode");
}

std::vector<double> parse_alpha_grid(std::string_view text) {
  const std::string t = trim(text);
  if (t.empty()) throw ConfigError(Stage::cli, "alpha grid is empty; try --alphas 0:1:0.1");
  std::vector<double> grid;
  if (t.find(':') != std::string::npos) {
    const auto parts = split(t, ':');
    if (parts.size() != 3) {
      throw ConfigError(Stage::cli, "alpha range '" + t + "' must look like start:stop:step");
    }
    const double lo = parse_real(parts[0], "alpha start");
    const double hi = parse_real(parts[1], "alpha stop");
    const double step = parse_real(parts[2], "alpha step");
    if (!(step > 0.0) || hi < lo) {
      throw ConfigError(Stage::cli, "alpha range '" + t + "' needs step > 0 and stop >= start");
    }
    // Count-based stepping so 0:1:0.1 yields exactly 0.0, 0.1, ..., 1.0.
    const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= count; ++i) {
      const double a = lo + static_cast<double>(i) * step;
      grid.push_back(std::round(a * 1e12) / 1e12);
    }
  } else {
    for (const auto& p : split(t, ',')) grid.push_back(parse_real(p, "alpha"));
  }
  for (double a : grid) {
    if (!(a >= 0.0 && a <= 1.0)) {
      throw ConfigError(Stage::cli, "alpha " + std::to_string(a) + " lies outside [0, 1]");
    }
  }
  return grid;
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  const std::string t = trim(text);
  if (t.empty()) throw ConfigError(Stage::cli, "seed list is empty; try --seeds 0..9");
  std::vector<std::uint64_t> seeds;
  if (const auto dots = t.find(".."); dots != std::string::npos) {
    const auto lo = parse_uint(trim(t.substr(0, dots)), "seed");
    const auto hi = parse_uint(trim(t.substr(dots + 2)), "seed");
    if (hi < lo) throw ConfigError(Stage::cli, "seed range '" + t + "' is reversed");
    for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
  } else {
    for (const auto& p : split(t, ',')) seeds.push_back(parse_uint(p, "seed"));
  }
  return seeds;
}

bool RunConfig::needs_semantics() const {
  return std::any_of(alphas.begin(), alphas.end(), [](double a) { return a > 0.0; });
}

void RunConfig::validate() const {
  if (dataset.empty()) throw ConfigError(Stage::cli, "no dataset given; pass --dataset PATH");
  if (!file_exists(dataset)) {
    throw ConfigError(Stage::cli, "dataset '" + dataset + "' does not exist");
  }
  if (k < 2) throw ConfigError(Stage::cli, "--k must be at least 2");
  if (!domains.empty() && !file_exists(domains)) {
    throw ConfigError(Stage::cli, "domains file '" + domains + "' does not exist");
  }
  if (alphas.empty()) throw ConfigError(Stage::cli, "alpha grid is empty; try --alphas 0:1:0.1");
  for (double a : alphas) {
    if (!(a >= 0.0 && a <= 1.0)) {
      throw ConfigError(Stage::cli, "alpha " + std::to_string(a) + " lies outside [0, 1]");
    }
  }
  if (seeds.empty()) throw ConfigError(Stage::cli, "seed list is empty; try --seeds 0..9");
  if (silhouette_sample < 2) throw ConfigError(Stage::cli, "--silhouette-sample must be at least 2");
  if (max_iter == 0) throw ConfigError(Stage::cli, "--max-iter must be positive");
  if (!(tol >= 0.0)) throw ConfigError(Stage::cli, "--tol must be non-negative");
  if (parallelism == 0) throw ConfigError(Stage::cli, "--parallelism must be positive");
  if (max_words == 0) throw ConfigError(Stage::cli, "--max-words must be positive");

  if (!needs_semantics()) return;
  switch (encoder) {
  case EncoderMode::none:
    throw ConfigError(Stage::cli, "alpha grid gives the semantic view weight but --encoder is none; "
                                  "use --encoder bundle or stub, or --alphas 0");
  case EncoderMode::bundle:
    if (bundle.empty()) {
      throw ConfigError(Stage::cli, "--encoder bundle needs --bundle DIR (create one with stub-bundle)");
    }
    if (!file_exists((std::filesystem::path(bundle) / "manifest.json").string())) {
      throw ConfigError(Stage::cli, "bundle directory '" + bundle + "' has no manifest.json");
    }
    break;
  case EncoderMode::stub:
    if (stub_dim == 0) throw ConfigError(Stage::cli, "--stub-dim must be positive");
    if (llm == LlmMode::none && cache.empty()) {
      throw ConfigError(Stage::cli, "--encoder stub needs descriptions: pass --cache PATH or --llm stub|http");
    }
    if (llm == LlmMode::none && !file_exists(cache)) {
      throw ConfigError(Stage::cli, "cache '" + cache + "' does not exist; run 'arise describe' first");
    }
    break;
  }
  if (llm == LlmMode::http) endpoint.validate();
  if (!prompt_template.empty() && !file_exists(prompt_template)) {
    throw ConfigError(Stage::cli, "prompt template '" + prompt_template + "' does not exist");
  }
}

LoadOptions RunConfig::load_options() const {
  LoadOptions o;
  o.delimiter = delimiter;
  o.label_column = label_column;
  o.k = k;
  o.missing = missing;
  if (!domains.empty()) o.declared_domains = load_declared_domains(domains);
  return o;
}

FusionConfig RunConfig::fusion_config() const {
  FusionConfig f;
  f.alphas = alphas;
  f.kmeans.max_iter = max_iter;
  f.kmeans.tol = tol;
  f.silhouette.mode = silhouette;
  f.silhouette.sample_size = silhouette_sample;
  f.silhouette.seed = derive_seed(seed, kSilhouetteStream);
  f.parallelism = parallelism;
  return f;
}

nlohmann::json RunConfig::echo() const {
  nlohmann::json j;
  j["dataset"] = dataset;
  j["label_column"] = label_column ? nlohmann::json(*label_column) : nlohmann::json(nullptr);
  j["k"] = k;
  j["delimiter"] = std::string(1, delimiter);
  j["domains"] = domains;
  j["missing"] = to_string(missing);
  j["llm"] = to_string(llm);
  if (llm == LlmMode::http) {
    j["endpoint"] = endpoint.base_url;
    j["model"] = endpoint.model;
    j["temperature"] = endpoint.temperature;
  }
  j["cache"] = cache;
  j["prompt_template"] = prompt_template;
  j["max_words"] = max_words;
  j["encoder"] = to_string(encoder);
  j["bundle"] = bundle;
  if (encoder == EncoderMode::stub) j["stub_dim"] = stub_dim;
  j["pooling"] = to_string(pooling);
  j["alphas"] = alphas;
  j["seed"] = seed;
  j["seeds"] = seeds;
  j["silhouette"] = to_string(silhouette);
  j["silhouette_sample"] = silhouette_sample;
  j["max_iter"] = max_iter;
  j["tol"] = tol;
  j["final"] = to_string(final_mode);
  return j;
}

} // namespace arise
