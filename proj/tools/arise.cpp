// arise: command-line entry point. One subcommand per pipeline stage plus
// evaluation, benchmarking and the scaling harness.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "arise/bundle.hpp"
#include "arise/config.hpp"
#include "arise/csv.hpp"
#include "arise/dataset.hpp"
#include "arise/error.hpp"
#include "arise/eval.hpp"
#include "arise/pipeline.hpp"
#include "arise/scaling.hpp"
#include "arise/semantics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace arise;

namespace {

// String-typed mirrors of enum and list options; converted in finish().
struct Raw {
  std::string label_column;
  std::string missing = "token";
  std::string delimiter = ",";
  std::string llm = "none";
  std::string encoder = "bundle";
  std::string pooling = "attention";
  std::string alphas = "0:1:0.1";
  std::string seeds = "0..9";
  std::string silhouette = "subsample";
  std::string final_mode = "rerun";
};

struct Cli {
  RunConfig cfg;
  Raw raw;
  std::string out;
  std::string result_path;
  std::string labels_path;
  std::string suite_path;
  std::size_t dim = 64;

  // scaling
  std::string axis = "n";
  std::string axis_values;
  SyntheticSpec synthetic;
  std::size_t repeats = 3;
  std::size_t replicates = 5;
  std::string scaling_alphas = "0,0.5,1";
  std::size_t scaling_sample = 500;

  void finish() {
    cfg.label_column = raw.label_column.empty() ? std::nullopt : std::optional(raw.label_column);
    cfg.missing = parse_missing_policy(raw.missing);
    if (raw.delimiter.size() != 1) {
      throw ConfigError(Stage::cli, "--delimiter must be a single character");
    }
    cfg.delimiter = raw.delimiter[0];
    cfg.llm = parse_llm_mode(raw.llm);
    cfg.encoder = parse_encoder_mode(raw.encoder);
    cfg.pooling = parse_pooling(raw.pooling);
    cfg.alphas = parse_alpha_grid(raw.alphas);
    cfg.seeds = parse_seed_list(raw.seeds);
    cfg.silhouette = parse_silhouette_mode(raw.silhouette);
    cfg.final_mode = parse_final_mode(raw.final_mode);
  }
};

void add_dataset_options(CLI::App* app, Cli& c, bool need_k) {
  app->add_option("--dataset", c.cfg.dataset, "CSV file with a header row")->required();
  app->add_option("--label-column", c.raw.label_column, "column holding class labels (excluded from attributes)");
  auto* k = app->add_option("--k", c.cfg.k, "number of clusters");
  if (need_k) k->required();
  app->add_option("--domains", c.cfg.domains, "JSON object of declared value domains per attribute");
  app->add_option("--missing", c.raw.missing, "missing-cell policy: token or mode");
  app->add_option("--delimiter", c.raw.delimiter, "CSV field delimiter");
}

void add_llm_options(CLI::App* app, Cli& c) {
  app->add_option("--llm", c.raw.llm, "description source: none (cache only), stub or http");
  app->add_option("--endpoint", c.cfg.endpoint.base_url, "OpenAI-compatible base URL");
  app->add_option("--model", c.cfg.endpoint.model, "LLM model name");
  app->add_option("--temperature", c.cfg.endpoint.temperature, "sampling temperature");
  app->add_option("--max-retries", c.cfg.endpoint.max_retries, "retries on 429, 5xx and network errors");
  app->add_option("--timeout", c.cfg.endpoint.timeout_seconds, "per-request timeout in seconds");
  app->add_option("--api-key-env", c.cfg.api_key_env, "environment variable holding the API key");
  app->add_option("--parallelism", c.cfg.parallelism, "concurrent workers");
  app->add_option("--cache", c.cfg.cache, "description cache (JSON lines)");
  app->add_option("--prompt-template", c.cfg.prompt_template, "file overriding the prompt template");
  app->add_option("--max-words", c.cfg.max_words, "word cap per aspect");
  app->add_flag("--best-effort", c.cfg.best_effort, "continue past failed values (zero vectors, warnings)");
}

void add_encoder_options(CLI::App* app, Cli& c) {
  app->add_option("--encoder", c.raw.encoder, "semantic encoder: bundle, stub or none");
  app->add_option("--bundle", c.cfg.bundle, "token-embedding bundle directory");
  app->add_option("--stub-dim", c.cfg.stub_dim, "token dimension for --encoder stub");
  app->add_option("--pooling", c.raw.pooling, "attention, mean or cls");
}

void add_fusion_options(CLI::App* app, Cli& c) {
  app->add_option("--alphas", c.raw.alphas, "alpha grid: start:stop:step or a comma list");
  app->add_option("--seed", c.cfg.seed, "k-Means seed");
  app->add_option("--silhouette", c.raw.silhouette, "exact or subsample");
  app->add_option("--silhouette-sample", c.cfg.silhouette_sample, "subsample size when N exceeds it");
  app->add_option("--max-iter", c.cfg.max_iter, "k-Means iteration cap");
  app->add_option("--tol", c.cfg.tol, "k-Means centroid-shift tolerance");
  app->add_option("--final", c.raw.final_mode, "final clustering: rerun or reuse");
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  if (const auto dir = fs::path(path).parent_path(); !dir.empty()) fs::create_directories(dir);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(Stage::cli, "cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError(Stage::cli, "short write to '" + path + "'");
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(Stage::cli, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(Stage::cli, "'" + path + "' is not valid JSON: " + e.what());
  }
}

json stats_json(const Dataset& ds) {
  json j = dataset_stats(ds);
  j["amortization_ratio"] = amortization_ratio(ds.rows(), ds.cols(), extract_vocabulary(ds).size());
  return j;
}

int cmd_stats(Cli& c) {
  const Dataset ds = load_dataset(c.cfg.dataset, c.cfg.load_options());
  write_json(c.out, stats_json(ds));
  return 0;
}

int cmd_describe(Cli& c) {
  if (c.cfg.cache.empty()) throw ConfigError(Stage::cli, "describe needs --cache PATH to store descriptions");
  if (c.cfg.llm == LlmMode::http) c.cfg.endpoint.validate();
  const Dataset ds = load_dataset(c.cfg.dataset, c.cfg.load_options());
  const Vocabulary vocab = extract_vocabulary(ds);
  DescriptionCache cache(c.cfg.cache);
  auto source = make_description_source(c.cfg);
  const PromptSpec spec = load_prompt_spec(c.cfg.prompt_template, c.cfg.max_words);
  EnrichOptions opts;
  opts.parallelism = c.cfg.parallelism;
  opts.best_effort = c.cfg.best_effort;
  const EnrichReport report = enrich_vocabulary(ds, vocab, *source, spec, cache, opts);

  json j;
  j["tool_version"] = kToolVersion;
  j["config_echo"] = c.cfg.echo();
  j["model"] = source->model();
  j["vocab_size"] = report.vocab_size;
  j["queries"] = report.queries;
  j["cache_hits"] = report.cache_hits;
  j["failures"] = report.failures;
  j["amortization_ratio"] = amortization_ratio(ds.rows(), ds.cols(), vocab.size());
  write_json(c.out, j);
  return report.failures.empty() ? 0 : 3;
}

int cmd_stub_bundle(Cli& c) {
  if (c.cfg.cache.empty() || c.out.empty()) {
    throw ConfigError(Stage::cli, "stub-bundle needs --cache PATH and --out DIR");
  }
  if (!fs::is_regular_file(c.cfg.cache)) {
    throw ConfigError(Stage::cli, "cache '" + c.cfg.cache + "' does not exist");
  }
  const DescriptionCache cache(c.cfg.cache);
  const auto records = cache.records();
  const BundleManifest m = write_stub_bundle(records, c.out, c.dim);
  std::cout << json{{"dir", c.out}, {"entries", m.entries.size()}, {"dim", m.dim},
                    {"encoder_model", m.encoder_model}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_encode(Cli& c) {
  if (c.cfg.encoder == EncoderMode::none) {
    throw ConfigError(Stage::cli, "encode needs --encoder bundle or stub");
  }
  c.cfg.alphas = {1.0}; // forces the semantic path
  c.cfg.validate();
  const Dataset ds = load_dataset(c.cfg.dataset, c.cfg.load_options());
  const Vocabulary vocab = extract_vocabulary(ds);

  const SemanticEncoding sem = encode_semantics(ds, vocab, c.cfg);
  const EncodeReport& enc = sem.encoded;

  json entries = json::array();
  for (std::size_t id = 0; id < vocab.size(); ++id) {
    const auto& e = vocab.entries[id];
    entries.push_back({{"attribute", ds.attributes[e.attribute].name},
                       {"value", e.value},
                       {"vector", enc.embeddings[id]->vector}});
  }
  json j;
  j["tool_version"] = kToolVersion;
  j["config_echo"] = c.cfg.echo();
  j["pooling"] = to_string(c.cfg.pooling);
  j["dim"] = enc.dim;
  j["entries"] = std::move(entries);
  j["warnings"] = sem.warnings;
  write_json(c.out, j);
  return 0;
}

int cmd_cluster(Cli& c) {
  c.cfg.validate();
  const Dataset ds = load_run_dataset(c.cfg);
  const ClusterResult r = run_arise(ds, c.cfg);
  write_json(c.out, result_to_json(r, c.cfg));
  return 0;
}

std::vector<std::uint32_t> labels_from_csv(const std::string& path, const std::string& column) {
  const auto rows = csv::read_file(path);
  if (rows.size() < 2) throw EmptyInputError(Stage::eval, "labels file '" + path + "' has no data rows");
  std::size_t col = 0;
  if (!column.empty()) {
    const auto it = std::find(rows[0].begin(), rows[0].end(), column);
    if (it == rows[0].end()) {
      throw ConfigError(Stage::eval, "labels file has no column '" + column + "'");
    }
    col = static_cast<std::size_t>(it - rows[0].begin());
  } else if (rows[0].size() != 1) {
    throw ConfigError(Stage::eval, "labels file has several columns; pick one with --label-column");
  }
  std::map<std::string, std::uint32_t> ids;
  std::vector<std::uint32_t> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (col >= rows[r].size()) throw ParseError(Stage::eval, "ragged row " + std::to_string(r + 1));
    const auto [it, fresh] = ids.emplace(rows[r][col], static_cast<std::uint32_t>(ids.size()));
    out.push_back(it->second);
  }
  return out;
}

int cmd_eval(Cli& c) {
  const json result = read_json(c.result_path);
  if (!result.contains("labels") || !result["labels"].is_array()) {
    throw ParseError(Stage::eval, "'" + c.result_path + "' has no labels array; is it a cluster result?");
  }
  const auto pred = result["labels"].get<std::vector<std::uint32_t>>();
  const auto truth = labels_from_csv(c.labels_path, c.raw.label_column);
  TrialMetrics t = score(truth, pred, result.value("final_seed", std::uint64_t{0}));
  json j{{"ari", t.ari}, {"nmi", t.nmi}, {"acc", t.acc}, {"n", truth.size()},
         {"nmi_normalization", "arithmetic"}};
  if (result.contains("alpha_star")) j["alpha_star"] = result["alpha_star"];
  write_json(c.out, j);
  return 0;
}

int cmd_trials(Cli& c) {
  c.cfg.validate();
  const Dataset ds = load_run_dataset(c.cfg);
  const MetricsReport report = run_trials(ds, c.cfg);
  json j = report.to_json();
  j["tool_version"] = kToolVersion;
  j["config_echo"] = c.cfg.echo();
  write_json(c.out, j);
  return 0;
}

// suite.toml: one [section] per run; keys mirror the cluster/trials flags
// without the leading dashes (dataset, label-column, k, alphas, seeds, ...).
int cmd_bench(Cli& c) {
  if (!fs::is_regular_file(c.suite_path)) {
    throw ConfigError(Stage::cli, "suite file '" + c.suite_path + "' does not exist");
  }
  const auto items = CLI::ConfigTOML().from_file(c.suite_path);
  std::vector<std::string> order;
  std::map<std::string, std::map<std::string, std::string>> runs;
  for (const auto& item : items) {
    if (item.parents.empty() || item.inputs.empty()) continue;
    const std::string& run = item.parents.front();
    if (!runs.count(run)) order.push_back(run);
    runs[run][item.name] = item.inputs.front();
  }
  if (order.empty()) throw ConfigError(Stage::cli, "suite '" + c.suite_path + "' defines no [runs]");
  const fs::path base = fs::path(c.suite_path).parent_path();
  auto resolve = [&](const std::string& p) {
    return p.empty() || fs::path(p).is_absolute() ? p : (base / p).string();
  };

  json table = json::array();
  std::ostringstream md;
  md << "| run | dataset | N | alpha* (mode) | ARI | NMI | ACC |\n";
  md << "|---|---|---|---|---|---|---|\n";
  for (const auto& name : order) {
    const auto& kv = runs[name];
    auto get = [&](const std::string& key, const std::string& fallback) {
      const auto it = kv.find(key);
      return it == kv.end() ? fallback : it->second;
    };
    Cli run;
    run.cfg.dataset = resolve(get("dataset", ""));
    run.raw.label_column = get("label-column", "");
    run.cfg.k = std::stoul(get("k", "2"));
    run.cfg.domains = resolve(get("domains", ""));
    run.raw.missing = get("missing", "token");
    run.raw.llm = get("llm", "none");
    run.cfg.cache = resolve(get("cache", ""));
    run.raw.encoder = get("encoder", "bundle");
    run.cfg.bundle = resolve(get("bundle", ""));
    run.cfg.stub_dim = std::stoul(get("stub-dim", "64"));
    run.raw.pooling = get("pooling", "attention");
    run.raw.alphas = get("alphas", "0:1:0.1");
    run.raw.seeds = get("seeds", "0..9");
    run.raw.silhouette = get("silhouette", "subsample");
    run.raw.final_mode = get("final", "rerun");
    run.cfg.parallelism = c.cfg.parallelism;
    run.finish();
    run.cfg.validate();
    const Dataset ds = load_run_dataset(run.cfg);
    const MetricsReport report = run_trials(ds, run.cfg);

    std::map<double, int> alpha_votes;
    for (const auto& t : report.trials) ++alpha_votes[t.alpha_star];
    double alpha_mode = 0.0;
    int best = -1;
    for (const auto& [a, v] : alpha_votes) {
      if (v > best) {
        best = v;
        alpha_mode = a;
      }
    }
    char cell[64];
    auto pm = [&](const Aggregate& a) {
      std::snprintf(cell, sizeof cell, "%.4f ± %.2f", a.mean, a.std);
      return std::string(cell);
    };
    md << "| " << name << " | " << ds.name << " | " << ds.rows() << " | " << alpha_mode << " | "
       << pm(report.ari) << " | " << pm(report.nmi) << " | " << pm(report.acc) << " |\n";
    json row = report.to_json();
    row["run"] = name;
    row["config_echo"] = run.cfg.echo();
    table.push_back(std::move(row));
  }
  const std::string stem = c.out.empty() ? "bench" : c.out;
  write_text(stem + ".md", md.str());
  write_json(stem + ".json", json{{"tool_version", kToolVersion}, {"runs", table}});
  std::cout << md.str();
  return 0;
}

int cmd_scaling(Cli& c) {
  ScalingOptions opts;
  opts.axis = parse_scaling_axis(c.axis);
  if (!c.axis_values.empty()) {
    opts.values.clear();
    for (auto v : parse_seed_list(c.axis_values)) opts.values.push_back(static_cast<std::size_t>(v));
  } else if (opts.axis == ScalingAxis::m) {
    opts.values = {5, 10, 20};
  } else if (opts.axis == ScalingAxis::vocab) {
    opts.values = {4, 8, 16};
  }
  opts.base = c.synthetic;
  opts.alphas = parse_alpha_grid(c.scaling_alphas);
  opts.stub_dim = c.dim;
  opts.repeats = c.repeats;
  opts.replicates = c.replicates;
  opts.silhouette_sample = c.scaling_sample;
  opts.max_iter = c.cfg.max_iter;
  opts.tol = c.cfg.tol;
  write_text(c.out, scaling_csv(opts.axis, run_scaling_sweep(opts)));
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"ARISE: LLM-enriched representations for categorical data clustering", "arise"};
  app.set_config("--config", "", "key-value config file mirroring the flags ([subcommand] sections)");
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  Cli c;
  auto* stats = app.add_subcommand("stats", "dataset statistics as JSON");
  add_dataset_options(stats, c, false);
  stats->add_option("--out", c.out, "output file (default stdout)");

  auto* describe = app.add_subcommand("describe", "describe every attribute value once, into the cache");
  add_dataset_options(describe, c, false);
  add_llm_options(describe, c);
  describe->add_option("--out", c.out, "report file (default stdout)");

  auto* stub = app.add_subcommand("stub-bundle", "write a deterministic token bundle from a cache");
  stub->add_option("--cache", c.cfg.cache, "description cache")->required();
  stub->add_option("--out", c.out, "bundle directory")->required();
  stub->add_option("--dim", c.dim, "token dimension");

  auto* encode = app.add_subcommand("encode", "pool value embeddings");
  add_dataset_options(encode, c, false);
  add_llm_options(encode, c);
  add_encoder_options(encode, c);
  encode->add_option("--out", c.out, "embeddings JSON (default stdout)");

  auto* cluster = app.add_subcommand("cluster", "alpha search and final k-Means");
  add_dataset_options(cluster, c, true);
  add_llm_options(cluster, c);
  add_encoder_options(cluster, c);
  add_fusion_options(cluster, c);
  cluster->add_option("--out", c.out, "result JSON (default stdout)");

  auto* eval = app.add_subcommand("eval", "score a cluster result against labels");
  eval->add_option("--result", c.result_path, "result.json from cluster")->required();
  eval->add_option("--labels", c.labels_path, "CSV holding the true labels")->required();
  eval->add_option("--label-column", c.raw.label_column, "label column in the CSV");
  eval->add_option("--out", c.out, "metrics JSON (default stdout)");

  auto* trials = app.add_subcommand("trials", "repeated clustering over seeds, mean and std of metrics");
  add_dataset_options(trials, c, true);
  add_llm_options(trials, c);
  add_encoder_options(trials, c);
  add_fusion_options(trials, c);
  trials->add_option("--seeds", c.raw.seeds, "seed list: a..b or comma list");
  trials->add_option("--out", c.out, "report JSON (default stdout)");

  auto* bench = app.add_subcommand("bench", "run a suite of trials, emit Markdown and JSON tables");
  bench->add_option("--suite", c.suite_path, "suite TOML file")->required();
  bench->add_option("--out", c.out, "output stem: writes STEM.md and STEM.json");
  bench->add_option("--parallelism", c.cfg.parallelism, "concurrent trials");

  auto* scaling = app.add_subcommand("scaling", "runtime sweep on synthetic data (stub LLM and encoder)");
  scaling->add_option("--axis", c.axis, "n, m or vocab");
  scaling->add_option("--values", c.axis_values, "axis values: a..b or comma list");
  scaling->add_option("--n", c.synthetic.n, "rows when not swept");
  scaling->add_option("--m", c.synthetic.m, "attributes when not swept");
  scaling->add_option("--cardinality", c.synthetic.cardinality, "values per attribute when not swept");
  scaling->add_option("--k", c.synthetic.k, "planted classes");
  scaling->add_option("--noise", c.synthetic.noise, "probability a cell ignores its class prototype");
  scaling->add_option("--seed", c.synthetic.seed, "generator and k-Means seed");
  scaling->add_option("--alphas", c.scaling_alphas, "alpha grid");
  scaling->add_option("--dim", c.dim, "stub token dimension");
  scaling->add_option("--repeats", c.repeats, "timed repeats per dataset (fastest kept)");
  scaling->add_option("--replicates", c.replicates, "datasets per point, seeds seed..seed+R-1 (times averaged)");
  scaling->add_option("--silhouette-sample", c.scaling_sample, "silhouette subsample size");
  scaling->add_option("--max-iter", c.cfg.max_iter, "k-Means iteration cap");
  scaling->add_option("--tol", c.cfg.tol, "k-Means centroid-shift tolerance");
  scaling->add_option("--out", c.out, "CSV output (default stdout)");
  c.dim = 64;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    c.finish();
    if (*stats) return cmd_stats(c);
    if (*describe) return cmd_describe(c);
    if (*stub) return cmd_stub_bundle(c);
    if (*encode) return cmd_encode(c);
    if (*cluster) return cmd_cluster(c);
    if (*eval) return cmd_eval(c);
    if (*trials) return cmd_trials(c);
    if (*bench) return cmd_bench(c);
    if (*scaling) {
      if (scaling->count("--dim") == 0) c.dim = 16;
      return cmd_scaling(c);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
