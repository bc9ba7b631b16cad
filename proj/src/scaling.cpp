#include "arise/scaling.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "arise/config.hpp"
#include "arise/error.hpp"
#include "arise/pipeline.hpp"
#include "arise/random.hpp"

namespace arise {

Dataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n < 2 || spec.m == 0 || spec.cardinality < 2 || spec.k < 2 || spec.k > spec.n) {
    throw ConfigError(Stage::cli, "synthetic data needs n >= k >= 2, m >= 1, cardinality >= 2");
  }
  if (!(spec.noise >= 0.0 && spec.noise <= 1.0)) {
    throw ConfigError(Stage::cli, "synthetic noise must lie in [0, 1]");
  }
  Rng rng(spec.seed);
  std::vector<std::vector<std::size_t>> proto(spec.k, std::vector<std::size_t>(spec.m));
  for (auto& p : proto) {
    for (auto& v : p) v = rng.index(spec.cardinality);
  }

  // Rendered as CSV and parsed back so domains follow the loader's rules.
  std::ostringstream csv;
  for (std::size_t j = 0; j < spec.m; ++j) csv << 'a' << j << ',';
  csv << "class\n";
  for (std::size_t i = 0; i < spec.n; ++i) {
    const std::size_t c = rng.index(spec.k);
    for (std::size_t j = 0; j < spec.m; ++j) {
      const std::size_t v = rng.uniform() < spec.noise ? rng.index(spec.cardinality) : proto[c][j];
      csv << 'v' << v << ',';
    }
    csv << 'c' << c << '\n';
  }
  LoadOptions opts;
  opts.label_column = "class";
  opts.k = spec.k;
  return parse_dataset(csv.str(), opts, "synthetic");
}

ScalingAxis parse_scaling_axis(std::string_view s) {
  if (s == "n") return ScalingAxis::n;
  if (s == "m") return ScalingAxis::m;
  if (s == "vocab") return ScalingAxis::vocab;
  throw ConfigError(Stage::cli, "unknown scaling axis '" + std::string(s) + "' (expected n, m or vocab)");
}

std::string_view to_string(ScalingAxis a) noexcept {
  switch (a) {
  case ScalingAxis::n: return "n";
  case ScalingAxis::m: return "m";
  case ScalingAxis::vocab: return "vocab";
  }
  return "n";
}

std::vector<ScalingRow> run_scaling_sweep(const ScalingOptions& options) {
  if (options.values.empty()) throw ConfigError(Stage::cli, "scaling sweep has no axis values");
  RunConfig cfg;
  cfg.llm = LlmMode::stub;
  cfg.encoder = EncoderMode::stub;
  cfg.stub_dim = options.stub_dim;
  cfg.alphas = options.alphas;
  cfg.silhouette = SilhouetteMode::subsample;
  cfg.silhouette_sample = options.silhouette_sample;
  cfg.max_iter = options.max_iter;
  cfg.tol = options.tol;
  cfg.parallelism = 1;

  std::vector<ScalingRow> rows;
  for (std::size_t value : options.values) {
    SyntheticSpec spec = options.base;
    switch (options.axis) {
    case ScalingAxis::n: spec.n = value; break;
    case ScalingAxis::m: spec.m = value; break;
    case ScalingAxis::vocab: spec.cardinality = value; break;
    }
    ScalingRow row;
    row.axis_value = value;
    const std::size_t replicates = std::max<std::size_t>(options.replicates, 1);
    for (std::size_t rep = 0; rep < replicates; ++rep) {
      spec.seed = options.base.seed + rep;
      const Dataset ds = generate_synthetic(spec);
      cfg.k = ds.k;
      cfg.seed = spec.seed;

      double offline = std::numeric_limits<double>::infinity();
      double online = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < std::max<std::size_t>(options.repeats, 1); ++r) {
        const Representations reps = prepare_representations(ds, cfg);
        const ClusterResult result = cluster_representations(reps, ds.k, cfg, cfg.seed);
        offline = std::min(offline, reps.offline_seconds);
        online = std::min(online, result.online_seconds);
        if (rep == 0) {
          row.n = ds.rows();
          row.m = ds.cols();
          row.vocab_size = reps.vocab.size();
          row.queries = reps.enrichment ? reps.enrichment->queries : 0;
        }
      }
      row.offline_seconds += offline / static_cast<double>(replicates);
      row.online_seconds += online / static_cast<double>(replicates);
    }
    rows.push_back(row);
  }
  return rows;
}

std::string scaling_csv(ScalingAxis axis, const std::vector<ScalingRow>& rows) {
  std::ostringstream out;
  out << "axis,axis_value,n,m,vocab_size,queries,offline_seconds,online_seconds\n";
  out.precision(6);
  out << std::fixed;
  for (const auto& r : rows) {
    out << to_string(axis) << ',' << r.axis_value << ',' << r.n << ',' << r.m << ','
        << r.vocab_size << ',' << r.queries << ',' << r.offline_seconds << ','
        << r.online_seconds << '\n';
  }
  return out.str();
}

} // namespace arise
