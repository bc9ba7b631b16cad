#include "arise/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>

#include "arise/error.hpp"
#include "arise/pipeline.hpp"

namespace arise {
namespace {

struct Contingency {
  std::size_t rows = 0; // distinct truth labels
  std::size_t cols = 0; // distinct predicted labels
  std::vector<double> counts; // rows x cols
  std::vector<double> row_sums, col_sums;
  double n = 0.0;

  double at(std::size_t i, std::size_t j) const { return counts[i * cols + j]; }
};

std::vector<std::size_t> compact(std::span<const std::uint32_t> labels, std::size_t& distinct) {
  std::vector<std::size_t> remap;
  std::vector<std::size_t> out(labels.size());
  const std::uint32_t top = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end());
  remap.assign(static_cast<std::size_t>(top) + 1, SIZE_MAX);
  distinct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto& slot = remap[labels[i]];
    if (slot == SIZE_MAX) slot = distinct++;
    out[i] = slot;
  }
  return out;
}

Contingency contingency(std::span<const std::uint32_t> truth, std::span<const std::uint32_t> pred,
                        const char* metric) {
  if (truth.size() != pred.size()) {
    throw ContractViolation(Stage::eval, std::string(metric) + ": label vectors differ in length (" +
                                             std::to_string(truth.size()) + " vs " +
                                             std::to_string(pred.size()) + ")");
  }
  Contingency c;
  const auto t = compact(truth, c.rows);
  const auto p = compact(pred, c.cols);
  c.counts.assign(c.rows * c.cols, 0.0);
  c.row_sums.assign(c.rows, 0.0);
  c.col_sums.assign(c.cols, 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    c.counts[t[i] * c.cols + p[i]] += 1.0;
    c.row_sums[t[i]] += 1.0;
    c.col_sums[p[i]] += 1.0;
  }
  c.n = static_cast<double>(truth.size());
  return c;
}

double pairs(double x) { return x * (x - 1.0) / 2.0; }

double entropy(const std::vector<double>& sums, double n) {
  double h = 0.0;
  for (double s : sums) {
    if (s > 0.0) h -= (s / n) * std::log(s / n);
  }
  return h;
}

} // namespace

double ari(std::span<const std::uint32_t> truth, std::span<const std::uint32_t> pred) {
  const Contingency c = contingency(truth, pred, "ARI");
  if (c.n < 2.0) throw ContractViolation(Stage::eval, "ARI needs at least two points");
  double index = 0.0;
  for (double v : c.counts) index += pairs(v);
  double a = 0.0, b = 0.0;
  for (double v : c.row_sums) a += pairs(v);
  for (double v : c.col_sums) b += pairs(v);
  const double expected = a * b / pairs(c.n);
  const double max_index = (a + b) / 2.0;
  const double denom = max_index - expected;
  if (denom == 0.0) return 1.0;
  return (index - expected) / denom;
}

double nmi(std::span<const std::uint32_t> truth, std::span<const std::uint32_t> pred) {
  const Contingency c = contingency(truth, pred, "NMI");
  if (c.n == 0.0) throw ContractViolation(Stage::eval, "NMI needs at least one point");
  if (c.rows == 1 && c.cols == 1) return 1.0;
  double mi = 0.0;
  for (std::size_t i = 0; i < c.rows; ++i) {
    for (std::size_t j = 0; j < c.cols; ++j) {
      const double nij = c.at(i, j);
      if (nij == 0.0) continue;
      mi += (nij / c.n) * std::log(c.n * nij / (c.row_sums[i] * c.col_sums[j]));
    }
  }
  const double denom = (entropy(c.row_sums, c.n) + entropy(c.col_sums, c.n)) / 2.0;
  if (denom <= 0.0) return 1.0;
  return std::clamp(mi / denom, 0.0, 1.0);
}

double acc(std::span<const std::uint32_t> truth, std::span<const std::uint32_t> pred) {
  const Contingency c = contingency(truth, pred, "ACC");
  if (c.n == 0.0) throw ContractViolation(Stage::eval, "ACC needs at least one point");
  // Square cost matrix, predicted clusters as rows; padding cells cost 0.
  const std::size_t s = std::max(c.rows, c.cols);
  std::vector<double> cost(s * s, 0.0);
  for (std::size_t j = 0; j < c.cols; ++j) {
    for (std::size_t i = 0; i < c.rows; ++i) cost[j * s + i] = -c.at(i, j);
  }
  const auto match = hungarian(cost, s);
  double hits = 0.0;
  for (std::size_t r = 0; r < s; ++r) hits -= cost[r * s + match[r]];
  return hits / c.n;
}

std::vector<std::size_t> hungarian(std::span<const double> cost, std::size_t n) {
  if (cost.size() != n * n) {
    throw ContractViolation(Stage::eval, "assignment cost matrix is not n x n");
  }
  // Shortest augmenting paths with row/column potentials; 1-based with a
  // virtual column 0.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n, 0);
  for (std::size_t j = 1; j <= n; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

Aggregate aggregate(std::span<const double> values) {
  Aggregate a;
  if (values.empty()) return a;
  const double n = static_cast<double>(values.size());
  a.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - a.mean) * (v - a.mean);
  a.std = std::sqrt(ss / n);
  return a;
}

void MetricsReport::finalize() {
  std::vector<double> a, n, c;
  for (const auto& t : trials) {
    a.push_back(t.ari);
    n.push_back(t.nmi);
    c.push_back(t.acc);
  }
  ari = aggregate(a);
  nmi = aggregate(n);
  acc = aggregate(c);
}

nlohmann::json MetricsReport::to_json() const {
  auto agg = [](const Aggregate& a) { return nlohmann::json{{"mean", a.mean}, {"std", a.std}}; };
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& t : trials) {
    rows.push_back({{"seed", t.seed}, {"ari", t.ari}, {"nmi", t.nmi}, {"acc", t.acc},
                    {"alpha_star", t.alpha_star}});
  }
  return {{"dataset", dataset},
          {"trials", rows},
          {"count", trials.size()},
          {"ari", agg(ari)},
          {"nmi", agg(nmi)},
          {"acc", agg(acc)},
          {"nmi_normalization", "arithmetic"},
          {"std", "population"}};
}

TrialMetrics score(std::span<const std::uint32_t> truth, std::span<const std::uint32_t> pred,
                   std::uint64_t seed) {
  TrialMetrics t;
  t.seed = seed;
  t.ari = ari(truth, pred);
  t.nmi = nmi(truth, pred);
  t.acc = acc(truth, pred);
  return t;
}

MetricsReport run_trials(const Dataset& ds, const RunConfig& cfg) {
  if (!ds.labels) {
    throw ConfigError(Stage::eval, "dataset '" + ds.name + "' has no labels; pass --label-column");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const Representations reps = prepare_representations(ds, cfg);

  RunConfig inner = cfg;
  const std::size_t workers = std::max<std::size_t>(cfg.parallelism, 1);
  if (workers > 1) inner.parallelism = 1;
  auto trial = [&](std::uint64_t seed) {
    const ClusterResult r = cluster_representations(reps, ds.k, inner, seed);
    TrialMetrics t = score(*ds.labels, r.final.labels, seed);
    t.alpha_star = r.alpha_star();
    return t;
  };

  MetricsReport report;
  report.dataset = ds.name;
  for (std::size_t begin = 0; begin < cfg.seeds.size(); begin += workers) {
    const std::size_t end = std::min(begin + workers, cfg.seeds.size());
    if (workers == 1) {
      report.trials.push_back(trial(cfg.seeds[begin]));
      continue;
    }
    std::vector<std::future<TrialMetrics>> batch;
    for (std::size_t s = begin; s < end; ++s) {
      batch.push_back(std::async(std::launch::async, trial, cfg.seeds[s]));
    }
    for (auto& f : batch) report.trials.push_back(f.get());
  }
  report.finalize();
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

} // namespace arise
