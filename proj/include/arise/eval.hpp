#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "arise/config.hpp"
#include "arise/dataset.hpp"

namespace arise {

/// Adjusted Rand index from the contingency table. Two trivial partitions
/// with a zero denominator score 1.
double ari(std::span<const std::uint32_t> truth, std::span<const std::uint32_t> pred);

/// Mutual information over the arithmetic mean of the two entropies. Both
/// partitions constant scores 1.
double nmi(std::span<const std::uint32_t> truth, std::span<const std::uint32_t> pred);

/// Best accuracy over one-to-one maps from predicted clusters to classes.
double acc(std::span<const std::uint32_t> truth, std::span<const std::uint32_t> pred);

/// Minimum-cost perfect matching on a square cost matrix (row-major n x n).
/// Returns the column assigned to every row.
std::vector<std::size_t> hungarian(std::span<const double> cost, std::size_t n);

struct TrialMetrics {
  std::uint64_t seed = 0;
  double ari = 0.0;
  double nmi = 0.0;
  double acc = 0.0;
  double alpha_star = 0.0;
};

struct Aggregate {
  double mean = 0.0;
  double std = 0.0; // population
};

Aggregate aggregate(std::span<const double> values);

struct MetricsReport {
  std::string dataset;
  std::vector<TrialMetrics> trials;
  Aggregate ari, nmi, acc;
  double seconds = 0.0;

  /// Recomputes the aggregates from `trials`.
  void finalize();
  nlohmann::json to_json() const;
};

/// Scores one partition against labels.
TrialMetrics score(std::span<const std::uint32_t> truth, std::span<const std::uint32_t> pred,
                   std::uint64_t seed = 0);

/// Prepares the views once, then clusters and scores once per seed in
/// `cfg.seeds`. Throws ConfigError when the dataset has no labels.
MetricsReport run_trials(const Dataset& ds, const RunConfig& cfg);

} // namespace arise
