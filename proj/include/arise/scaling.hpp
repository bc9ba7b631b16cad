#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "arise/dataset.hpp"

namespace arise {

/// Planted-partition categorical data: each class has a prototype value per
/// attribute, and every cell keeps it with probability 1 - noise.
struct SyntheticSpec {
  std::size_t n = 1000;
  std::size_t m = 8;
  std::size_t cardinality = 5;
  std::size_t k = 4;
  double noise = 0.3;
  std::uint64_t seed = 0;
};

Dataset generate_synthetic(const SyntheticSpec& spec);

enum class ScalingAxis { n, m, vocab };

ScalingAxis parse_scaling_axis(std::string_view s);
std::string_view to_string(ScalingAxis a) noexcept;

struct ScalingOptions {
  ScalingAxis axis = ScalingAxis::n;
  std::vector<std::size_t> values = {1000, 2000, 4000};
  SyntheticSpec base;
  std::vector<double> alphas = {0.0, 0.5, 1.0};
  std::size_t stub_dim = 16;
  std::size_t silhouette_sample = 500;
  std::size_t max_iter = 300;
  double tol = 1e-4;
  std::size_t repeats = 3;    // fastest repeat per dataset is kept
  std::size_t replicates = 5; // datasets per point (seeds base.seed + r); times are averaged
};

struct ScalingRow {
  std::size_t axis_value = 0;
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t vocab_size = 0;
  std::size_t queries = 0;
  double offline_seconds = 0.0;
  double online_seconds = 0.0;
};

/// Runs the stub LLM and stub encoder end to end at every axis value. The
/// structural columns (n, m, vocab_size, queries) come from the first replicate.
std::vector<ScalingRow> run_scaling_sweep(const ScalingOptions& options);

std::string scaling_csv(ScalingAxis axis, const std::vector<ScalingRow>& rows);

} // namespace arise
