#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "arise/encoding.hpp"

namespace arise {

using Labels = std::vector<std::uint32_t>;

/// Column-wise z-score with population standard deviation. Columns whose
/// deviation is below 1e-12 become all zeros. Requires N >= 2.
Matrix zscore_normalize(const Matrix& x);

/// Z = (1 - alpha) * anchor  ++  alpha * semantic, column-concatenated.
struct FusedRepresentation {
  Matrix z;
  double alpha = 0.0;
  std::size_t anchor_dim = 0;   // columns [0, anchor_dim)
  std::size_t semantic_dim = 0; // columns [anchor_dim, anchor_dim + semantic_dim)
};

FusedRepresentation fuse(const Matrix& anchor_hat, const Matrix& semantic_hat,
                         double alpha);

enum class SilhouetteMode { exact, subsample };

struct SilhouetteOptions {
  SilhouetteMode mode = SilhouetteMode::subsample;
  std::size_t sample_size = 2000; // used only when N exceeds it
  std::uint64_t seed = 0;
};

/// Mean silhouette with Euclidean distance. Points alone in their cluster
/// score 0. Returns nullopt for a degenerate partition (fewer than two
/// non-empty clusters among the points considered).
std::optional<double> silhouette(const Matrix& z, std::span<const std::uint32_t> labels,
                                 const SilhouetteOptions& options = {SilhouetteMode::exact});

struct KMeansOptions {
  std::size_t max_iter = 300;
  double tol = 1e-4; // largest centroid move (Euclidean) that counts as converged
};

struct KMeansResult {
  Labels labels;
  Matrix centroids;             // K x D
  double inertia = 0.0;               // sum of squared distances to own centroid
  std::vector<double> inertia_history; // after every Lloyd update
  std::size_t iterations = 0;
  bool converged = false;
};

/// Lloyd iterations from k-means++ seeding. Distance ties go to the lowest
/// centroid index; an emptied cluster takes over the point farthest from
/// its centroid. Deterministic in (z, k, seed).
KMeansResult kmeans(const Matrix& z, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options = {});

/// 0.0, 0.1, ..., 1.0
std::vector<double> default_alpha_grid();

struct FusionConfig {
  std::vector<double> alphas = default_alpha_grid();
  KMeansOptions kmeans;
  SilhouetteOptions silhouette;
  std::size_t parallelism = 1;
};

struct AlphaCandidate {
  double alpha = 0.0;
  std::optional<double> silhouette; // nullopt = degenerate partition
  double inertia = 0.0;
  std::uint64_t seed = 0;
  KMeansResult clustering;
};

struct AlphaSearchTrace {
  std::vector<AlphaCandidate> candidates;
  std::size_t selected = 0;

  double alpha_star() const { return candidates.at(selected).alpha; }
};

/// Evaluates every alpha in grid order and keeps the first strict maximum of
/// the silhouette. Throws SelectionError if every candidate is degenerate.
AlphaSearchTrace select_alpha(const Matrix& anchor_hat, const Matrix& semantic_hat,
                              std::size_t k, const FusionConfig& config, std::uint64_t seed);

} // namespace arise
