#include "arise/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>

#include "arise/error.hpp"
#include "arise/random.hpp"

namespace arise {
namespace {

using Index = Eigen::Index;

double squared_distance(const Matrix& a, Index i, const Matrix& b, Index j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

std::vector<std::size_t> silhouette_points(std::size_t n, const SilhouetteOptions& options) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (options.mode == SilhouetteMode::exact || n <= options.sample_size) return idx;
  // Partial Fisher-Yates; sorted so the reduction order does not depend on
  // the draw order.
  Rng rng(options.seed);
  for (std::size_t i = 0; i < options.sample_size; ++i) {
    std::swap(idx[i], idx[i + rng.index(n - i)]);
  }
  idx.resize(options.sample_size);
  std::sort(idx.begin(), idx.end());
  return idx;
}

// k-means++: first centre uniform, then proportional to squared distance
// from the nearest chosen centre.
Matrix plus_plus_init(const Matrix& z, std::size_t k, Rng& rng) {
  const Index n = z.rows();
  Matrix centroids(static_cast<Index>(k), z.cols());
  std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  Index chosen = static_cast<Index>(rng.index(static_cast<std::uint64_t>(n)));
  for (std::size_t c = 0; c < k; ++c) {
    if (c > 0) {
      double total = 0.0;
      for (double v : d2) total += v;
      if (total <= 0.0) {
        chosen = static_cast<Index>(rng.index(static_cast<std::uint64_t>(n)));
      } else {
        const double target = rng.uniform() * total;
        double cumulative = 0.0;
        chosen = -1;
        for (Index i = 0; i < n; ++i) {
          if (d2[static_cast<std::size_t>(i)] <= 0.0) continue;
          cumulative += d2[static_cast<std::size_t>(i)];
          chosen = i;
          if (cumulative > target) break;
        }
      }
    }
    centroids.row(static_cast<Index>(c)) = z.row(chosen);
    for (Index i = 0; i < n; ++i) {
      auto& d = d2[static_cast<std::size_t>(i)];
      d = std::min(d, squared_distance(z, i, centroids, static_cast<Index>(c)));
    }
  }
  return centroids;
}

} // namespace

Matrix zscore_normalize(const Matrix& x) {
  const Index n = x.rows();
  if (n < 2) throw ContractViolation(Stage::fusion, "z-score normalization needs N >= 2 rows");
  Matrix out(n, x.cols());
  for (Index c = 0; c < x.cols(); ++c) {
    const auto col = x.col(c);
    const double mean = col.sum() / static_cast<double>(n);
    const double var = (col.array() - mean).square().sum() / static_cast<double>(n);
    const double sd = std::sqrt(var);
    if (sd < 1e-12) {
      out.col(c).setZero();
    } else {
      out.col(c) = (col.array() - mean) / sd;
    }
  }
  return out;
}

FusedRepresentation fuse(const Matrix& anchor_hat, const Matrix& semantic_hat, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ContractViolation(Stage::fusion, "alpha " + std::to_string(alpha) + " lies outside [0, 1]");
  }
  if (anchor_hat.rows() != semantic_hat.rows()) {
    throw ShapeError(Stage::fusion, "anchor has " + std::to_string(anchor_hat.rows()) +
                                        " rows but semantic has " +
                                        std::to_string(semantic_hat.rows()));
  }
  FusedRepresentation f;
  f.alpha = alpha;
  f.anchor_dim = static_cast<std::size_t>(anchor_hat.cols());
  f.semantic_dim = static_cast<std::size_t>(semantic_hat.cols());
  f.z.resize(anchor_hat.rows(), anchor_hat.cols() + semantic_hat.cols());
  f.z.leftCols(anchor_hat.cols()) = (1.0 - alpha) * anchor_hat;
  f.z.rightCols(semantic_hat.cols()) = alpha * semantic_hat;
  return f;
}

std::optional<double> silhouette(const Matrix& z, std::span<const std::uint32_t> labels,
                                 const SilhouetteOptions& options) {
  const std::size_t n = static_cast<std::size_t>(z.rows());
  if (labels.size() != n) {
    throw ShapeError(Stage::fusion, "silhouette: " + std::to_string(labels.size()) +
                                        " labels for " + std::to_string(n) + " rows");
  }
  const std::vector<std::size_t> pts = silhouette_points(n, options);
  const std::size_t p = pts.size();
  if (p == 0) return std::nullopt;

  // Compact cluster ids among the considered points.
  std::uint32_t max_label = 0;
  for (std::size_t i : pts) max_label = std::max(max_label, labels[i]);
  std::vector<std::size_t> counts(max_label + 1, 0);
  for (std::size_t i : pts) ++counts[labels[i]];
  const auto nonempty = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; });
  if (nonempty < 2) return std::nullopt;

  // sums(a, c): total distance from point a to the points of cluster c.
  const std::size_t nc = counts.size();
  std::vector<double> sums(p * nc, 0.0);
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = a + 1; b < p; ++b) {
      const double d = std::sqrt(squared_distance(z, static_cast<Index>(pts[a]), z,
                                                  static_cast<Index>(pts[b])));
      sums[a * nc + labels[pts[b]]] += d;
      sums[b * nc + labels[pts[a]]] += d;
    }
  }

  double total = 0.0;
  for (std::size_t a = 0; a < p; ++a) {
    const std::uint32_t own = labels[pts[a]];
    if (counts[own] <= 1) continue; // singleton: s = 0
    const double intra = sums[a * nc + own] / static_cast<double>(counts[own] - 1);
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < nc; ++c) {
      if (c == own || counts[c] == 0) continue;
      nearest = std::min(nearest, sums[a * nc + c] / static_cast<double>(counts[c]));
    }
    const double denom = std::max(intra, nearest);
    if (denom > 0.0) total += (nearest - intra) / denom;
  }
  return total / static_cast<double>(p);
}

KMeansResult kmeans(const Matrix& z, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options) {
  const std::size_t n = static_cast<std::size_t>(z.rows());
  if (k < 1 || n < k) {
    throw ContractViolation(Stage::fusion, "k-means needs 1 <= K <= N (K = " + std::to_string(k) +
                                               ", N = " + std::to_string(n) + ")");
  }
  Rng rng(seed);
  KMeansResult r;
  r.centroids = plus_plus_init(z, k, rng);
  r.labels.assign(n, 0);
  std::vector<double> d2(n);
  std::vector<std::size_t> counts(k);
  Matrix sums(static_cast<Index>(k), z.cols());

  for (std::size_t it = 0; it < options.max_iter; ++it) {
    // Assignment.
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::uint32_t arg = 0;
      for (std::size_t c = 0; c < k; ++c) {
        const double d = squared_distance(z, static_cast<Index>(i), r.centroids, static_cast<Index>(c));
        if (d < best) {
          best = d;
          arg = static_cast<std::uint32_t>(c);
        }
      }
      r.labels[i] = arg;
      d2[i] = best;
      ++counts[arg];
    }
    // Empty-cluster repair: hand the farthest point to the empty centroid.
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[r.labels[i]] <= 1) continue;
        if (far == n || d2[i] > d2[far]) far = i;
      }
      if (far == n) break; // every point is alone already
      --counts[r.labels[far]];
      r.labels[far] = static_cast<std::uint32_t>(c);
      ++counts[c];
      d2[far] = 0.0;
      r.centroids.row(static_cast<Index>(c)) = z.row(static_cast<Index>(far));
    }
    // Update.
    sums.setZero();
    for (std::size_t i = 0; i < n; ++i) sums.row(r.labels[i]) += z.row(static_cast<Index>(i));
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      const auto mean = sums.row(static_cast<Index>(c)) / static_cast<double>(counts[c]);
      shift = std::max(shift, (mean - r.centroids.row(static_cast<Index>(c))).norm());
      r.centroids.row(static_cast<Index>(c)) = mean;
    }
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      inertia += squared_distance(z, static_cast<Index>(i), r.centroids, r.labels[i]);
    }
    r.inertia_history.push_back(inertia);
    r.inertia = inertia;
    r.iterations = it + 1;
    if (shift < options.tol) {
      r.converged = true;
      break;
    }
  }
  return r;
}

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
  return grid;
}

AlphaSearchTrace select_alpha(const Matrix& anchor_hat, const Matrix& semantic_hat,
                              std::size_t k, const FusionConfig& config, std::uint64_t seed) {
  if (config.alphas.empty()) throw ConfigError(Stage::fusion, "alpha grid is empty");
  for (double a : config.alphas) {
    if (!(a >= 0.0 && a <= 1.0)) {
      throw ContractViolation(Stage::fusion, "alpha " + std::to_string(a) + " lies outside [0, 1]");
    }
  }

  auto evaluate = [&](double alpha) {
    AlphaCandidate c;
    c.alpha = alpha;
    c.seed = seed;
    const FusedRepresentation f = fuse(anchor_hat, semantic_hat, alpha);
    c.clustering = kmeans(f.z, k, seed, config.kmeans);
    c.inertia = c.clustering.inertia;
    c.silhouette = silhouette(f.z, c.clustering.labels, config.silhouette);
    return c;
  };

  AlphaSearchTrace trace;
  trace.candidates.reserve(config.alphas.size());
  const std::size_t workers = std::max<std::size_t>(config.parallelism, 1);
  for (std::size_t begin = 0; begin < config.alphas.size(); begin += workers) {
    const std::size_t end = std::min(begin + workers, config.alphas.size());
    if (workers == 1) {
      trace.candidates.push_back(evaluate(config.alphas[begin]));
      continue;
    }
    std::vector<std::future<AlphaCandidate>> batch;
    for (std::size_t g = begin; g < end; ++g) {
      batch.push_back(std::async(std::launch::async, evaluate, config.alphas[g]));
    }
    for (auto& f : batch) trace.candidates.push_back(f.get());
  }

  std::optional<std::size_t> best;
  for (std::size_t g = 0; g < trace.candidates.size(); ++g) {
    const auto& s = trace.candidates[g].silhouette;
    if (!s) continue;
    if (!best || *s > *trace.candidates[*best].silhouette) best = g;
  }
  if (!best) {
    throw SelectionError(Stage::fusion, "every alpha candidate produced a degenerate partition");
  }
  trace.selected = *best;
  return trace;
}

} // namespace arise
