#include <doctest.h>

#include <cmath>
#include <random>

#include "arise/error.hpp"
#include "arise/fusion.hpp"
#include "oracles.hpp"

using namespace arise;

namespace {

Matrix column(std::initializer_list<double> v) {
  Matrix m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

Matrix random_points(std::mt19937_64& rng, std::size_t n, std::size_t d) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double shift = static_cast<double>(i % 3) * 4.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = g(rng) + shift;
  }
  return m;
}

std::vector<std::vector<double>> rows_of(const Matrix& m) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out[static_cast<std::size_t>(i)].assign(m.row(i).data(), m.row(i).data() + m.cols());
  }
  return out;
}

} // namespace

TEST_CASE("zscore: worked columns") {
  Matrix x(2, 2);
  x << 1, 5, 3, 5;
  const Matrix z = zscore_normalize(x);
  CHECK(z(0, 0) == doctest::Approx(-1.0));
  CHECK(z(1, 0) == doctest::Approx(1.0));
  CHECK(z(0, 1) == 0.0);
  CHECK(z(1, 1) == 0.0);
  CHECK_THROWS_AS(zscore_normalize(column({1.0})), ContractViolation);
}

TEST_CASE("property: zscore gives zero means, unit deviations and is idempotent") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 30; ++t) {
    Matrix x = random_points(rng, 2 + rng() % 30, 1 + rng() % 6) * 7.0;
    x.col(0).setConstant(2.0);
    const Matrix z = zscore_normalize(x);
    for (Eigen::Index c = 0; c < z.cols(); ++c) {
      const double mean = z.col(c).mean();
      CHECK(std::abs(mean) <= 1e-9);
      const double sd = std::sqrt((z.col(c).array() - mean).square().mean());
      if (c == 0) {
        CHECK(sd == 0.0);
      } else {
        CHECK(std::abs(sd - 1.0) <= 1e-9);
      }
    }
    CHECK((zscore_normalize(z) - z).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("fuse: boundaries and scaling") {
  const Matrix a = column({2.0, 1.0});
  const Matrix s = column({4.0, 3.0});
  const auto f0 = fuse(a, s, 0.0);
  CHECK(f0.z.cols() == 2);
  CHECK(f0.z(0, 0) == 2.0);
  CHECK(f0.z(0, 1) == 0.0);
  const auto f1 = fuse(a, s, 1.0);
  CHECK(f1.z(0, 0) == 0.0);
  CHECK(f1.z(0, 1) == 4.0);
  const auto h = fuse(a, s, 0.5);
  CHECK(h.z(0, 0) == 1.0);
  CHECK(h.z(0, 1) == 2.0);
  CHECK(h.anchor_dim == 1);
  CHECK(h.semantic_dim == 1);

  CHECK_THROWS_AS(fuse(a, s, 1.5), ContractViolation);
  CHECK_THROWS_AS(fuse(a, s, -0.1), ContractViolation);
  CHECK_THROWS_AS(fuse(a, column({1.0, 2.0, 3.0}), 0.5), ShapeError);
}

TEST_CASE("silhouette: worked example") {
  const Matrix z = column({0, 1, 10, 11});
  const Labels l{0, 0, 1, 1};
  const auto s = silhouette(z, l);
  REQUIRE(s);
  CHECK(std::abs(*s - 0.899749373) <= 1e-6);
}

TEST_CASE("silhouette: singletons score zero; one cluster is degenerate") {
  CHECK(*silhouette(column({0, 1}), Labels{0, 1}) == 0.0);
  CHECK_FALSE(silhouette(column({0, 1, 2}), Labels{4, 4, 4}).has_value());
}

TEST_CASE("property: silhouette matches the brute-force oracle") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng() % 60, d = 1 + rng() % 5, k = 2 + rng() % 4;
    const Matrix z = random_points(rng, n, d);
    Labels l(n);
    for (auto& v : l) v = static_cast<std::uint32_t>(rng() % k);
    if (std::all_of(l.begin(), l.end(), [&](auto v) { return v == l[0]; })) l[0] = l[0] + 1;
    const auto s = silhouette(z, l);
    REQUIRE(s);
    CHECK(std::abs(*s - oracle::silhouette(rows_of(z), l)) <= 1e-9);
  }
}

TEST_CASE("silhouette: subsampling is deterministic and exact mode ignores the cap") {
  std::mt19937_64 rng(9);
  const Matrix z = random_points(rng, 300, 3);
  Labels l(300);
  for (std::size_t i = 0; i < l.size(); ++i) l[i] = static_cast<std::uint32_t>(i % 3);
  SilhouetteOptions sub{SilhouetteMode::subsample, 50, 42};
  const auto a = silhouette(z, l, sub);
  const auto b = silhouette(z, l, sub);
  CHECK(*a == *b);
  sub.seed = 43;
  CHECK(*silhouette(z, l, sub) != *a);
  const SilhouetteOptions exact{SilhouetteMode::exact, 50, 42};
  CHECK(*silhouette(z, l, exact) == *silhouette(z, l));
}

TEST_CASE("kmeans: two separated groups") {
  const Matrix z = column({0.0, 0.1, 10.0, 10.1});
  const auto r = kmeans(z, 2, 1);
  CHECK(r.labels[0] == r.labels[1]);
  CHECK(r.labels[2] == r.labels[3]);
  CHECK(r.labels[0] != r.labels[2]);
  CHECK(r.inertia == doctest::Approx(0.01).epsilon(1e-9));
  std::vector<double> c{r.centroids(0, 0), r.centroids(1, 0)};
  std::sort(c.begin(), c.end());
  CHECK(c[0] == doctest::Approx(0.05));
  CHECK(c[1] == doctest::Approx(10.05));
  CHECK(r.converged);
}

TEST_CASE("kmeans: N = K gives zero inertia; N < K is rejected") {
  const Matrix z = column({1, 5, 9});
  CHECK(kmeans(z, 3, 0).inertia == 0.0);
  CHECK_THROWS_AS(kmeans(z, 4, 0), ContractViolation);
}

TEST_CASE("kmeans: duplicate rows share a cluster; all clusters are non-empty") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 40; ++t) {
    Matrix z = random_points(rng, 20, 2);
    z.row(5) = z.row(6);
    z.row(10) = z.row(11);
    const std::size_t k = 2 + rng() % 5;
    const auto r = kmeans(z, k, rng());
    CHECK(r.labels[5] == r.labels[6]);
    CHECK(r.labels[10] == r.labels[11]);
    std::vector<int> count(k, 0);
    for (auto v : r.labels) {
      REQUIRE(v < k);
      ++count[v];
    }
    for (int c : count) CHECK(c > 0);
  }
}

TEST_CASE("kmeans: heavy duplication still yields K non-empty clusters") {
  Matrix z(6, 1);
  z << 0, 0, 0, 0, 0, 1;
  const auto r = kmeans(z, 3, 0);
  std::vector<int> count(3, 0);
  for (auto v : r.labels) ++count[v];
  for (int c : count) CHECK(c > 0);
}

TEST_CASE("property: kmeans inertia never increases and runs are reproducible") {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 50; ++t) {
    const Matrix z = random_points(rng, 10 + rng() % 80, 1 + rng() % 4);
    const std::size_t k = 2 + rng() % 5;
    const std::uint64_t seed = rng();
    const auto r = kmeans(z, k, seed);
    for (std::size_t i = 1; i < r.inertia_history.size(); ++i) {
      CHECK(r.inertia_history[i] <= r.inertia_history[i - 1] + 1e-9);
    }
    CHECK(r.inertia >= 0.0);
    const auto again = kmeans(z, k, seed);
    CHECK(again.labels == r.labels);
    CHECK(again.inertia == r.inertia);
  }
}

TEST_CASE("select_alpha: grid {0} reduces to k-Means on the anchor view") {
  std::mt19937_64 rng(17);
  const Matrix a = zscore_normalize(random_points(rng, 40, 3));
  const Matrix s = zscore_normalize(random_points(rng, 40, 2));
  FusionConfig cfg;
  cfg.alphas = {0.0};
  const auto trace = select_alpha(a, s, 3, cfg, 7);
  CHECK(trace.alpha_star() == 0.0);
  CHECK(trace.candidates.size() == 1);
  CHECK(trace.candidates[0].clustering.labels == kmeans(a, 3, 7).labels);
}

TEST_CASE("select_alpha: equal scores keep the earliest candidate") {
  std::mt19937_64 rng(19);
  const Matrix a = zscore_normalize(random_points(rng, 30, 2));
  FusionConfig cfg;
  cfg.alphas = {0.3, 0.7};
  // Identical views make Z at 0.3 and 0.7 proportional, so silhouettes tie.
  const auto trace = select_alpha(a, a, 3, cfg, 1);
  REQUIRE(trace.candidates[0].silhouette);
  CHECK(std::abs(*trace.candidates[0].silhouette - *trace.candidates[1].silhouette) < 1e-12);
  CHECK(trace.alpha_star() == 0.3);
}

TEST_CASE("select_alpha: an informative semantic view pulls alpha above zero") {
  // Anchor: pure noise. Semantic: two clean groups.
  std::mt19937_64 rng(23);
  std::normal_distribution<double> g(0.0, 1.0);
  const std::size_t n = 60;
  Matrix anchor(n, 4), sem(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j < 4; ++j) anchor(i, j) = g(rng);
    const double c = i < n / 2 ? -3.0 : 3.0;
    sem(i, 0) = c + 0.1 * g(rng);
    sem(i, 1) = c + 0.1 * g(rng);
  }
  FusionConfig cfg;
  const auto trace = select_alpha(zscore_normalize(anchor), zscore_normalize(sem), 2, cfg, 3);
  CHECK(trace.alpha_star() > 0.0);
  // Exhaustive check: the selected candidate attains the maximum.
  double best = -2;
  for (const auto& c : trace.candidates) best = std::max(best, c.silhouette.value_or(-2));
  CHECK(*trace.candidates[trace.selected].silhouette == best);
}

TEST_CASE("select_alpha: parallel evaluation matches sequential") {
  std::mt19937_64 rng(29);
  const Matrix a = zscore_normalize(random_points(rng, 50, 3));
  const Matrix s = zscore_normalize(random_points(rng, 50, 4));
  FusionConfig seq, par;
  par.parallelism = 4;
  const auto t1 = select_alpha(a, s, 3, seq, 5);
  const auto t2 = select_alpha(a, s, 3, par, 5);
  REQUIRE(t1.candidates.size() == t2.candidates.size());
  for (std::size_t i = 0; i < t1.candidates.size(); ++i) {
    CHECK(t1.candidates[i].silhouette == t2.candidates[i].silhouette);
    CHECK(t1.candidates[i].clustering.labels == t2.candidates[i].clustering.labels);
  }
  CHECK(t1.selected == t2.selected);
}

TEST_CASE("select_alpha: errors") {
  const Matrix a = column({0, 0, 0});
  FusionConfig cfg;
  cfg.alphas = {};
  CHECK_THROWS_AS(select_alpha(a, a, 2, cfg, 0), ConfigError);
  cfg.alphas = {1.2};
  CHECK_THROWS_AS(select_alpha(a, a, 2, cfg, 0), ContractViolation);
  // One cluster everywhere leaves every candidate without a silhouette.
  cfg.alphas = {0.0, 1.0};
  CHECK_THROWS_AS(select_alpha(column({0, 1, 2}), column({3, 4, 5}), 1, cfg, 0), SelectionError);
}

TEST_CASE("default grid has eleven evenly spaced values") {
  const auto g = default_alpha_grid();
  REQUIRE(g.size() == 11);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 1.0);
  CHECK(g[3] == doctest::Approx(0.3));
}
