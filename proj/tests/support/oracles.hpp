#pragma once

// Brute-force reference implementations used to check the library. They
// share no code with src/ and favour obviousness over speed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <vector>

namespace oracle {

using Labels = std::vector<std::uint32_t>;

// Rand-style pair counting over all i < j.
inline double ari(const Labels& t, const Labels& p) {
  const std::size_t n = t.size();
  double both = 0, same_t = 0, same_p = 0, total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool a = t[i] == t[j];
      const bool b = p[i] == p[j];
      both += (a && b);
      same_t += a;
      same_p += b;
      total += 1;
    }
  }
  const double expected = same_t * same_p / total;
  const double mx = (same_t + same_p) / 2;
  if (mx - expected == 0) return 1.0;
  return (both - expected) / (mx - expected);
}

// Entropies and mutual information from explicit probability tables.
inline double nmi(const Labels& t, const Labels& p) {
  const double n = static_cast<double>(t.size());
  std::map<std::uint32_t, double> pt, pp;
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> joint;
  for (std::size_t i = 0; i < t.size(); ++i) {
    pt[t[i]] += 1 / n;
    pp[p[i]] += 1 / n;
    joint[{t[i], p[i]}] += 1 / n;
  }
  if (pt.size() == 1 && pp.size() == 1) return 1.0;
  double ht = 0, hp = 0, mi = 0;
  for (auto& [k, v] : pt) ht -= v * std::log(v);
  for (auto& [k, v] : pp) hp -= v * std::log(v);
  for (auto& [k, v] : joint) mi += v * std::log(v / (pt[k.first] * pp[k.second]));
  return mi / ((ht + hp) / 2);
}

// Every injective map from predicted clusters to classes (padded with
// dummy classes so the map always exists).
inline double acc(const Labels& t, const Labels& p) {
  std::set<std::uint32_t> ts(t.begin(), t.end()), ps(p.begin(), p.end());
  std::vector<std::uint32_t> tv(ts.begin(), ts.end()), pv(ps.begin(), ps.end());
  const std::size_t s = std::max(tv.size(), pv.size());
  std::vector<std::size_t> perm(s);
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t best = 0;
  do {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const std::size_t pi = static_cast<std::size_t>(std::find(pv.begin(), pv.end(), p[i]) - pv.begin());
      const std::size_t target = perm[pi];
      if (target < tv.size() && tv[target] == t[i]) ++hits;
    }
    best = std::max(best, hits);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(t.size());
}

// Direct per-point silhouette over rows of a dense point list.
inline double silhouette(const std::vector<std::vector<double>>& x, const Labels& l) {
  auto dist = [&](std::size_t i, std::size_t j) {
    double s = 0;
    for (std::size_t c = 0; c < x[i].size(); ++c) s += (x[i][c] - x[j][c]) * (x[i][c] - x[j][c]);
    return std::sqrt(s);
  };
  std::set<std::uint32_t> clusters(l.begin(), l.end());
  double total = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double a_sum = 0;
    int a_n = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (j != i && l[j] == l[i]) {
        a_sum += dist(i, j);
        ++a_n;
      }
    }
    if (a_n == 0) continue;
    const double a = a_sum / a_n;
    double b = std::numeric_limits<double>::infinity();
    for (auto c : clusters) {
      if (c == l[i]) continue;
      double s = 0;
      int m = 0;
      for (std::size_t j = 0; j < x.size(); ++j) {
        if (l[j] == c) {
          s += dist(i, j);
          ++m;
        }
      }
      b = std::min(b, s / m);
    }
    const double d = std::max(a, b);
    if (d > 0) total += (b - a) / d;
  }
  return total / static_cast<double>(x.size());
}

} // namespace oracle
