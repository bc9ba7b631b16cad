// Acceptance report: one PASS/FAIL line per criterion.
//   acceptance            run everything, exit 1 if any criterion fails
//   acceptance --only N   run criterion N alone

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "arise/bundle.hpp"
#include "arise/encoding.hpp"
#include "arise/eval.hpp"
#include "arise/fusion.hpp"
#include "arise/pipeline.hpp"
#include "arise/semantics.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace arise;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int shell(const std::string& cmd, std::string* out = nullptr) {
  FILE* p = popen((cmd + " 2>/dev/null").c_str(), "r");
  if (!p) return -1;
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, p)) > 0) {
    if (out) out->append(buf, got);
  }
  const int status = pclose(p);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

RunConfig zoo_baseline() {
  RunConfig cfg;
  cfg.dataset = testutil::data_path("zoo.csv");
  cfg.label_column = "type";
  cfg.k = 7;
  cfg.alphas = {0.0};
  cfg.encoder = EncoderMode::none;
  return cfg;
}

Outcome ohk_zoo() {
  const auto t0 = Clock::now();
  const RunConfig cfg = zoo_baseline();
  const MetricsReport r = run_trials(load_run_dataset(cfg), cfg);
  const double secs = since(t0);
  const bool ok = r.ari.mean >= 0.45 && r.ari.mean <= 0.75 && r.ari.std <= 0.20 && secs < 10.0;
  return {ok, fmt("Zoo alpha={0}, seeds 0..9: ARI %.4f +- %.4f (band [0.45, 0.75], std <= 0.20), %.2fs (< 10s)",
                  r.ari.mean, r.ari.std, secs)};
}

Outcome ablation_bc() {
  const auto t0 = Clock::now();
  RunConfig cfg;
  cfg.dataset = testutil::data_path("breast_cancer.csv");
  cfg.label_column = "recurrence";
  cfg.k = 2;
  cfg.domains = testutil::data_path("breast_cancer.domains.json");
  cfg.missing = MissingPolicy::mode;
  cfg.alphas = {0.0};
  cfg.encoder = EncoderMode::none;
  const MetricsReport r = run_trials(load_run_dataset(cfg), cfg);
  const double secs = since(t0);
  const bool ok = std::abs(r.ari.mean) <= 0.05 && secs < 10.0;
  return {ok, fmt("Breast Cancer alpha={0}, seeds 0..9: ARI %.4f +- %.4f (need |mean| <= 0.05), %.2fs (< 10s)",
                  r.ari.mean, r.ari.std, secs)};
}

Outcome fixture_end_to_end() {
  testutil::TempDir dir("accept-e2e");
  const DescriptionCache cache(testutil::data_path("fixtures/zoo_descriptions.jsonl"));
  write_stub_bundle(cache.records(), dir.file("bundle"), 64);

  const RunConfig base = zoo_baseline();
  const MetricsReport baseline = run_trials(load_run_dataset(base), base);

  RunConfig cfg = zoo_baseline();
  cfg.alphas = default_alpha_grid();
  cfg.encoder = EncoderMode::bundle;
  cfg.bundle = dir.file("bundle");
  const Dataset ds = load_run_dataset(cfg);
  const MetricsReport arise = run_trials(ds, cfg);

  bool in_grid = true;
  for (const auto& t : arise.trials) {
    in_grid &= std::find(cfg.alphas.begin(), cfg.alphas.end(), t.alpha_star) != cfg.alphas.end();
  }
  const ClusterResult one = run_arise(ds, cfg);
  const bool labels_ok = one.final.labels.size() == ds.rows() &&
                         std::all_of(one.final.labels.begin(), one.final.labels.end(),
                                     [&](auto l) { return l < cfg.k; });
  const double floor = baseline.ari.mean - 0.05;
  const bool ok = in_grid && labels_ok && arise.ari.mean >= floor;
  return {ok, fmt("fixture cache + stub bundle: ARI %.4f vs baseline %.4f - 0.05 = %.4f; alpha* in grid: %s; "
                  "labels valid: %s",
                  arise.ari.mean, baseline.ari.mean, floor, in_grid ? "yes" : "no", labels_ok ? "yes" : "no")};
}

TokenMatrix random_tokens(std::mt19937_64& rng, std::size_t tokens, std::size_t dim) {
  std::uniform_real_distribution<float> u(-4.0f, 4.0f);
  std::vector<std::vector<float>> rows(tokens, std::vector<float>(dim));
  for (auto& r : rows) {
    for (auto& v : r) v = u(rng);
  }
  return TokenMatrix::from_rows(rows);
}

Outcome pooling_identities() {
  std::mt19937_64 rng(1);
  double worst_sum = 0, worst_uniform = 0, worst_shift = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t tokens = 1 + rng() % 16, dim = 1 + rng() % 32;
    const TokenMatrix h = random_tokens(rng, tokens, dim);
    const auto a = attention_weights(h);
    double sum = 0;
    for (double w : a) sum += w;
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));

    // Uniform scores: a per-row permutation of one shared row keeps every mean equal.
    std::vector<std::vector<float>> rows(tokens, std::vector<float>(dim));
    const TokenMatrix seed_row = random_tokens(rng, 1, dim);
    for (auto& r : rows) {
      r.assign(seed_row.states.begin(), seed_row.states.end());
      std::shuffle(r.begin(), r.end(), rng);
    }
    const TokenMatrix uni = TokenMatrix::from_rows(rows);
    const auto att = attention_pool(uni).vector;
    const auto mean = mean_pool(uni).vector;
    for (std::size_t k = 0; k < dim; ++k) {
      worst_uniform = std::max(worst_uniform, std::abs(double(att[k]) - double(mean[k])));
    }

    const auto scores = token_scores(h);
    const double c = std::uniform_real_distribution<double>(-50.0, 50.0)(rng);
    std::vector<double> shifted(scores.begin(), scores.end());
    for (auto& s : shifted) s += c;
    const auto b = softmax(shifted);
    const auto base = softmax(scores);
    for (std::size_t i = 0; i < tokens; ++i) worst_shift = std::max(worst_shift, std::abs(base[i] - b[i]));
  }
  const bool ok = worst_sum <= 1e-12 && worst_uniform <= 1e-9 && worst_shift <= 1e-9;
  return {ok, fmt("1000 matrices: |sum w - 1| max %.2e (<= 1e-12), |attention - mean| max %.2e (<= 1e-9), "
                  "shift max %.2e (<= 1e-9)",
                  worst_sum, worst_uniform, worst_shift)};
}

Outcome metric_oracles() {
  std::mt19937_64 rng(7);
  double worst = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 2 + rng() % 11;
    Labels a(n), b(n);
    const std::size_t ka = 1 + rng() % 5, kb = 1 + rng() % 5;
    for (auto& v : a) v = static_cast<std::uint32_t>(rng() % ka);
    for (auto& v : b) v = static_cast<std::uint32_t>(rng() % kb);
    worst = std::max({worst, std::abs(ari(a, b) - oracle::ari(a, b)), std::abs(nmi(a, b) - oracle::nmi(a, b)),
                      std::abs(acc(a, b) - oracle::acc(a, b))});
  }
  const double e_ari = ari(Labels{0, 0, 0, 1, 1, 1}, Labels{0, 0, 1, 1, 1, 1});
  const double e_acc = acc(Labels{0, 0, 1, 2}, Labels{1, 1, 2, 2});
  Matrix z(4, 1);
  z << 0, 1, 10, 11;
  const double e_sil = silhouette(z, Labels{0, 0, 1, 1}).value_or(-2.0);
  const bool ok = worst <= 1e-9 && std::abs(e_ari - 0.324324) <= 1e-6 && std::abs(e_acc - 0.75) <= 1e-6 &&
                  std::abs(e_sil - 0.899749) <= 1e-6;
  return {ok, fmt("1000 instances: max oracle gap %.2e (<= 1e-9); ARI %.6f, ACC %.6f, silhouette %.6f", worst,
                  e_ari, e_acc, e_sil)};
}

Outcome amortization() {
  struct Row {
    const char* name;
    std::size_t n, m, v;
  };
  const Row rows[] = {{"ZO", 101, 16, 36},   {"LY", 148, 18, 59},   {"BC", 286, 9, 51},
                      {"SB", 307, 35, 133},  {"DE", 366, 34, 133},  {"SF", 1066, 10, 31},
                      {"CA", 1728, 6, 21},   {"MU", 8124, 22, 126}};
  double worst = 0;
  std::string listing;
  for (const Row& r : rows) {
    const double got = amortization_ratio(r.n, r.m, r.v);
    const double direct = 1.0 - double(r.v) / (double(r.n) * double(r.m));
    worst = std::max(worst, std::abs(got - direct));
    listing += fmt(" %s=%.6f", r.name, got);
  }
  const bool anchors = std::abs(amortization_ratio(101, 16, 36) - 0.977723) <= 1e-6 &&
                       std::abs(amortization_ratio(8124, 22, 126) - 0.999295) <= 1e-6;
  return {worst <= 1e-6 && anchors, fmt("max gap %.2e (<= 1e-6);", worst) + listing};
}

Outcome scaling() {
  testutil::TempDir dir("accept-scaling");
  const auto t0 = Clock::now();
  const int code = shell(std::string(ARISE_BIN) + " scaling --axis n --values 1000,2000,4000 --out " +
                         dir.file("scaling.csv"));
  const double secs = since(t0);
  if (code != 0) return {false, fmt("arise scaling exited with %d", code)};

  std::istringstream in(testutil::read_file(dir.file("scaling.csv")));
  std::string line;
  std::getline(in, line);
  std::vector<double> online;
  bool queries_ok = true;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 8) return {false, "malformed scaling row: " + line};
    queries_ok &= f[4] == f[5];
    online.push_back(std::stod(f[7]));
  }
  if (online.size() != 3) return {false, "expected three scaling rows"};
  double worst = 0;
  std::string ratios;
  for (std::size_t i = 1; i < online.size(); ++i) {
    const double r = online[i] / online[i - 1];
    worst = std::max(worst, r);
    ratios += fmt(" %.2fx", r);
  }
  const bool ok = worst <= 2.5 && queries_ok && secs < 120.0;
  return {ok, fmt("N 1000->2000->4000 online %.3fs, %.3fs, %.3fs; doubling ratios", online[0], online[1],
                  online[2]) +
                  ratios + fmt(" (<= 2.5x); queries = |V|: %s; sweep %.1fs (< 120s)", queries_ok ? "yes" : "no", secs)};
}

Outcome determinism() {
  testutil::TempDir dir("accept-determinism");
  const std::string bin = ARISE_BIN;
  const std::string fixture = testutil::data_path("fixtures/zoo_descriptions.jsonl");
  if (shell(bin + " stub-bundle --cache " + fixture + " --out " + dir.file("bundle")) != 0) {
    return {false, "stub-bundle failed"};
  }
  const std::string run = bin + " cluster --dataset " + testutil::data_path("zoo.csv") +
                          " --label-column type --k 7 --bundle " + dir.file("bundle") + " --seed 3 --out ";
  if (shell(run + dir.file("a.json")) != 0 || shell(run + dir.file("b.json")) != 0) {
    return {false, "cluster failed"};
  }
  const std::string a = testutil::read_file(dir.file("a.json"));
  const std::string b = testutil::read_file(dir.file("b.json"));
  return {!a.empty() && a == b, fmt("two CLI runs: %zu and %zu bytes, identical: %s", a.size(), b.size(),
                                    a == b ? "yes" : "no")};
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

} // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {"ohk-zoo", ohk_zoo},
      {"ablation-breast-cancer", ablation_bc},
      {"fixture-end-to-end", fixture_end_to_end},
      {"pooling-identities", pooling_identities},
      {"metric-oracles", metric_oracles},
      {"amortization", amortization},
      {"scaling", scaling},
      {"determinism", determinism},
  };

  std::size_t only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) {
      only = std::strtoul(argv[++i], nullptr, 10);
    } else {
      std::cerr << "usage: acceptance [--only N]\n";
      return 2;
    }
  }
  if (only > criteria.size()) {
    std::cerr << "no criterion " << only << "\n";
    return 2;
  }

  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only && only != i + 1) continue;
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all &= o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].name << ": " << o.detail
              << std::endl;
  }
  return all ? 0 : 1;
}
