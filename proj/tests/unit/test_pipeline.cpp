#include <doctest.h>

#include <algorithm>

#include "arise/bundle.hpp"
#include "arise/error.hpp"
#include "arise/pipeline.hpp"
#include "arise/scaling.hpp"
#include "test_util.hpp"

using namespace arise;

namespace {

RunConfig zoo_config() {
  RunConfig cfg;
  cfg.dataset = testutil::data_path("zoo.csv");
  cfg.label_column = "type";
  cfg.k = 7;
  cfg.llm = LlmMode::stub;
  cfg.encoder = EncoderMode::stub;
  cfg.stub_dim = 16;
  cfg.parallelism = 2;
  return cfg;
}

} // namespace

TEST_CASE("pipeline: stub LLM and stub encoder run end to end on Zoo") {
  const RunConfig cfg = zoo_config();
  const Dataset ds = load_run_dataset(cfg);
  const ClusterResult r = run_arise(ds, cfg);
  CHECK(r.final.labels.size() == 101);
  CHECK(std::all_of(r.final.labels.begin(), r.final.labels.end(), [](auto l) { return l < 7; }));
  CHECK(std::find(cfg.alphas.begin(), cfg.alphas.end(), r.alpha_star()) != cfg.alphas.end());
  CHECK(r.trace.candidates.size() == 11);
  CHECK(r.final_seed != r.search_seed);
}

TEST_CASE("pipeline: every pooling mode completes") {
  RunConfig cfg = zoo_config();
  cfg.alphas = {0.0, 0.5, 1.0};
  const Dataset ds = load_run_dataset(cfg);
  for (Pooling p : {Pooling::attention, Pooling::mean, Pooling::cls}) {
    cfg.pooling = p;
    CHECK(run_arise(ds, cfg).final.labels.size() == 101);
  }
}

TEST_CASE("pipeline: result JSON is byte-identical across runs") {
  const RunConfig cfg = zoo_config();
  const Dataset ds = load_run_dataset(cfg);
  const std::string a = result_to_json(run_arise(ds, cfg), cfg).dump(2);
  const std::string b = result_to_json(run_arise(ds, cfg), cfg).dump(2);
  CHECK(a == b);
  const auto j = nlohmann::json::parse(a);
  CHECK(j.at("silhouette_trace").size() == 11);
  CHECK(j.at("labels").size() == 101);
  CHECK(j.contains("tool_version"));
}

TEST_CASE("pipeline: reuse keeps the search labels; rerun uses a derived seed") {
  RunConfig cfg = zoo_config();
  cfg.alphas = {0.0};
  cfg.encoder = EncoderMode::none;
  cfg.llm = LlmMode::none;
  const Dataset ds = load_run_dataset(cfg);
  const Representations reps = prepare_representations(ds, cfg);
  CHECK(reps.semantic_skipped);
  CHECK(reps.semantic_hat.cols() == 0);

  cfg.final_mode = FinalMode::reuse;
  const ClusterResult reuse = cluster_representations(reps, 7, cfg, 3);
  CHECK(reuse.final.labels == reuse.trace.candidates[0].clustering.labels);

  cfg.final_mode = FinalMode::rerun;
  const ClusterResult rerun = cluster_representations(reps, 7, cfg, 3);
  CHECK(rerun.final.labels == kmeans(reps.anchor_hat, 7, rerun.final_seed, cfg.fusion_config().kmeans).labels);
}

TEST_CASE("pipeline: bundle route and cache route agree") {
  testutil::TempDir dir("route");
  RunConfig cfg = zoo_config();
  cfg.cache = dir.file("cache.jsonl");
  cfg.alphas = {0.0, 0.5, 1.0};
  const Dataset ds = load_run_dataset(cfg);
  const ClusterResult via_stub = run_arise(ds, cfg);

  const DescriptionCache cache(cfg.cache);
  write_stub_bundle(cache.records(), dir.file("bundle"), cfg.stub_dim);
  RunConfig b = cfg;
  b.encoder = EncoderMode::bundle;
  b.bundle = dir.file("bundle");
  b.llm = LlmMode::none;
  const ClusterResult via_bundle = run_arise(ds, b);
  CHECK(via_bundle.final.labels == via_stub.final.labels);
  CHECK(via_bundle.alpha_star() == via_stub.alpha_star());
}

TEST_CASE("pipeline: a cold cache without an LLM is an enrichment error") {
  testutil::TempDir dir("cold");
  testutil::write_file(dir.file("empty.jsonl"), "");
  RunConfig cfg = zoo_config();
  cfg.llm = LlmMode::none;
  cfg.cache = dir.file("empty.jsonl");
  const Dataset ds = load_run_dataset(cfg);
  CHECK_THROWS_AS(run_arise(ds, cfg), EnrichmentError);
}

TEST_CASE("synthetic data: shape, vocabulary and determinism") {
  SyntheticSpec s;
  s.n = 200;
  s.m = 5;
  s.cardinality = 4;
  s.k = 3;
  const Dataset a = generate_synthetic(s);
  CHECK(a.rows() == 200);
  CHECK(a.cols() == 5);
  CHECK(extract_vocabulary(a).size() == 20);
  REQUIRE(a.labels);
  CHECK(a.cells == generate_synthetic(s).cells);
}

TEST_CASE("scaling sweep: one query per vocabulary value") {
  ScalingOptions o;
  o.values = {100, 200};
  o.base.m = 4;
  o.base.cardinality = 3;
  o.repeats = 1;
  o.replicates = 2;
  const auto rows = run_scaling_sweep(o);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.queries == r.vocab_size);
    CHECK(r.vocab_size == 12);
    CHECK(r.online_seconds > 0.0);
  }
  CHECK(rows[1].n == 200);
  const std::string csv = scaling_csv(o.axis, rows);
  CHECK(csv.rfind("axis,axis_value,n,m,vocab_size,queries,offline_seconds,online_seconds\n", 0) == 0);
}
