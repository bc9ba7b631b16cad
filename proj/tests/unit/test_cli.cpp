#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <sys/wait.h>

#include <json.hpp>

#include "test_util.hpp"

namespace {

struct Run {
  int code = -1;
  std::string out;
};

// Runs the CLI with stdout captured and stderr discarded.
Run arise(const std::string& args) {
  const std::string cmd = std::string(ARISE_BIN) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, got);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

const std::string zoo = testutil::data_path("zoo.csv");

} // namespace

TEST_CASE("cli: stats reports the Zoo row") {
  const Run r = arise("stats --dataset " + zoo + " --label-column type --k 7");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("n") == 101);
  CHECK(j.at("m") == 16);
  CHECK(j.at("vocab_size") == 36);
}

TEST_CASE("cli: describe twice; the second run issues no queries") {
  testutil::TempDir d("cli-describe");
  const std::string args = "describe --dataset " + zoo + " --label-column type --k 7 --llm stub --cache " +
                           d.file("c.jsonl");
  const Run first = arise(args);
  REQUIRE(first.code == 0);
  CHECK(nlohmann::json::parse(first.out).at("queries") == 36);
  const Run second = arise(args);
  REQUIRE(second.code == 0);
  CHECK(nlohmann::json::parse(second.out).at("queries") == 0);
}

TEST_CASE("cli: stub-bundle, cluster and eval chain; results are byte-identical") {
  testutil::TempDir d("cli-chain");
  const std::string fixture = testutil::data_path("fixtures/zoo_descriptions.jsonl");
  REQUIRE(arise("stub-bundle --cache " + fixture + " --out " + d.file("bundle") + " --dim 16").code == 0);

  const std::string cluster = "cluster --dataset " + zoo + " --label-column type --k 7 --bundle " +
                              d.file("bundle") + " --seed 4 --out ";
  REQUIRE(arise(cluster + d.file("a.json")).code == 0);
  REQUIRE(arise(cluster + d.file("b.json")).code == 0);
  CHECK(testutil::read_file(d.file("a.json")) == testutil::read_file(d.file("b.json")));

  const auto res = nlohmann::json::parse(testutil::read_file(d.file("a.json")));
  CHECK(res.at("labels").size() == 101);
  CHECK(res.at("silhouette_trace").size() == 11);

  const Run ev = arise("eval --result " + d.file("a.json") + " --labels " + zoo + " --label-column type");
  REQUIRE(ev.code == 0);
  const auto m = nlohmann::json::parse(ev.out);
  CHECK(m.at("ari").get<double>() > 0.3);
  CHECK(m.at("n") == 101);
}

TEST_CASE("cli: usage and configuration errors exit nonzero") {
  CHECK(arise("cluster --no-such-flag").code != 0);
  CHECK(arise("cluster --dataset " + zoo + " --k 7 --alphas 2").code == 2);
  CHECK(arise("cluster --dataset /nonexistent.csv --k 2").code == 2);
  CHECK(arise("--version").code == 0);
}
