#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "test_support.hpp"
#include "wand/chain_state.hpp"

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("wand_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run(const std::string& args) {
  const std::string cmd = std::string(WAND_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path write_small_dataset(const fs::path& dir) {
  const auto path = dir / "data.json";
  wand::save_dataset(wand::testing::small_mixed_dataset(), path.string());
  return path;
}

}  // namespace

TEST_CASE("fit writes the expected number of records and is reproducible") {
  TempDir tmp;
  const auto data = write_small_dataset(tmp.path);
  const auto a = tmp.path / "a", b = tmp.path / "b";
  REQUIRE(run("fit --data " + data.string() + " --out " + a.string() + " --iters 1000 --burnin 50 --thin 10 --seed 5") ==
          0);
  REQUIRE(run("fit --data " + data.string() + " --out " + b.string() + " --iters 1000 --burnin 50 --thin 10 --seed 5") ==
          0);
  const auto trace = wand::load_trace((a / "trace_chain0.jsonl").string());
  CHECK(trace.size() == 100);
  CHECK(trace.meta.seed != 0);
  CHECK(trace.meta.thin == 10);
  CHECK(slurp(a / "trace_chain0.jsonl") == slurp(b / "trace_chain0.jsonl"));
}

TEST_CASE("multiple chains get distinct seeds") {
  TempDir tmp;
  const auto data = write_small_dataset(tmp.path);
  REQUIRE(run("fit --data " + data.string() + " --out " + tmp.path.string() + " --iters 20 --chains 2 --seed 1") == 0);
  const auto c0 = wand::load_trace((tmp.path / "trace_chain0.jsonl").string());
  const auto c1 = wand::load_trace((tmp.path / "trace_chain1.jsonl").string());
  CHECK(c0.meta.seed != c1.meta.seed);
}

TEST_CASE("summarize, ppc and simulate produce their outputs") {
  TempDir tmp;
  const auto data = write_small_dataset(tmp.path);
  REQUIRE(run("fit --data " + data.string() + " --out " + tmp.path.string() + " --iters 200 --seed 2") == 0);
  const auto trace = tmp.path / "trace_chain0.jsonl";

  const auto sum = tmp.path / "summary";
  REQUIRE(run("summarize --trace " + trace.string() + " --data " + data.string() + " --out " + sum.string() +
              " --condition-nr 1") == 0);
  for (const char* name : {"ranker_dissimilarity.csv", "ranker_dendrogram.csv", "ranker_cluster_counts.csv",
                           "reliability.csv", "map_allocation.csv", "aggregate_ranking_nr1_cluster0.csv",
                           "entity_dissimilarity_nr1_cluster0.csv", "entity_dendrogram_nr1_cluster0.csv",
                           "entity_cluster_counts_nr1_cluster0.csv"}) {
    CHECK_MESSAGE(fs::exists(sum / name), name);
  }
  CHECK(slurp(sum / "reliability.csv").rfind("ranker,prob\n", 0) == 0);

  const auto ppc = tmp.path / "ppc";
  REQUIRE(run("ppc --data " + data.string() + " --trace " + trace.string() + " --out " + ppc.string()) == 0);
  const std::string csv = slurp(ppc / "predictive_check.csv");
  CHECK(csv.rfind("ranker,method,support_size,observed_prob,diagnostic_prob\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);

  const auto spec = tmp.path / "spec.json";
  std::ofstream(spec) << R"({"num_entities": 4, "num_rankers": 6,
    "clusters": [{"weight": 1.0, "skills": [4, 3, 2, 1]}], "reliability": 0.9})";
  const auto simdir = tmp.path / "sim";
  REQUIRE(run("simulate --spec " + spec.string() + " --out " + simdir.string() + " --seed 3") == 0);
  CHECK(wand::load_dataset((simdir / "dataset.json").string()).num_rankers() == 6);
  CHECK(fs::exists(simdir / "truth.json"));
}

TEST_CASE("error exits") {
  TempDir tmp;
  const auto data = write_small_dataset(tmp.path);
  CHECK(run("summarize --trace " + (tmp.path / "missing.jsonl").string()) != 0);
  CHECK(run("fit --data " + (tmp.path / "missing.json").string()) != 0);
  CHECK(run("bogus") != 0);
  REQUIRE(run("fit --data " + data.string() + " --out " + tmp.path.string() + " --iters 10") == 0);
  const auto trace = tmp.path / "trace_chain0.jsonl";
  CHECK(run("ppc --data " + data.string() + " --trace " + trace.string() + " --samples-per-iter 0") != 0);
  CHECK(run("ppc --data " + data.string() + " --trace " + trace.string() + " --mode sideways") != 0);

  // A trace fitted to a different dataset is refused.
  const auto other = tmp.path / "other.json";
  wand::save_dataset(wand::testing::complete_dataset(5, 3), other.string());
  CHECK(run("ppc --data " + other.string() + " --trace " + trace.string()) != 0);

  const auto bad = tmp.path / "bad.json";
  std::ofstream(bad) << R"({"num_entities": 2, "rankings": [{"items": [0, 0]}]})";
  CHECK(run("fit --data " + bad.string() + " --out " + tmp.path.string()) == 1);
}
