#include <doctest.h>

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

#include "wand/random.hpp"
#include "wand/summaries.hpp"

using namespace wand;

namespace {

TraceRecord make_record(std::vector<int> c, std::vector<std::vector<int>> D, std::vector<std::vector<double>> Lambda,
                        std::vector<std::uint8_t> w = {}) {
  TraceRecord rec;
  rec.state.c = std::move(c);
  rec.state.D = std::move(D);
  rec.state.Lambda = std::move(Lambda);
  rec.state.gamma.assign(rec.state.Lambda.size(), 1.0);
  rec.state.w = w.empty() ? std::vector<std::uint8_t>(rec.state.c.size(), 1) : std::move(w);
  return rec;
}

Trace make_trace(std::vector<TraceRecord> records) {
  Trace trace;
  for (std::size_t k = 0; k < records.size(); ++k) records[k].iter = k + 1;
  trace.records = std::move(records);
  if (!trace.records.empty()) {
    trace.meta.num_rankers = trace.records[0].state.c.size();
    trace.meta.num_entities = trace.records[0].state.D[0].size();
  }
  return trace;
}

// Textbook O(n^3) complete linkage: rescan every active pair at every step.
Dendrogram naive_complete_linkage(const DissimilarityMatrix& d) {
  const std::size_t n = d.dim();
  std::vector<std::vector<std::size_t>> members(n);
  std::vector<std::size_t> ids(n);
  for (std::size_t i = 0; i < n; ++i) {
    members[i] = {i};
    ids[i] = i;
  }
  Dendrogram out;
  out.leaves = n;
  while (members.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    std::pair<std::size_t, std::size_t> best_key{n, n};
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        double link = 0.0;
        for (std::size_t x : members[i]) {
          for (std::size_t y : members[j]) link = std::max(link, d(x, y));
        }
        const std::size_t mi = *std::min_element(members[i].begin(), members[i].end());
        const std::size_t mj = *std::min_element(members[j].begin(), members[j].end());
        const std::pair<std::size_t, std::size_t> key{std::min(mi, mj), std::max(mi, mj)};
        if (link < best || (link == best && key < best_key)) {
          best = link;
          best_key = key;
          bi = i;
          bj = j;
        }
      }
    }
    out.merges.push_back(Merge{std::min(ids[bi], ids[bj]), std::max(ids[bi], ids[bj]), best});
    members[bi].insert(members[bi].end(), members[bj].begin(), members[bj].end());
    ids[bi] = n + out.merges.size() - 1;
    members.erase(members.begin() + static_cast<long>(bj));
    ids.erase(ids.begin() + static_cast<long>(bj));
  }
  return out;
}

}  // namespace

TEST_CASE("complete linkage: three-point example") {
  DissimilarityMatrix d(3);
  d.set(0, 1, 0.1);
  d.set(0, 2, 0.9);
  d.set(1, 2, 0.8);
  const auto dend = complete_linkage(d);
  REQUIRE(dend.merges.size() == 2);
  CHECK(dend.merges[0] == Merge{0, 1, 0.1});
  CHECK(dend.merges[1] == Merge{2, 3, 0.9});
  CHECK(dend.cut(0.5) == std::vector<int>{0, 0, 1});
  CHECK(dend.cut(0.05) == std::vector<int>{0, 1, 2});
  CHECK(dend.cut(1.0) == std::vector<int>{0, 0, 0});
}

TEST_CASE("complete linkage: all-zero matrix merges everything at height 0") {
  const auto dend = complete_linkage(DissimilarityMatrix(5));
  REQUIRE(dend.merges.size() == 4);
  for (const auto& m : dend.merges) CHECK(m.height == 0.0);
  CHECK(dend.merges[0] == Merge{0, 1, 0.0});
  CHECK(dend.cut(0.0) == std::vector<int>(5, 0));
}

TEST_CASE("complete linkage rejects fewer than two points") {
  CHECK_THROWS_AS(complete_linkage(DissimilarityMatrix(1)), std::invalid_argument);
}

TEST_CASE("property: complete linkage matches a naive reference") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 12;
    DissimilarityMatrix d(n);
    // Coarse values make ties common.
    const bool coarse = trial % 2 == 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        d.set(i, j, coarse ? static_cast<double>(rng() % 5) / 4.0 : draw_uniform(rng));
      }
    }
    const auto got = complete_linkage(d);
    const auto want = naive_complete_linkage(d);
    REQUIRE(got.merges.size() == n - 1);
    CHECK(got.merges == want.merges);
    for (std::size_t k = 1; k < got.merges.size(); ++k) CHECK(got.merges[k].height >= got.merges[k - 1].height);
  }
}

TEST_CASE("ranker dissimilarity counts separations") {
  const Trace trace = make_trace({
      make_record({0, 1, 0}, {{0, 0}, {0, 0}}, {{1.0}, {2.0}}),
      make_record({0, 0, 0}, {{0, 0}}, {{1.0}}),
  });
  const auto d = ranker_dissimilarity(trace);
  CHECK(d(0, 1) == 0.5);
  CHECK(d(1, 2) == 0.5);
  CHECK(d(0, 2) == 0.0);
  CHECK(d(1, 1) == 0.0);
  CHECK_NOTHROW(d.validate());
  CHECK_THROWS(ranker_dissimilarity(Trace{}));
}

TEST_CASE("ranker summaries ignore cluster labels") {
  const Trace a = make_trace({
      make_record({0, 1, 1}, {{0, 0}, {0, 0}}, {{1.0}, {2.0}}),
      make_record({0, 0, 1}, {{0, 0}, {0, 0}}, {{1.0}, {2.0}}),
  });
  const Trace b = make_trace({
      make_record({1, 0, 0}, {{0, 0}, {0, 0}}, {{2.0}, {1.0}}),
      make_record({1, 1, 0}, {{0, 0}, {0, 0}}, {{2.0}, {1.0}}),
  });
  const auto da = ranker_dissimilarity(a), db = ranker_dissimilarity(b);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) CHECK(da(i, j) == db(i, j));
  }
  CHECK(ranker_cluster_count_distribution(a) == ranker_cluster_count_distribution(b));
}

TEST_CASE("cluster count distributions") {
  const Trace trace = make_trace({
      make_record({0, 1}, {{0, 0, 1}, {0, 0, 0}}, {{1.0, 2.0}, {3.0}}),
      make_record({0, 1}, {{0, 1, 2}, {0, 0, 0}}, {{1.0, 2.0, 3.0}, {3.0}}),
      make_record({0, 0}, {{0, 0, 0}}, {{1.0}}),
      make_record({0, 1}, {{0, 0, 1}, {0, 1, 1}}, {{1.0, 2.0}, {3.0, 4.0}}),
  });
  const auto nr = ranker_cluster_count_distribution(trace);
  REQUIRE(nr.size() == 2);
  CHECK(nr[0] == 0.25);
  CHECK(nr[1] == 0.75);
  CHECK(std::abs(std::accumulate(nr.begin(), nr.end(), 0.0) - 1.0) < 1e-12);

  const Trace point = make_trace({make_record({0, 1}, {{0}, {0}}, {{1.0}, {1.0}})});
  CHECK(ranker_cluster_count_distribution(point) == std::vector<double>{0.0, 1.0});

  // Reference cluster 0 holds ranker 0 in every two-cluster sample.
  const auto ne = entity_cluster_count_distribution(trace, 2, 0);
  REQUIRE(ne.size() == 3);
  CHECK(ne[0] == 0.0);
  CHECK(ne[1] == doctest::Approx(2.0 / 3.0));
  CHECK(ne[2] == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(entity_cluster_count_distribution(trace, 3, 0), std::invalid_argument);
}

TEST_CASE("alignment matches clusters by membership overlap") {
  // Modal partition {0,1,2 | 3}; the reference numbers the larger cluster 0.
  const Trace trace = make_trace({
      make_record({0, 0, 0, 1}, {{0}, {0}}, {{1.0}, {5.0}}),
      make_record({1, 1, 1, 0}, {{0}, {0}}, {{5.0}, {1.0}}),
      make_record({1, 0, 0, 1}, {{0}, {0}}, {{5.0}, {1.0}}),
      make_record({0, 1, 1, 0}, {{0}, {0}}, {{9.0}, {9.0}}),
  });
  const auto al = align_ranker_clusters(trace, 2);
  CHECK(al.reference == std::vector<int>{0, 0, 0, 1});
  REQUIRE(al.samples.size() == 4);
  CHECK(al.samples[0].cluster_of == std::vector<std::size_t>{0, 1});
  CHECK(al.samples[1].cluster_of == std::vector<std::size_t>{1, 0});
  // {1,2} overlaps {0,1,2} with Jaccard 2/3, beating every other pairing.
  CHECK(al.samples[2].cluster_of == std::vector<std::size_t>{0, 1});
  CHECK(al.samples[3].cluster_of == std::vector<std::size_t>{1, 0});
  CHECK_THROWS_AS(align_ranker_clusters(trace, 3), std::invalid_argument);
}

TEST_CASE("entity dissimilarity within an aligned cluster") {
  const Trace trace = make_trace({
      make_record({0, 0, 1}, {{0, 0, 1}, {0, 0, 0}}, {{1.0, 2.0}, {3.0}}),
      make_record({1, 1, 0}, {{0, 0, 0}, {0, 1, 1}}, {{3.0}, {1.0, 2.0}}),
      make_record({0, 0, 0}, {{0, 1, 2}}, {{1.0, 2.0, 3.0}}),
  });
  const auto d0 = entity_dissimilarity(trace, 2, 0);
  CHECK(d0(0, 1) == 0.5);
  CHECK(d0(0, 2) == 1.0);
  CHECK(d0(1, 2) == 0.5);
  const auto d1 = entity_dissimilarity(trace, 2, 1);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) CHECK(d1(i, j) == 0.0);
  }
  CHECK_THROWS_AS(entity_dissimilarity(trace, 4, 0), std::invalid_argument);
  CHECK_THROWS_AS(entity_dissimilarity(trace, 2, 2), std::invalid_argument);
}

TEST_CASE("aggregate ranking by posterior mean skill") {
  const Trace trace = make_trace({
      make_record({0, 0}, {{0, 1, 1}}, {{1.0, 4.0}}),
      make_record({0, 0}, {{0, 1, 1}}, {{3.0, 2.0}}),
  });
  const auto agg = aggregate_ranking(trace, 1, 0);
  REQUIRE(agg.size() == 3);
  CHECK(agg[0].entity == 1);
  CHECK(agg[1].entity == 2);
  CHECK(agg[2].entity == 0);
  CHECK(agg[0].mean_skill == 3.0);
  CHECK(agg[1].mean_skill == 3.0);
  CHECK(agg[2].mean_skill == 2.0);
}

TEST_CASE("reliability probabilities and MAP allocation") {
  const Trace trace = make_trace({
      make_record({0, 1, 1}, {{0}, {0}}, {{1.0}, {2.0}}, {1, 0, 1}),
      make_record({0, 0, 1}, {{0}, {0}}, {{1.0}, {2.0}}, {1, 1, 0}),
      make_record({1, 0, 0}, {{0}, {0}}, {{1.0}, {2.0}}, {1, 1, 1}),
      make_record({0, 1, 1}, {{0}, {0}}, {{1.0}, {2.0}}, {1, 0, 0}),
  });
  const auto p = reliability_probabilities(trace);
  CHECK(p == std::vector<double>{1.0, 0.5, 0.5});
  CHECK(map_allocation(trace) == std::vector<int>{0, 1, 1});
}

TEST_CASE("csv writers") {
  DissimilarityMatrix d(2);
  d.set(0, 1, 0.25);
  std::ostringstream out;
  write_dissimilarity_csv(out, d, {"x", "y"});
  CHECK(out.str() == "id,x,y\nx,0,0.25\ny,0.25,0\n");

  std::ostringstream merges;
  write_merges_csv(merges, complete_linkage(d));
  CHECK(merges.str() == "a,b,height\n0,1,0.25\n");

  std::ostringstream counts;
  write_count_distribution_csv(counts, {0.0, 1.0});
  CHECK(counts.str() == "k,prob\n1,0\n2,1\n");

  std::ostringstream rel;
  write_reliability_csv(rel, {1.0, 0.5});
  CHECK(rel.str() == "ranker,prob\n0,1\n1,0.5\n");

  std::ostringstream agg;
  write_aggregate_csv(agg, {{2, 1.5}, {0, 0.5}}, nullptr);
  CHECK(agg.str().rfind("entity,label,mean_skill,rank\n", 0) == 0);
}
