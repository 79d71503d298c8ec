#include <doctest.h>

#include <algorithm>
#include <random>

#include "wand/random.hpp"
#include "wand/ranking_data.hpp"

using namespace wand;

TEST_CASE("parse: complete ranking by default") {
  const auto data = parse_dataset(R"({"num_entities": 3, "rankings": [{"items": [2, 1, 0]}]})");
  REQUIRE(data.num_rankers() == 1);
  const auto& r = data.rankings[0];
  CHECK(r.items() == std::vector<EntityId>{2, 1, 0});
  CHECK(r.considered() == std::vector<EntityId>{0, 1, 2});
  CHECK(r.unranked().empty());
  CHECK(classify_ranking(r, 3) == RankingKind::Complete);
  CHECK(data.reliability_prior == std::vector<double>{0.5});
}

TEST_CASE("parse: top-2 complete ranking derives the unranked set") {
  const auto data =
      parse_dataset(R"({"num_entities": 4, "rankings": [{"items": [3, 0], "considered": [0, 1, 2, 3]}]})");
  const auto& r = data.rankings[0];
  CHECK(r.unranked() == std::vector<EntityId>{1, 2});
  CHECK(classify_ranking(r, 4) == RankingKind::TopMComplete);
}

TEST_CASE("parse: partial ranking") {
  const auto data =
      parse_dataset(R"({"num_entities": 4, "rankings": [{"items": [3, 0, 1], "considered": [0, 1, 3], "p": 0.8}]})");
  const auto& r = data.rankings[0];
  CHECK(r.unranked().empty());
  CHECK(r.considered_count() == 3);
  CHECK(classify_ranking(r, 4) == RankingKind::Partial);
  CHECK(data.reliability_prior[0] == doctest::Approx(0.8));
}

TEST_CASE("classify_ranking") {
  CHECK(classify_ranking(Ranking({0, 1, 2}, {0, 1, 2}), 3) == RankingKind::Complete);
  CHECK(classify_ranking(Ranking({0, 1}, {0, 1, 2}), 3) == RankingKind::TopMComplete);
  CHECK(classify_ranking(Ranking({0, 1}, {0, 1, 3}), 5) == RankingKind::TopMPartial);
  // n_i = K_i on a strict subset degenerates to a partial ranking.
  CHECK(classify_ranking(Ranking({1, 3}, {1, 3}), 5) == RankingKind::Partial);
}

TEST_CASE("parse errors carry the ranker index") {
  auto ranker_of = [](const char* text) -> std::optional<std::size_t> {
    try {
      parse_dataset(text);
    } catch (const DataError& e) {
      return e.ranker();
    }
    FAIL("expected DataError");
    return std::nullopt;
  };
  CHECK(ranker_of(R"({"num_entities": 3, "rankings": [{"items": [0]}, {"items": [1, 1]}]})") == 1u);
  CHECK(ranker_of(R"({"num_entities": 3, "rankings": [{"items": [0, 2], "considered": [0, 1]}]})") == 0u);
  CHECK(ranker_of(R"({"num_entities": 3, "rankings": [{"items": [0]}, {"items": [5]}]})") == 1u);
  CHECK(ranker_of(R"({"num_entities": 3, "rankings": [{"items": [0], "p": 0.0}]})") == 0u);
  CHECK(ranker_of(R"({"num_entities": 3, "rankings": [{"items": [0], "p": 1.5}]})") == 0u);
  CHECK(ranker_of(R"({"num_entities": 3, "rankings": [{"items": [0]}, {"items": []}]})") == 1u);
  CHECK_THROWS_AS(parse_dataset("{not json"), DataError);
  CHECK_THROWS_AS(parse_dataset(R"({"rankings": []})"), DataError);
  CHECK_THROWS_AS(parse_dataset(R"({"num_entities": 2, "entity_labels": ["a"], "rankings": []})"), DataError);
}

TEST_CASE("p = 1 is accepted") {
  const auto data = parse_dataset(R"({"num_entities": 2, "rankings": [{"items": [0, 1], "p": 1.0}]})");
  CHECK(data.reliability_prior[0] == 1.0);
}

TEST_CASE("property: parse(serialize(d)) == d and items/unranked partition considered") {
  Rng rng(12345);
  for (int trial = 0; trial < 200; ++trial) {
    Dataset data;
    data.num_entities = 1 + rng() % 8;
    if (rng() % 2) {
      for (std::size_t l = 0; l < data.num_entities; ++l) data.entity_labels.push_back("e" + std::to_string(l));
    }
    const std::size_t n = 1 + rng() % 6;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<EntityId> ids(data.num_entities);
      for (std::size_t l = 0; l < ids.size(); ++l) ids[l] = static_cast<EntityId>(l);
      std::shuffle(ids.begin(), ids.end(), rng);
      const std::size_t k_i = 1 + rng() % data.num_entities;
      std::vector<EntityId> considered(ids.begin(), ids.begin() + static_cast<long>(k_i));
      const std::size_t n_i = 1 + rng() % k_i;
      std::vector<EntityId> items(considered.begin(), considered.begin() + static_cast<long>(n_i));
      data.rankings.emplace_back(items, considered);
      data.reliability_prior.push_back(0.05 + 0.95 * draw_uniform(rng));
    }
    const Dataset back = parse_dataset(serialize_dataset(data));
    REQUIRE(back == data);
    for (const auto& r : back.rankings) {
      std::vector<EntityId> merged = r.items();
      merged.insert(merged.end(), r.unranked().begin(), r.unranked().end());
      std::sort(merged.begin(), merged.end());
      CHECK(merged == r.considered());
      CHECK(r.unranked().size() == r.considered_count() - r.size());
    }
  }
}
