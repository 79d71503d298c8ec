#include "wand/ranking_data.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

namespace wand {

using nlohmann::json;

std::string_view to_string(RankingKind kind) {
  switch (kind) {
    case RankingKind::Complete: return "complete";
    case RankingKind::Partial: return "partial";
    case RankingKind::TopMComplete: return "top-m-complete";
    case RankingKind::TopMPartial: return "top-m-partial";
  }
  return "unknown";
}

Ranking::Ranking(std::vector<EntityId> items, std::vector<EntityId> considered)
    : items_(std::move(items)), considered_(std::move(considered)) {
  if (items_.empty()) throw std::invalid_argument("ranking has no items");
  std::sort(considered_.begin(), considered_.end());
  if (std::adjacent_find(considered_.begin(), considered_.end()) != considered_.end()) {
    throw std::invalid_argument("considered set lists an entity twice");
  }
  std::vector<EntityId> sorted_items = items_;
  std::sort(sorted_items.begin(), sorted_items.end());
  const auto dup = std::adjacent_find(sorted_items.begin(), sorted_items.end());
  if (dup != sorted_items.end()) {
    throw std::invalid_argument("entity " + std::to_string(*dup) + " ranked twice (ties are not supported)");
  }
  for (EntityId e : sorted_items) {
    if (e < 0) throw std::invalid_argument("negative entity id " + std::to_string(e));
    if (!std::binary_search(considered_.begin(), considered_.end(), e)) {
      throw std::invalid_argument("ranked entity " + std::to_string(e) + " is not in the considered set");
    }
  }
  std::set_difference(considered_.begin(), considered_.end(), sorted_items.begin(), sorted_items.end(),
                      std::back_inserter(unranked_));
}

Ranking::Ranking(std::vector<EntityId> items) : Ranking(items, items) {}

RankingKind classify_ranking(const Ranking& r, std::size_t num_entities) {
  const bool full = r.considered_count() == num_entities;
  if (r.unranked().empty()) return full ? RankingKind::Complete : RankingKind::Partial;
  return full ? RankingKind::TopMComplete : RankingKind::TopMPartial;
}

DataError::DataError(const std::string& what, std::optional<std::size_t> ranker)
    : std::runtime_error(ranker ? "ranking " + std::to_string(*ranker) + ": " + what : what), ranker_(ranker) {}

std::string Dataset::label(EntityId entity) const {
  const auto idx = static_cast<std::size_t>(entity);
  if (idx < entity_labels.size()) return entity_labels[idx];
  return std::to_string(entity);
}

void Dataset::validate() const {
  if (num_entities == 0) throw DataError("num_entities must be positive");
  if (!entity_labels.empty() && entity_labels.size() != num_entities) {
    throw DataError("entity_labels has " + std::to_string(entity_labels.size()) + " entries, expected " +
                    std::to_string(num_entities));
  }
  if (reliability_prior.size() != rankings.size()) {
    throw DataError("reliability prior length does not match the number of rankings");
  }
  for (std::size_t i = 0; i < rankings.size(); ++i) {
    for (EntityId e : rankings[i].considered()) {
      if (e < 0 || static_cast<std::size_t>(e) >= num_entities) {
        throw DataError("entity id " + std::to_string(e) + " outside [0, " + std::to_string(num_entities) + ")", i);
      }
    }
    const double p = reliability_prior[i];
    if (!(p > 0.0 && p <= 1.0)) {
      throw DataError("reliability prior p=" + std::to_string(p) + " not in (0, 1]", i);
    }
  }
}

namespace {

std::vector<EntityId> read_ids(const json& node, const char* field, std::size_t ranker) {
  if (!node.is_array()) throw DataError(std::string("field '") + field + "' must be an array", ranker);
  std::vector<EntityId> ids;
  ids.reserve(node.size());
  for (const auto& v : node) {
    if (!v.is_number_integer()) throw DataError(std::string("field '") + field + "' must hold integers", ranker);
    ids.push_back(v.get<EntityId>());
  }
  return ids;
}

Dataset from_json(const json& doc) {
  if (!doc.is_object()) throw DataError("dataset document must be a JSON object");
  Dataset data;
  if (!doc.contains("num_entities") || !doc["num_entities"].is_number_integer() ||
      doc["num_entities"].get<long long>() <= 0) {
    throw DataError("'num_entities' must be a positive integer");
  }
  data.num_entities = doc["num_entities"].get<std::size_t>();
  if (doc.contains("entity_labels")) {
    data.entity_labels = doc["entity_labels"].get<std::vector<std::string>>();
  }
  if (!doc.contains("rankings") || !doc["rankings"].is_array()) {
    throw DataError("'rankings' must be an array");
  }
  std::vector<EntityId> all(data.num_entities);
  for (std::size_t e = 0; e < all.size(); ++e) all[e] = static_cast<EntityId>(e);

  const auto& rankings = doc["rankings"];
  for (std::size_t i = 0; i < rankings.size(); ++i) {
    const auto& node = rankings[i];
    if (!node.is_object() || !node.contains("items")) throw DataError("missing 'items'", i);
    auto items = read_ids(node["items"], "items", i);
    for (EntityId e : items) {
      if (e < 0 || static_cast<std::size_t>(e) >= data.num_entities) {
        throw DataError("entity id " + std::to_string(e) + " outside [0, " + std::to_string(data.num_entities) + ")",
                        i);
      }
    }
    auto considered = node.contains("considered") ? read_ids(node["considered"], "considered", i) : all;
    try {
      data.rankings.emplace_back(std::move(items), std::move(considered));
    } catch (const std::invalid_argument& e) {
      throw DataError(e.what(), i);
    }
    double p = kDefaultReliabilityPrior;
    if (node.contains("p")) {
      if (!node["p"].is_number()) throw DataError("'p' must be a number", i);
      p = node["p"].get<double>();
    }
    data.reliability_prior.push_back(p);
  }
  data.validate();
  return data;
}

}  // namespace

Dataset parse_dataset(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed JSON: ") + e.what());
  }
  try {
    return from_json(doc);
  } catch (const json::exception& e) {
    throw DataError(std::string("schema error: ") + e.what());
  }
}

Dataset parse_dataset(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_dataset(in);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file '" + path + "'");
  return parse_dataset(in);
}

std::string serialize_dataset(const Dataset& data) {
  json doc;
  doc["num_entities"] = data.num_entities;
  if (!data.entity_labels.empty()) doc["entity_labels"] = data.entity_labels;
  json rankings = json::array();
  for (std::size_t i = 0; i < data.rankings.size(); ++i) {
    const auto& r = data.rankings[i];
    json node;
    node["items"] = r.items();
    if (r.considered_count() != data.num_entities) node["considered"] = r.considered();
    node["p"] = data.reliability_prior[i];
    rankings.push_back(std::move(node));
  }
  doc["rankings"] = std::move(rankings);
  return doc.dump(1);
}

void save_dataset(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write dataset file '" + path + "'");
  out << serialize_dataset(data) << '\n';
}

}  // namespace wand
