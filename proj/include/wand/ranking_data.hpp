#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wand {

/// Dense entity index in [0, K).
using EntityId = std::int32_t;

enum class RankingKind { Complete, Partial, TopMComplete, TopMPartial };

std::string_view to_string(RankingKind kind);

/// One observed ranking: the ordered entities x_i, the set of entities the
/// ranker considered, and the considered-but-unranked remainder.
///
/// `considered` and `unranked` are kept sorted ascending.
class Ranking {
 public:
  /// Throws std::invalid_argument on an empty or duplicated item list, or
  /// an item outside `considered`.
  Ranking(std::vector<EntityId> items, std::vector<EntityId> considered);

  /// Complete ranking over exactly the listed items.
  explicit Ranking(std::vector<EntityId> items);

  const std::vector<EntityId>& items() const { return items_; }
  const std::vector<EntityId>& considered() const { return considered_; }
  const std::vector<EntityId>& unranked() const { return unranked_; }

  /// n_i
  std::size_t size() const { return items_.size(); }
  /// K_i
  std::size_t considered_count() const { return considered_.size(); }

  bool operator==(const Ranking&) const = default;

 private:
  std::vector<EntityId> items_;
  std::vector<EntityId> considered_;
  std::vector<EntityId> unranked_;
};

RankingKind classify_ranking(const Ranking& r, std::size_t num_entities);

/// Parse/validation failure, carrying the offending ranker when known.
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& what, std::optional<std::size_t> ranker = std::nullopt);
  std::optional<std::size_t> ranker() const { return ranker_; }

 private:
  std::optional<std::size_t> ranker_;
};

inline constexpr double kDefaultReliabilityPrior = 0.5;

struct Dataset {
  std::size_t num_entities = 0;
  std::vector<Ranking> rankings;
  std::vector<std::string> entity_labels;  // empty, or one per entity
  std::vector<double> reliability_prior;   // p_i, one per ranking

  std::size_t num_rankers() const { return rankings.size(); }

  /// Display name for an entity: its label when present, else its id.
  std::string label(EntityId entity) const;

  /// Throws DataError if any invariant is broken.
  void validate() const;

  bool operator==(const Dataset&) const = default;
};

Dataset parse_dataset(std::istream& in);
Dataset parse_dataset(std::string_view text);
Dataset load_dataset(const std::string& path);

/// Writes the JSON document accepted by parse_dataset. `considered` is
/// omitted for rankings over the full entity set.
std::string serialize_dataset(const Dataset& data);
void save_dataset(const Dataset& data, const std::string& path);

}  // namespace wand
