#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wand/chain_state.hpp"
#include "wand/ranking_data.hpp"

namespace wand {

enum class ObservationScheme { Complete, Partial, TopMComplete, TopMPartial };

/// How each ranking is observed. `considered` (K_i) applies to the partial
/// schemes and `top_m` (M) to the top-M schemes; 0 means "all".
struct ObservationSpec {
  ObservationScheme scheme = ObservationScheme::Complete;
  std::size_t considered = 0;
  std::size_t top_m = 0;
};

/// A ranker cluster of a fixed finite mixture: its mixing weight and one skill
/// per entity. Entities with equal skills form one entity cluster.
struct ClusterSpec {
  double weight = 1.0;
  std::vector<double> skills;
};

/// Cluster structure drawn from the prior instead: rankers by CRP(alpha);
/// within each ranker cluster entities by CRP(gamma_s) with gamma_s either
/// fixed or drawn from Ga(a_gamma, b_gamma); atoms from Ga(a, 1).
struct CrpStructure {
  double alpha = 1.0;
  std::optional<double> gamma;
  double a_gamma = 3.0;
  double b_gamma = 3.0;
  double a = 1.0;
};

enum class ClusterAllocation { Sampled, Blocks };

struct GenerativeSpec {
  std::size_t num_entities = 0;
  std::size_t num_rankers = 0;
  std::vector<ClusterSpec> clusters;  // fixed mixture, used when `crp` is unset
  std::optional<CrpStructure> crp;
  /// Sampled: each ranker's cluster drawn from the weights. Blocks: rankers
  /// assigned in contiguous blocks sized by largest-remainder rounding.
  ClusterAllocation allocation = ClusterAllocation::Sampled;
  std::vector<double> reliability{0.5};  // one p_i per ranker, or a single shared value
  ObservationSpec observation;
  std::vector<std::string> entity_labels;

  /// Throws std::invalid_argument on inconsistencies.
  void validate() const;
};

struct GroundTruth {
  std::vector<int> c;
  std::vector<std::vector<int>> D;
  std::vector<std::vector<double>> skills;  // per ranker cluster, per entity
  std::vector<std::uint8_t> w;

  bool operator==(const GroundTruth&) const = default;
};

struct Simulation {
  Dataset data;
  GroundTruth truth;
};

/// Structure is drawn from stream 0 of `seed`; ranker i uses stream i + 1.
Simulation generate(const GenerativeSpec& spec, std::uint64_t seed);

GenerativeSpec parse_generative_spec(const std::string& json_text);
std::string serialize_truth(const GroundTruth& truth);
GroundTruth parse_truth(const std::string& json_text);

struct RecoveryScore {
  /// Rand index between the true partition and the pairwise clustering
  /// "i and j together iff Delta_ij < 0.5".
  double rand_index = 0.0;
  /// Fraction of retained draws whose N^r equals the true cluster count.
  double cluster_count_hit_rate = 0.0;
  /// Mean over rankers of |Pr(w_i = 1 | data) - w_i|.
  double weight_error = 0.0;
};

RecoveryScore recovery_score(const GroundTruth& truth, const Trace& trace);

}  // namespace wand
