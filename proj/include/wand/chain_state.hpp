#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "wand/likelihood.hpp"
#include "wand/random.hpp"
#include "wand/ranking_data.hpp"

namespace wand {

/// Prior and sampler settings. G0 = Ga(a, 1); alpha ~ Ga(a_alpha, b_alpha);
/// each gamma_s ~ Ga(a_gamma, b_gamma) (shape/rate). m_r and m_e are the
/// auxiliary-component counts of the ranker and entity allocation moves.
struct Hyperparams {
  double a = 1.0;
  double a_alpha = 1.0;
  double b_alpha = 1.0;
  double a_gamma = 3.0;
  double b_gamma = 3.0;
  int m_r = 3;
  int m_e = 3;
  int L = 1;

  void validate() const;
  bool operator==(const Hyperparams&) const = default;
};

/// Full state of the marginal Gibbs sampler.
///
///   c[i]          ranker cluster of ranker i
///   D[s][l]       entity cluster of entity l within ranker cluster s
///   Lambda[s][t]  skill atom t of ranker cluster s
///   Z[i][j]       latent exponential for position j of ranking i
///   w[i]          reliability indicator of ranker i
///   gamma[s]      entity-level concentration of ranker cluster s
struct ChainState {
  std::vector<int> c;
  std::vector<std::vector<int>> D;
  std::vector<std::vector<double>> Lambda;
  std::vector<std::vector<double>> Z;
  std::vector<std::uint8_t> w;
  double alpha = 1.0;
  std::vector<double> gamma;

  std::size_t num_ranker_clusters() const { return Lambda.size(); }
  std::size_t num_entity_clusters(std::size_t s) const { return Lambda[s].size(); }
  /// N: number of distinct atoms across all ranker clusters.
  std::size_t total_atoms() const;
  double total_skill() const;

  /// Throws std::logic_error describing the first broken invariant.
  /// Z is checked only when non-empty (snapshots drop it).
  void check_invariants(const Dataset& data) const;

  bool operator==(const ChainState&) const = default;
};

ChainState init_from_prior(const Dataset& data, const Hyperparams& h, Rng& rng);
ChainState init_from_prior(const Dataset& data, const Hyperparams& h, std::uint64_t seed);

/// Drops unused ranker clusters and atoms, then maps the survivors onto
/// contiguous labels in first-appearance order (over rankers for c, over
/// entities for each row of D). Lambda, gamma and D move with their labels.
void relabel(ChainState& state);

/// lambda_{c_i, d_{c_i, j}}.
double skill_of(const ChainState& state, std::size_t ranker, EntityId entity);

SkillAssignment skills_for(const ChainState& state, std::size_t ranker);

/// Draws every z_{ij} from its exponential full conditional.
void draw_latents(ChainState& state, const Dataset& data, Rng& rng);

/// Sum over rankers of the complete-data log-likelihood.
double complete_data_log_lik(const ChainState& state, const Dataset& data);

// -----------------------------------------------------------------------------
// Trace

struct TraceMetadata {
  std::uint64_t seed = 0;
  Hyperparams hyper;
  std::size_t iterations = 0;
  std::size_t burn_in = 0;
  std::size_t thin = 1;
  bool rescale = true;
  std::size_t num_rankers = 0;
  std::size_t num_entities = 0;

  bool operator==(const TraceMetadata&) const = default;
};

/// One retained draw. `state.Z` is left empty.
struct TraceRecord {
  std::size_t iter = 0;
  ChainState state;
  double loglik = 0.0;

  bool operator==(const TraceRecord&) const = default;
};

struct Trace {
  TraceMetadata meta;
  std::vector<TraceRecord> records;

  bool empty() const { return records.empty(); }
  std::size_t size() const { return records.size(); }
};

/// Newline-delimited JSON: a header line with the metadata, then one line
/// per record.
class TraceWriter {
 public:
  TraceWriter(std::ostream& out, const TraceMetadata& meta);
  void write(const TraceRecord& record);

 private:
  std::ostream* out_;
  std::size_t last_iter_ = 0;
  bool any_ = false;
};

void write_trace(std::ostream& out, const Trace& trace);
Trace read_trace(std::istream& in);
Trace load_trace(const std::string& path);

}  // namespace wand
