#pragma once

// Marginal Gibbs sampler for the weighted Plackett-Luce mixture under a
// nested Dirichlet process prior. Ranker and entity allocations use Neal's
// auxiliary-component scheme (Algorithm 8) at both levels; skills are
// conjugate given the exponential latents; concentrations follow Escobar &
// West's two-component gamma mixture.
//
// One sweep updates, in order: c, D, Lambda, Z, w, (alpha, gamma), then
// rescales Lambda and refreshes Z.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "wand/chain_state.hpp"
#include "wand/random.hpp"
#include "wand/ranking_data.hpp"

namespace wand {

struct SweepConfig {
  std::size_t iterations = 0;
  std::size_t burn_in = 0;
  std::size_t thin = 1;
  bool rescale_enabled = true;

  void validate() const;
};

void update_ranker_allocations(ChainState& state, const Dataset& data, const Hyperparams& h, Rng& rng);
void update_entity_allocations(ChainState& state, const Dataset& data, const Hyperparams& h, Rng& rng);
void update_skills(ChainState& state, const Dataset& data, const Hyperparams& h, Rng& rng);
void update_latents(ChainState& state, const Dataset& data, Rng& rng);
void update_weights(ChainState& state, const Dataset& data, Rng& rng);
void update_concentrations(ChainState& state, const Dataset& data, const Hyperparams& h, Rng& rng);
void rescale(ChainState& state, const Hyperparams& h, Rng& rng);

/// One full sweep. With `rescale_enabled` the latents are redrawn after the
/// rescale so that Z stays consistent with the rescaled skills.
void gibbs_sweep(ChainState& state, const Dataset& data, const Hyperparams& h, bool rescale_enabled, Rng& rng);

/// Runs burn_in + iterations sweeps from a prior draw and hands every
/// thin-th post-burn-in state to `sink`. Record iteration indices count
/// sweeps from 1, burn-in included.
void run_chain(const Dataset& data, const Hyperparams& h, const SweepConfig& cfg, std::uint64_t seed,
               const std::function<void(const TraceRecord&)>& sink);

Trace run_chain(const Dataset& data, const Hyperparams& h, const SweepConfig& cfg, std::uint64_t seed);

// -----------------------------------------------------------------------------
// Full-conditional pieces, exposed for testing.

/// Sufficient statistics of the informative rankers for each (ranker
/// cluster s, entity l):
///   ranked[s][l]    number of informative rankers in s that rank l
///   exposure[s][l]  sum over those rankers of the latents z_{ij} whose
///                   denominator contains l (positions up to and including
///                   l's, or every position when l is considered but
///                   unranked)
/// With these, the data factor of assigning skill v to entity l in cluster
/// s is v^ranked * exp(-v * exposure).
struct EntityStatistics {
  std::vector<std::vector<double>> ranked;
  std::vector<std::vector<double>> exposure;
};

EntityStatistics entity_statistics(const ChainState& state, const Dataset& data);

struct GammaParams {
  double shape = 1.0;
  double rate = 1.0;
};

/// Gamma full conditional of every atom lambda_{st}.
std::vector<std::vector<GammaParams>> skill_conditionals(const ChainState& state, const Dataset& data,
                                                         const Hyperparams& h);

/// log Pr(w_i = 1 | ...) - log Pr(w_i = 0 | ...).
double weight_log_odds(const ChainState& state, const Dataset& data, std::size_t ranker);

/// Escobar-West update of a DP concentration given the auxiliary eta:
/// the result is Ga(shape_hi, rate) with probability `pi`, else
/// Ga(shape_hi - 1, rate).
struct ConcentrationMixture {
  double pi = 0.0;
  double shape_hi = 1.0;
  double rate = 1.0;
};

ConcentrationMixture concentration_mixture(double prior_shape, double prior_rate, std::size_t num_clusters,
                                           std::size_t num_items, double eta);

/// Draws eta ~ Beta(current + 1, num_items) and then the concentration.
double draw_concentration(Rng& rng, double current, double prior_shape, double prior_rate, std::size_t num_clusters,
                          std::size_t num_items);

}  // namespace wand
