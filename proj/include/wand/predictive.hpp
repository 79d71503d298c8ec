#pragma once

// Posterior predictive checks for individual rankings. The predictive law of
// ranking i is the average over retained draws of the weighted Plackett-Luce
// law under that draw's skills and reliability; it is evaluated either over
// every ordering (full) or over a sampled support (truncated/approximate).

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "wand/chain_state.hpp"
#include "wand/ranking_data.hpp"

namespace wand {

enum class PredictiveMethod { Full, Truncated, Approximate };

std::string_view to_string(PredictiveMethod method);
PredictiveMethod parse_predictive_method(std::string_view name);

inline constexpr double kDefaultEnumerationCap = 1e5;
/// Relative tolerance under which two predictive probabilities count as tied.
inline constexpr double kTieTolerance = 1e-12;

class EnumerationCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PredictiveDistribution {
  PredictiveMethod method = PredictiveMethod::Full;
  std::vector<std::vector<EntityId>> orderings;  // the support P_i
  std::vector<double> probs;                     // aligned with orderings
  std::size_t observed = 0;                      // index of x_i in orderings
  double total_orderings = 0.0;                  // K_i! / (K_i - n_i)!
  /// Approximate mode only: probability given to each ordering outside the
  /// support. Zero otherwise.
  double absent_prob = 0.0;

  double observed_prob() const { return probs[observed]; }
};

/// Enumerates every ordered n_i-tuple of the considered set. Throws
/// EnumerationCapExceeded when there are more than `cap` of them.
PredictiveDistribution full_predictive(const Trace& trace, const Dataset& data, std::size_t ranker,
                                       double cap = kDefaultEnumerationCap);

/// Samples `samples_per_iter` orderings per retained draw, forms the support
/// {x_i} plus the unique draws, and Rao-Blackwellises over it. Truncated mode
/// renormalizes over the support; approximate mode spreads the missing mass
/// evenly over the orderings outside it.
PredictiveDistribution monte_carlo_predictive(const Trace& trace, const Dataset& data, std::size_t ranker,
                                              std::size_t samples_per_iter, PredictiveMethod mode, Rng& rng);

/// Proportion of orderings whose predictive probability is <= the observed
/// one (within kTieTolerance). The population is every ordering for the full
/// and approximate laws and the sampled support for the truncated law.
double diagnostic_probability(const PredictiveDistribution& dist);

struct PredictiveEntry {
  std::size_t ranker = 0;
  PredictiveMethod method = PredictiveMethod::Full;
  std::size_t support_size = 0;
  double observed_prob = 0.0;
  double diagnostic_prob = 0.0;
};

using PredictiveReport = std::vector<PredictiveEntry>;

struct PredictiveOptions {
  /// Unset: full enumeration when within the cap, truncated otherwise.
  std::optional<PredictiveMethod> method;
  std::size_t samples_per_iter = 1;
  double cap = kDefaultEnumerationCap;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

/// One entry per ranker. Ranker i draws from the stream derive_seed(seed, i),
/// so results do not depend on the thread count.
PredictiveReport diagnostic_probabilities(const Trace& trace, const Dataset& data, const PredictiveOptions& opts);

void write_predictive_csv(std::ostream& out, const PredictiveReport& report);

}  // namespace wand
