#include "wand/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace wand {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double draw_uniform(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

double draw_gamma(Rng& rng, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) {
    throw std::invalid_argument("gamma draw requires positive shape and rate");
  }
  return std::gamma_distribution<double>(shape, 1.0 / rate)(rng);
}

double draw_beta(Rng& rng, double a, double b) {
  const double x = draw_gamma(rng, a, 1.0);
  const double y = draw_gamma(rng, b, 1.0);
  const double total = x + y;
  if (total <= 0.0) {
    // Both gammas underflowed; only possible for tiny shapes.
    return a / (a + b);
  }
  return x / total;
}

double draw_exponential(Rng& rng, double rate) {
  if (!(rate > 0.0)) {
    throw std::invalid_argument("exponential draw requires a positive rate");
  }
  return std::exponential_distribution<double>(rate)(rng);
}

bool draw_bernoulli(Rng& rng, double p) {
  if (p >= 1.0) return true;
  if (p <= 0.0) return false;
  return draw_uniform(rng) < p;
}

std::size_t draw_from_log_weights(Rng& rng, std::span<const double> log_weights) {
  const double max_log = *std::max_element(log_weights.begin(), log_weights.end());
  if (!std::isfinite(max_log)) {
    throw std::invalid_argument("no candidate has finite log weight");
  }
  double total = 0.0;
  for (double lw : log_weights) total += std::exp(lw - max_log);
  double u = draw_uniform(rng) * total;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < log_weights.size(); ++k) {
    const double p = std::exp(log_weights[k] - max_log);
    if (p > 0.0) last_positive = k;
    if (u < p) return k;
    u -= p;
  }
  return last_positive;
}

std::vector<int> draw_crp_partition(Rng& rng, std::size_t count, double concentration) {
  std::vector<int> labels;
  labels.reserve(count);
  std::vector<double> sizes;
  for (std::size_t i = 0; i < count; ++i) {
    double u = draw_uniform(rng) * (static_cast<double>(i) + concentration);
    int chosen = static_cast<int>(sizes.size());
    for (std::size_t k = 0; k < sizes.size(); ++k) {
      if (u < sizes[k]) {
        chosen = static_cast<int>(k);
        break;
      }
      u -= sizes[k];
    }
    if (chosen == static_cast<int>(sizes.size())) sizes.push_back(0.0);
    sizes[chosen] += 1.0;
    labels.push_back(chosen);
  }
  return labels;
}

}  // namespace wand
