#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace wand {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer applied to (seed, stream). Streams with different
/// indices are decorrelated, and stream 0 does not depend on how many other
/// streams exist.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

double draw_uniform(Rng& rng);

/// Gamma with shape/rate parameterization (mean shape / rate).
double draw_gamma(Rng& rng, double shape, double rate);

double draw_beta(Rng& rng, double a, double b);

/// Exponential with the given rate (mean 1 / rate).
double draw_exponential(Rng& rng, double rate);

bool draw_bernoulli(Rng& rng, double p);

/// Index drawn with probability proportional to exp(log_weights[k]).
/// Entries equal to -inf have probability zero. At least one entry must be
/// finite.
std::size_t draw_from_log_weights(Rng& rng, std::span<const double> log_weights);

/// Sequential Chinese restaurant process over `count` customers. Labels are
/// contiguous in first-appearance order, so the first customer sits at 0.
std::vector<int> draw_crp_partition(Rng& rng, std::size_t count, double concentration);

}  // namespace wand
