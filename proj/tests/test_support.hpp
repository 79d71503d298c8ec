#pragma once

// Shared fixtures and statistical helpers for the test suites.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "wand/chain_state.hpp"
#include "wand/ranking_data.hpp"

namespace wand::testing {

/// Kolmogorov-Smirnov distance between the empirical CDF of `samples` and
/// `cdf`.
inline double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double f = cdf(samples[k]);
    d = std::max({d, std::abs(f - static_cast<double>(k) / n), std::abs(static_cast<double>(k + 1) / n - f)});
  }
  return d;
}

inline double mean(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

inline double variance(const std::vector<double>& xs) {
  const double m = mean(xs);
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  return v / static_cast<double>(xs.size() - 1);
}

/// Variance of the sample mean of an autocorrelated series, by batch means.
inline double batch_means_variance_of_mean(const std::vector<double>& xs, std::size_t batches = 50) {
  const std::size_t size = xs.size() / batches;
  std::vector<double> means;
  for (std::size_t b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t k = 0; k < size; ++k) s += xs[b * size + k];
    means.push_back(s / static_cast<double>(size));
  }
  return variance(means) / static_cast<double>(batches);
}

/// Three rankers over four entities covering complete, top-M and partial
/// observations.
inline Dataset small_mixed_dataset() {
  Dataset data;
  data.num_entities = 4;
  data.rankings.emplace_back(std::vector<EntityId>{2, 0, 3, 1});
  data.rankings.emplace_back(std::vector<EntityId>{1, 3}, std::vector<EntityId>{0, 1, 2, 3});
  data.rankings.emplace_back(std::vector<EntityId>{3, 0}, std::vector<EntityId>{0, 2, 3});
  data.reliability_prior = {0.75, 0.6, 0.9};
  return data;
}

/// Hand-built state for small_mixed_dataset(): rankers 0 and 2 share cluster
/// 0, ranker 1 sits alone in cluster 1.
inline ChainState small_mixed_state() {
  ChainState st;
  st.c = {0, 1, 0};
  st.D = {{0, 1, 0, 2}, {0, 0, 1, 1}};
  st.Lambda = {{1.5, 0.4, 2.2}, {0.7, 1.9}};
  st.Z = {{0.3, 0.5, 0.2, 1.1}, {0.25, 0.6}, {0.4, 0.8}};
  st.w = {1, 1, 1};
  st.alpha = 0.8;
  st.gamma = {1.2, 0.9};
  return st;
}

inline Dataset complete_dataset(std::size_t n, std::size_t K, double p = 0.5) {
  Dataset data;
  data.num_entities = K;
  std::vector<EntityId> items(K);
  std::iota(items.begin(), items.end(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    data.rankings.emplace_back(items);
    std::rotate(items.begin(), items.begin() + 1, items.end());
  }
  data.reliability_prior.assign(n, p);
  return data;
}

}  // namespace wand::testing
