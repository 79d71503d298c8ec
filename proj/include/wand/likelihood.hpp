#pragma once

// Plackett-Luce likelihood kernels: full and top-M/partial orderings, the
// reliability-weighted variant, and the complete-data likelihood under the
// exponential latent-variable augmentation.
//
// Everything is evaluated in log space. Denominators are built from a suffix
// sum over the ranked items plus the unranked mass, O(n_i) per call.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "wand/random.hpp"
#include "wand/ranking_data.hpp"

namespace wand {

/// Skills are floored here before logs are taken.
inline constexpr double kSkillFloor = 1e-300;

inline double floor_skill(double v) { return v < kSkillFloor ? kSkillFloor : v; }

/// Entity id -> skill for a single ranker. Entities may be left unassigned;
/// looking one up throws.
class SkillAssignment {
 public:
  SkillAssignment() = default;
  /// One entry per entity id; NaN marks an unassigned entity. Any other
  /// value must be positive and finite.
  explicit SkillAssignment(std::vector<double> by_entity);

  static SkillAssignment unassigned(std::size_t num_entities);

  void set(EntityId entity, double skill);
  bool has(EntityId entity) const;
  double at(EntityId entity) const;
  std::size_t size() const { return values_.size(); }

  /// Every assigned skill multiplied by `factor` (> 0).
  SkillAssignment scaled(double factor) const;

 private:
  std::vector<double> values_;
};

double pl_log_prob(const Ranking& r, const SkillAssignment& s);

/// log((K_i - n_i)! / K_i!): the uniform law over ordered n_i-tuples drawn
/// from the considered set.
double uninformative_log_prob(std::size_t considered_count, std::size_t ranked_count);
double uninformative_log_prob(const Ranking& r);

double weighted_pl_log_prob(const Ranking& r, const SkillAssignment& s, bool informative);

double complete_data_log_lik(const Ranking& r, std::span<const double> z, const SkillAssignment& s,
                             bool informative);

/// Number of ordered `ranked_count`-tuples drawn from `considered_count`
/// entities, as a double (it overflows integers for realistic sizes).
double ordering_count(std::size_t considered_count, std::size_t ranked_count);

/// Draws an ordering of `count` entities from `considered` by sequential
/// sampling without replacement, proportional to skill when informative and
/// uniformly otherwise.
template <class SkillFn>
std::vector<EntityId> draw_ordering(Rng& rng, std::span<const EntityId> considered, std::size_t count,
                                    bool informative, SkillFn&& skill);

// -----------------------------------------------------------------------------
// Hot-path kernels shared with the sampler. `skill(entity)` returns the
// (already positive) skill of an entity for the ranker in question.

/// S_{ij} for j = 0..n_i-1 written into `rates`.
template <class SkillFn>
void denominator_rates(const Ranking& r, bool informative, SkillFn&& skill, std::vector<double>& rates) {
  const auto& items = r.items();
  const std::size_t n = items.size();
  rates.resize(n);
  if (!informative) {
    const double k = static_cast<double>(r.considered_count());
    for (std::size_t j = 0; j < n; ++j) rates[j] = k - static_cast<double>(j);
    return;
  }
  double tail = 0.0;
  for (EntityId e : r.unranked()) tail += floor_skill(skill(e));
  for (std::size_t j = n; j-- > 0;) {
    tail += floor_skill(skill(items[j]));
    rates[j] = tail;
  }
}

template <class SkillFn>
double pl_log_prob_with(const Ranking& r, SkillFn&& skill) {
  const auto& items = r.items();
  double tail = 0.0;
  for (EntityId e : r.unranked()) tail += floor_skill(skill(e));
  double lp = 0.0;
  for (std::size_t j = items.size(); j-- > 0;) {
    const double v = floor_skill(skill(items[j]));
    tail += v;
    lp += std::log(v) - std::log(tail);
  }
  return lp;
}

template <class SkillFn>
double complete_data_log_lik_with(const Ranking& r, std::span<const double> z, bool informative, SkillFn&& skill) {
  const auto& items = r.items();
  const std::size_t n = items.size();
  if (!informative) {
    const double k = static_cast<double>(r.considered_count());
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) total -= (k - static_cast<double>(j)) * z[j];
    return total;
  }
  double tail = 0.0;
  for (EntityId e : r.unranked()) tail += floor_skill(skill(e));
  double total = 0.0;
  for (std::size_t j = n; j-- > 0;) {
    const double v = floor_skill(skill(items[j]));
    tail += v;
    total += std::log(v) - tail * z[j];
  }
  return total;
}

template <class SkillFn>
std::vector<EntityId> draw_ordering(Rng& rng, std::span<const EntityId> considered, std::size_t count,
                                    bool informative, SkillFn&& skill) {
  if (count > considered.size()) throw std::invalid_argument("cannot rank more entities than considered");
  std::vector<EntityId> pool(considered.begin(), considered.end());
  std::vector<double> weights(pool.size(), 1.0);
  double remaining = static_cast<double>(pool.size());
  if (informative) {
    remaining = 0.0;
    for (std::size_t k = 0; k < pool.size(); ++k) {
      weights[k] = floor_skill(skill(pool[k]));
      remaining += weights[k];
    }
  }
  std::vector<EntityId> out;
  out.reserve(count);
  for (std::size_t step = 0; step < count; ++step) {
    const std::size_t live = pool.size() - step;
    double u = draw_uniform(rng) * remaining;
    std::size_t pick = live - 1;
    for (std::size_t k = 0; k < live; ++k) {
      if (u < weights[k]) {
        pick = k;
        break;
      }
      u -= weights[k];
    }
    out.push_back(pool[pick]);
    std::swap(pool[pick], pool[live - 1]);
    std::swap(weights[pick], weights[live - 1]);
    remaining = 0.0;
    for (std::size_t k = 0; k + 1 < live; ++k) remaining += weights[k];
  }
  return out;
}

}  // namespace wand
