#include "wand/predictive.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <string>

#include "wand/likelihood.hpp"
#include "wand/parallel.hpp"

namespace wand {

std::string_view to_string(PredictiveMethod method) {
  switch (method) {
    case PredictiveMethod::Full: return "full";
    case PredictiveMethod::Truncated: return "truncated";
    case PredictiveMethod::Approximate: return "approximate";
  }
  return "unknown";
}

PredictiveMethod parse_predictive_method(std::string_view name) {
  if (name == "full") return PredictiveMethod::Full;
  if (name == "truncated") return PredictiveMethod::Truncated;
  if (name == "approximate") return PredictiveMethod::Approximate;
  throw std::invalid_argument("unknown predictive method '" + std::string(name) + "'");
}

namespace {

/// Skills of one ranker under one retained draw, indexed by entity id.
struct DrawSkills {
  std::vector<double> skill;
  bool informative = true;
};

std::vector<DrawSkills> per_draw_skills(const Trace& trace, std::size_t ranker) {
  std::vector<DrawSkills> out;
  out.reserve(trace.size());
  for (const auto& rec : trace.records) {
    const auto& st = rec.state;
    const auto s = static_cast<std::size_t>(st.c.at(ranker));
    const auto& row = st.D[s];
    DrawSkills d;
    d.skill.resize(row.size());
    for (std::size_t e = 0; e < row.size(); ++e) d.skill[e] = floor_skill(st.Lambda[s][static_cast<std::size_t>(row[e])]);
    d.informative = st.w[ranker] != 0;
    out.push_back(std::move(d));
  }
  return out;
}

/// Weighted PL probability of ordering `y` over `considered`, with `in_y` a
/// scratch mask sized to the entity count.
double ordering_prob(const std::vector<EntityId>& y, const std::vector<EntityId>& considered, const DrawSkills& d,
                     double uniform_prob, std::vector<char>& in_y) {
  if (!d.informative) return uniform_prob;
  for (EntityId e : y) in_y[static_cast<std::size_t>(e)] = 1;
  double tail = 0.0;
  for (EntityId e : considered) {
    if (!in_y[static_cast<std::size_t>(e)]) tail += d.skill[static_cast<std::size_t>(e)];
  }
  double lp = 0.0;
  for (std::size_t j = y.size(); j-- > 0;) {
    const double v = d.skill[static_cast<std::size_t>(y[j])];
    tail += v;
    lp += std::log(v) - std::log(tail);
  }
  for (EntityId e : y) in_y[static_cast<std::size_t>(e)] = 0;
  return std::exp(lp);
}

void enumerate_orderings(const std::vector<EntityId>& pool, std::size_t length, std::vector<EntityId>& prefix,
                         std::vector<char>& used, std::vector<std::vector<EntityId>>& out) {
  if (prefix.size() == length) {
    out.push_back(prefix);
    return;
  }
  for (std::size_t k = 0; k < pool.size(); ++k) {
    if (used[k]) continue;
    used[k] = 1;
    prefix.push_back(pool[k]);
    enumerate_orderings(pool, length, prefix, used, out);
    prefix.pop_back();
    used[k] = 0;
  }
}

void rao_blackwellise(PredictiveDistribution& dist, const Ranking& r, const std::vector<DrawSkills>& draws,
                      std::size_t num_entities) {
  const double uniform = std::exp(uninformative_log_prob(r));
  std::vector<char> in_y(num_entities, 0);
  dist.probs.assign(dist.orderings.size(), 0.0);
  for (const auto& d : draws) {
    for (std::size_t k = 0; k < dist.orderings.size(); ++k) {
      dist.probs[k] += ordering_prob(dist.orderings[k], r.considered(), d, uniform, in_y);
    }
  }
  for (double& p : dist.probs) p /= static_cast<double>(draws.size());
}

void require_ranker(const Trace& trace, const Dataset& data, std::size_t ranker) {
  if (trace.empty()) throw std::invalid_argument("trace has no retained samples");
  if (ranker >= data.num_rankers()) throw std::out_of_range("ranker index out of range");
}

}  // namespace

PredictiveDistribution full_predictive(const Trace& trace, const Dataset& data, std::size_t ranker, double cap) {
  require_ranker(trace, data, ranker);
  const Ranking& r = data.rankings[ranker];
  PredictiveDistribution dist;
  dist.method = PredictiveMethod::Full;
  dist.total_orderings = ordering_count(r.considered_count(), r.size());
  if (dist.total_orderings > cap) {
    throw EnumerationCapExceeded("ranking " + std::to_string(ranker) + " has " + std::to_string(dist.total_orderings) +
                                 " orderings, above the enumeration cap; use a Monte Carlo method");
  }
  std::vector<EntityId> prefix;
  std::vector<char> used(r.considered_count(), 0);
  enumerate_orderings(r.considered(), r.size(), prefix, used, dist.orderings);
  dist.observed = static_cast<std::size_t>(
      std::find(dist.orderings.begin(), dist.orderings.end(), r.items()) - dist.orderings.begin());
  rao_blackwellise(dist, r, per_draw_skills(trace, ranker), data.num_entities);
  return dist;
}

PredictiveDistribution monte_carlo_predictive(const Trace& trace, const Dataset& data, std::size_t ranker,
                                              std::size_t samples_per_iter, PredictiveMethod mode, Rng& rng) {
  require_ranker(trace, data, ranker);
  if (samples_per_iter < 1) throw std::invalid_argument("samples per iteration must be at least 1");
  if (mode == PredictiveMethod::Full) throw std::invalid_argument("Monte Carlo predictive needs a sampled mode");
  const Ranking& r = data.rankings[ranker];
  const auto draws = per_draw_skills(trace, ranker);

  PredictiveDistribution dist;
  dist.method = mode;
  dist.total_orderings = ordering_count(r.considered_count(), r.size());
  std::map<std::vector<EntityId>, std::size_t> index;
  index.emplace(r.items(), 0);
  dist.orderings.push_back(r.items());
  dist.observed = 0;
  for (const auto& d : draws) {
    for (std::size_t l = 0; l < samples_per_iter; ++l) {
      auto y = draw_ordering(rng, r.considered(), r.size(), d.informative,
                             [&](EntityId e) { return d.skill[static_cast<std::size_t>(e)]; });
      if (index.emplace(y, dist.orderings.size()).second) dist.orderings.push_back(std::move(y));
    }
  }
  rao_blackwellise(dist, r, draws, data.num_entities);

  double mass = 0.0;
  for (double p : dist.probs) mass += p;
  const double absent = dist.total_orderings - static_cast<double>(dist.orderings.size());
  if (mode == PredictiveMethod::Truncated || absent < 0.5) {
    for (double& p : dist.probs) p /= mass;
  } else {
    dist.absent_prob = std::max(0.0, 1.0 - mass) / absent;
  }
  return dist;
}

double diagnostic_probability(const PredictiveDistribution& dist) {
  const double obs = dist.observed_prob();
  const double threshold = obs * (1.0 + kTieTolerance);
  double at_most = 0.0;
  for (double p : dist.probs) {
    if (p <= threshold) at_most += 1.0;
  }
  switch (dist.method) {
    case PredictiveMethod::Truncated:
      return at_most / static_cast<double>(dist.probs.size());
    case PredictiveMethod::Approximate: {
      const double absent = dist.total_orderings - static_cast<double>(dist.orderings.size());
      if (absent > 0.0 && dist.absent_prob <= threshold) at_most += absent;
      return at_most / dist.total_orderings;
    }
    case PredictiveMethod::Full:
      break;
  }
  return at_most / dist.total_orderings;
}

PredictiveReport diagnostic_probabilities(const Trace& trace, const Dataset& data, const PredictiveOptions& opts) {
  if (opts.samples_per_iter < 1) throw std::invalid_argument("samples per iteration must be at least 1");
  if (trace.empty()) throw std::invalid_argument("trace has no retained samples");
  PredictiveReport report(data.num_rankers());
  parallel_for(data.num_rankers(), opts.threads, [&](std::size_t i) {
    const Ranking& r = data.rankings[i];
    PredictiveMethod method = opts.method.value_or(
        ordering_count(r.considered_count(), r.size()) <= opts.cap ? PredictiveMethod::Full : PredictiveMethod::Truncated);
    PredictiveDistribution dist;
    if (method == PredictiveMethod::Full) {
      dist = full_predictive(trace, data, i, opts.cap);
    } else {
      Rng rng(derive_seed(opts.seed, i));
      dist = monte_carlo_predictive(trace, data, i, opts.samples_per_iter, method, rng);
    }
    report[i] = PredictiveEntry{i, method, dist.orderings.size(), dist.observed_prob(), diagnostic_probability(dist)};
  });
  return report;
}

void write_predictive_csv(std::ostream& out, const PredictiveReport& report) {
  out << "ranker,method,support_size,observed_prob,diagnostic_prob\n";
  char buf[64];
  for (const auto& e : report) {
    out << e.ranker << ',' << to_string(e.method) << ',' << e.support_size << ',';
    std::snprintf(buf, sizeof buf, "%.10g,%.10g", e.observed_prob, e.diagnostic_prob);
    out << buf << '\n';
  }
}

}  // namespace wand
