#include "wand/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "wand/likelihood.hpp"

namespace wand {

void SweepConfig::validate() const {
  if (thin < 1) throw std::invalid_argument("thinning interval must be at least 1");
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::size_t count_labels(const std::vector<int>& labels) {
  if (labels.empty()) return 0;
  return static_cast<std::size_t>(*std::max_element(labels.begin(), labels.end())) + 1;
}

double ranker_log_f(const Ranking& r, const std::vector<double>& z, bool informative, const std::vector<int>& d,
                    const std::vector<double>& atoms) {
  return complete_data_log_lik_with(r, z, informative, [&](EntityId e) {
    return atoms[static_cast<std::size_t>(d[static_cast<std::size_t>(e)])];
  });
}

// Skill-dependent part of the entity-move likelihood.
double atom_log_factor(double ranked, double exposure, double skill) {
  const double v = floor_skill(skill);
  return (ranked > 0.0 ? ranked * std::log(v) : 0.0) - exposure * v;
}

struct AuxRankerCluster {
  std::vector<int> d;
  std::vector<double> atoms;
  double gamma = 1.0;
};

}  // namespace

void update_ranker_allocations(ChainState& state, const Dataset& data, const Hyperparams& h, Rng& rng) {
  const std::size_t n = data.num_rankers();
  const std::size_t K = data.num_entities;
  const auto m = static_cast<std::size_t>(h.m_r);
  const double log_aux_prior = std::log(state.alpha / static_cast<double>(h.m_r));

  std::vector<int> counts(state.Lambda.size(), 0);
  for (int ci : state.c) ++counts[static_cast<std::size_t>(ci)];

  std::vector<std::size_t> existing;
  std::vector<double> log_w;
  std::vector<AuxRankerCluster> fresh(m);

  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = data.rankings[i];
    const bool informative = state.w[i] != 0;
    const auto old = static_cast<std::size_t>(state.c[i]);
    --counts[old];
    const bool singleton = counts[old] == 0;

    existing.clear();
    log_w.clear();
    for (std::size_t s = 0; s < counts.size(); ++s) {
      if (counts[s] == 0) continue;
      existing.push_back(s);
      log_w.push_back(std::log(static_cast<double>(counts[s])) +
                      ranker_log_f(r, state.Z[i], informative, state.D[s], state.Lambda[s]));
    }
    // A singleton's own cluster stands in for the first auxiliary.
    const std::size_t first_fresh = singleton ? 1 : 0;
    if (singleton) {
      log_w.push_back(log_aux_prior + ranker_log_f(r, state.Z[i], informative, state.D[old], state.Lambda[old]));
    }
    for (std::size_t k = first_fresh; k < m; ++k) {
      auto& aux = fresh[k];
      aux.gamma = draw_gamma(rng, h.a_gamma, h.b_gamma);
      aux.d = draw_crp_partition(rng, K, aux.gamma);
      aux.atoms.resize(count_labels(aux.d));
      for (double& v : aux.atoms) v = floor_skill(draw_gamma(rng, h.a, 1.0));
      log_w.push_back(log_aux_prior + ranker_log_f(r, state.Z[i], informative, aux.d, aux.atoms));
    }

    const std::size_t pick = draw_from_log_weights(rng, log_w);
    if (pick < existing.size()) {
      state.c[i] = static_cast<int>(existing[pick]);
      ++counts[existing[pick]];
      continue;
    }
    const std::size_t aux_index = pick - existing.size();
    if (singleton && aux_index == 0) {
      ++counts[old];
      continue;
    }
    auto& chosen = fresh[aux_index];
    state.D.push_back(std::move(chosen.d));
    state.Lambda.push_back(std::move(chosen.atoms));
    state.gamma.push_back(chosen.gamma);
    counts.push_back(1);
    state.c[i] = static_cast<int>(counts.size() - 1);
  }
  relabel(state);
}

EntityStatistics entity_statistics(const ChainState& state, const Dataset& data) {
  const std::size_t nr = state.Lambda.size();
  const std::size_t K = data.num_entities;
  EntityStatistics stats;
  stats.ranked.assign(nr, std::vector<double>(K, 0.0));
  stats.exposure.assign(nr, std::vector<double>(K, 0.0));
  for (std::size_t i = 0; i < data.num_rankers(); ++i) {
    if (state.w[i] == 0) continue;
    const auto s = static_cast<std::size_t>(state.c[i]);
    const auto& r = data.rankings[i];
    const auto& z = state.Z[i];
    double prefix = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) {
      prefix += z[j];
      const auto e = static_cast<std::size_t>(r.items()[j]);
      stats.ranked[s][e] += 1.0;
      stats.exposure[s][e] += prefix;
    }
    for (EntityId e : r.unranked()) stats.exposure[s][static_cast<std::size_t>(e)] += prefix;
  }
  return stats;
}

void update_entity_allocations(ChainState& state, const Dataset& data, const Hyperparams& h, Rng& rng) {
  const std::size_t K = data.num_entities;
  const auto m = static_cast<std::size_t>(h.m_e);
  const EntityStatistics stats = entity_statistics(state, data);

  std::vector<std::size_t> existing;
  std::vector<double> log_w;
  std::vector<double> fresh(m);

  for (std::size_t s = 0; s < state.Lambda.size(); ++s) {
    auto& d = state.D[s];
    auto& atoms = state.Lambda[s];
    const double log_aux_prior = std::log(state.gamma[s] / static_cast<double>(h.m_e));
    std::vector<int> counts(atoms.size(), 0);
    for (int t : d) ++counts[static_cast<std::size_t>(t)];

    for (std::size_t l = 0; l < K; ++l) {
      const double ranked = stats.ranked[s][l];
      const double exposure = stats.exposure[s][l];
      const auto old = static_cast<std::size_t>(d[l]);
      --counts[old];
      const bool singleton = counts[old] == 0;

      existing.clear();
      log_w.clear();
      for (std::size_t t = 0; t < counts.size(); ++t) {
        if (counts[t] == 0) continue;
        existing.push_back(t);
        log_w.push_back(std::log(static_cast<double>(counts[t])) + atom_log_factor(ranked, exposure, atoms[t]));
      }
      const std::size_t first_fresh = singleton ? 1 : 0;
      if (singleton) log_w.push_back(log_aux_prior + atom_log_factor(ranked, exposure, atoms[old]));
      for (std::size_t k = first_fresh; k < m; ++k) {
        fresh[k] = floor_skill(draw_gamma(rng, h.a, 1.0));
        log_w.push_back(log_aux_prior + atom_log_factor(ranked, exposure, fresh[k]));
      }

      const std::size_t pick = draw_from_log_weights(rng, log_w);
      if (pick < existing.size()) {
        d[l] = static_cast<int>(existing[pick]);
        ++counts[existing[pick]];
        continue;
      }
      const std::size_t aux_index = pick - existing.size();
      if (singleton && aux_index == 0) {
        ++counts[old];
        continue;
      }
      atoms.push_back(fresh[aux_index]);
      counts.push_back(1);
      d[l] = static_cast<int>(atoms.size() - 1);
    }
  }
  relabel(state);
}

std::vector<std::vector<GammaParams>> skill_conditionals(const ChainState& state, const Dataset& data,
                                                         const Hyperparams& h) {
  const EntityStatistics stats = entity_statistics(state, data);
  std::vector<std::vector<GammaParams>> out(state.Lambda.size());
  for (std::size_t s = 0; s < state.Lambda.size(); ++s) {
    out[s].assign(state.Lambda[s].size(), GammaParams{h.a, 1.0});
    for (std::size_t l = 0; l < data.num_entities; ++l) {
      auto& g = out[s][static_cast<std::size_t>(state.D[s][l])];
      g.shape += stats.ranked[s][l];
      g.rate += stats.exposure[s][l];
    }
  }
  return out;
}

void update_skills(ChainState& state, const Dataset& data, const Hyperparams& h, Rng& rng) {
  const auto params = skill_conditionals(state, data, h);
  for (std::size_t s = 0; s < params.size(); ++s) {
    for (std::size_t t = 0; t < params[s].size(); ++t) {
      state.Lambda[s][t] = floor_skill(draw_gamma(rng, params[s][t].shape, params[s][t].rate));
    }
  }
}

void update_latents(ChainState& state, const Dataset& data, Rng& rng) { draw_latents(state, data, rng); }

double weight_log_odds(const ChainState& state, const Dataset& data, std::size_t ranker) {
  const auto s = static_cast<std::size_t>(state.c[ranker]);
  const auto& r = data.rankings[ranker];
  const double p = data.reliability_prior[ranker];
  const double log_p1 = std::log(p) + ranker_log_f(r, state.Z[ranker], true, state.D[s], state.Lambda[s]);
  const double log_p0 = (p >= 1.0 ? kNegInf : std::log1p(-p)) +
                        ranker_log_f(r, state.Z[ranker], false, state.D[s], state.Lambda[s]);
  return log_p1 - log_p0;
}

void update_weights(ChainState& state, const Dataset& data, Rng& rng) {
  for (std::size_t i = 0; i < data.num_rankers(); ++i) {
    const double log_odds = weight_log_odds(state, data, i);
    // Pr(w=1) = 1 / (1 + exp(-log_odds)), evaluated stably on both sides.
    double p1;
    if (log_odds >= 0.0) {
      p1 = 1.0 / (1.0 + std::exp(-log_odds));
    } else {
      const double e = std::exp(log_odds);
      p1 = e / (1.0 + e);
    }
    state.w[i] = draw_bernoulli(rng, p1) ? 1 : 0;
  }
}

ConcentrationMixture concentration_mixture(double prior_shape, double prior_rate, std::size_t num_clusters,
                                           std::size_t num_items, double eta) {
  ConcentrationMixture mix;
  const double k = static_cast<double>(num_clusters);
  mix.rate = prior_rate - std::log(eta);
  mix.shape_hi = prior_shape + k;
  const double odds = (prior_shape + k - 1.0) / (static_cast<double>(num_items) * mix.rate);
  mix.pi = odds / (1.0 + odds);
  return mix;
}

double draw_concentration(Rng& rng, double current, double prior_shape, double prior_rate, std::size_t num_clusters,
                          std::size_t num_items) {
  const double eta = std::clamp(draw_beta(rng, current + 1.0, static_cast<double>(num_items)),
                                std::numeric_limits<double>::min(), 1.0);
  const auto mix = concentration_mixture(prior_shape, prior_rate, num_clusters, num_items, eta);
  const double shape = draw_bernoulli(rng, mix.pi) ? mix.shape_hi : mix.shape_hi - 1.0;
  return std::max(draw_gamma(rng, shape, mix.rate), std::numeric_limits<double>::min());
}

void update_concentrations(ChainState& state, const Dataset& data, const Hyperparams& h, Rng& rng) {
  state.alpha =
      draw_concentration(rng, state.alpha, h.a_alpha, h.b_alpha, state.num_ranker_clusters(), data.num_rankers());
  for (std::size_t s = 0; s < state.gamma.size(); ++s) {
    state.gamma[s] =
        draw_concentration(rng, state.gamma[s], h.a_gamma, h.b_gamma, state.num_entity_clusters(s), data.num_entities);
  }
}

void rescale(ChainState& state, const Hyperparams& h, Rng& rng) {
  const double n_atoms = static_cast<double>(state.total_atoms());
  const double target = draw_gamma(rng, n_atoms * h.a, 1.0);
  const double factor = target / state.total_skill();
  for (auto& row : state.Lambda) {
    for (double& v : row) v = floor_skill(v * factor);
  }
}

void gibbs_sweep(ChainState& state, const Dataset& data, const Hyperparams& h, bool rescale_enabled, Rng& rng) {
  update_ranker_allocations(state, data, h, rng);
  update_entity_allocations(state, data, h, rng);
  update_skills(state, data, h, rng);
  update_latents(state, data, rng);
  update_weights(state, data, rng);
  update_concentrations(state, data, h, rng);
  if (rescale_enabled) {
    rescale(state, h, rng);
    update_latents(state, data, rng);
  }
}

void run_chain(const Dataset& data, const Hyperparams& h, const SweepConfig& cfg, std::uint64_t seed,
               const std::function<void(const TraceRecord&)>& sink) {
  cfg.validate();
  h.validate();
  data.validate();
  Rng rng(seed);
  ChainState state = init_from_prior(data, h, rng);
  const std::size_t total = cfg.burn_in + cfg.iterations;
  for (std::size_t sweep = 1; sweep <= total; ++sweep) {
    gibbs_sweep(state, data, h, cfg.rescale_enabled, rng);
    if (sweep <= cfg.burn_in || (sweep - cfg.burn_in) % cfg.thin != 0) continue;
    TraceRecord record;
    record.iter = sweep;
    record.loglik = complete_data_log_lik(state, data);
    record.state = state;
    record.state.Z.clear();
    sink(record);
  }
}

Trace run_chain(const Dataset& data, const Hyperparams& h, const SweepConfig& cfg, std::uint64_t seed) {
  Trace trace;
  trace.meta.seed = seed;
  trace.meta.hyper = h;
  trace.meta.iterations = cfg.iterations;
  trace.meta.burn_in = cfg.burn_in;
  trace.meta.thin = cfg.thin;
  trace.meta.rescale = cfg.rescale_enabled;
  trace.meta.num_rankers = data.num_rankers();
  trace.meta.num_entities = data.num_entities;
  run_chain(data, h, cfg, seed, [&](const TraceRecord& r) { trace.records.push_back(r); });
  return trace;
}

}  // namespace wand
