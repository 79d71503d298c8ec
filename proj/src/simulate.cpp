#include "wand/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "wand/likelihood.hpp"
#include "wand/summaries.hpp"

namespace wand {

using nlohmann::json;

void GenerativeSpec::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("generative spec: " + msg); };
  if (num_entities == 0 || num_rankers == 0) fail("need at least one entity and one ranker");
  if (!crp) {
    if (clusters.empty()) fail("a fixed mixture needs at least one cluster");
    double total = 0.0;
    for (const auto& cl : clusters) {
      if (!(cl.weight >= 0.0)) fail("cluster weights must be non-negative");
      total += cl.weight;
      if (cl.skills.size() != num_entities) fail("every cluster needs one skill per entity");
      for (double v : cl.skills) {
        if (!(v > 0.0) || !std::isfinite(v)) fail("skills must be positive and finite");
      }
    }
    if (std::abs(total - 1.0) > 1e-9) fail("cluster weights must sum to 1");
  } else {
    if (!(crp->alpha > 0.0) || !(crp->a > 0.0) || !(crp->a_gamma > 0.0) || !(crp->b_gamma > 0.0)) {
      fail("CRP parameters must be positive");
    }
    if (crp->gamma && !(*crp->gamma > 0.0)) fail("fixed gamma must be positive");
  }
  if (reliability.size() != 1 && reliability.size() != num_rankers) fail("reliability needs 1 or n entries");
  for (double p : reliability) {
    if (!(p > 0.0 && p <= 1.0)) fail("reliability priors must lie in (0, 1]");
  }
  const std::size_t k_i = observation.considered == 0 ? num_entities : observation.considered;
  if (k_i > num_entities) fail("considered count exceeds the number of entities");
  const bool top = observation.scheme == ObservationScheme::TopMComplete ||
                   observation.scheme == ObservationScheme::TopMPartial;
  if (top && (observation.top_m == 0 || observation.top_m > k_i)) fail("top-M needs 1 <= M <= K_i");
  if (!entity_labels.empty() && entity_labels.size() != num_entities) fail("entity_labels must cover every entity");
}

namespace {

std::vector<int> partition_by_value(const std::vector<double>& skills) {
  std::vector<int> d(skills.size());
  std::vector<double> seen;
  for (std::size_t l = 0; l < skills.size(); ++l) {
    const auto it = std::find(seen.begin(), seen.end(), skills[l]);
    if (it == seen.end()) {
      d[l] = static_cast<int>(seen.size());
      seen.push_back(skills[l]);
    } else {
      d[l] = static_cast<int>(it - seen.begin());
    }
  }
  return d;
}

std::vector<int> block_allocation(const std::vector<ClusterSpec>& clusters, std::size_t n) {
  std::vector<std::size_t> sizes(clusters.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t s = 0; s < clusters.size(); ++s) {
    const double exact = clusters[s].weight * static_cast<double>(n);
    sizes[s] = static_cast<std::size_t>(std::floor(exact));
    assigned += sizes[s];
    remainders.emplace_back(exact - std::floor(exact), s);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++sizes[remainders[k % remainders.size()].second];
  std::vector<int> c;
  for (std::size_t s = 0; s < sizes.size(); ++s) c.insert(c.end(), sizes[s], static_cast<int>(s));
  return c;
}

}  // namespace

Simulation generate(const GenerativeSpec& spec, std::uint64_t seed) {
  spec.validate();
  const std::size_t K = spec.num_entities;
  const std::size_t n = spec.num_rankers;
  Rng structure_rng(derive_seed(seed, 0));
  Simulation sim;
  GroundTruth& truth = sim.truth;

  if (spec.crp) {
    const auto& crp = *spec.crp;
    truth.c = draw_crp_partition(structure_rng, n, crp.alpha);
    const std::size_t nr = static_cast<std::size_t>(*std::max_element(truth.c.begin(), truth.c.end())) + 1;
    for (std::size_t s = 0; s < nr; ++s) {
      const double g = crp.gamma ? *crp.gamma : draw_gamma(structure_rng, crp.a_gamma, crp.b_gamma);
      auto d = draw_crp_partition(structure_rng, K, g);
      std::vector<double> atoms(static_cast<std::size_t>(*std::max_element(d.begin(), d.end())) + 1);
      for (double& v : atoms) v = floor_skill(draw_gamma(structure_rng, crp.a, 1.0));
      std::vector<double> skills(K);
      for (std::size_t l = 0; l < K; ++l) skills[l] = atoms[static_cast<std::size_t>(d[l])];
      truth.D.push_back(std::move(d));
      truth.skills.push_back(std::move(skills));
    }
  } else {
    if (spec.allocation == ClusterAllocation::Blocks) {
      truth.c = block_allocation(spec.clusters, n);
    } else {
      std::vector<double> log_w;
      for (const auto& cl : spec.clusters) log_w.push_back(std::log(cl.weight));
      for (std::size_t i = 0; i < n; ++i) truth.c.push_back(static_cast<int>(draw_from_log_weights(structure_rng, log_w)));
    }
    for (const auto& cl : spec.clusters) {
      truth.D.push_back(partition_by_value(cl.skills));
      truth.skills.push_back(cl.skills);
    }
  }

  Dataset& data = sim.data;
  data.num_entities = K;
  data.entity_labels = spec.entity_labels;
  std::vector<EntityId> all(K);
  std::iota(all.begin(), all.end(), 0);
  const auto& obs = spec.observation;
  const bool partial = obs.scheme == ObservationScheme::Partial || obs.scheme == ObservationScheme::TopMPartial;
  const bool top = obs.scheme == ObservationScheme::TopMComplete || obs.scheme == ObservationScheme::TopMPartial;
  const std::size_t k_i = partial && obs.considered != 0 ? obs.considered : K;

  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, i + 1));
    const double p = spec.reliability.size() == 1 ? spec.reliability[0] : spec.reliability[i];
    const bool informative = draw_bernoulli(rng, p);
    truth.w.push_back(informative ? 1 : 0);
    std::vector<EntityId> considered = all;
    if (partial) {
      std::shuffle(considered.begin(), considered.end(), rng);
      considered.resize(k_i);
      std::sort(considered.begin(), considered.end());
    }
    const std::size_t length = top ? obs.top_m : considered.size();
    const auto& skills = truth.skills[static_cast<std::size_t>(truth.c[i])];
    auto items = draw_ordering(rng, considered, length, informative,
                               [&](EntityId e) { return skills[static_cast<std::size_t>(e)]; });
    data.rankings.emplace_back(std::move(items), std::move(considered));
    data.reliability_prior.push_back(p);
  }
  data.validate();
  return sim;
}

// -----------------------------------------------------------------------------

namespace {

ObservationScheme parse_scheme(const std::string& name) {
  if (name == "complete") return ObservationScheme::Complete;
  if (name == "partial") return ObservationScheme::Partial;
  if (name == "top-m-complete") return ObservationScheme::TopMComplete;
  if (name == "top-m-partial") return ObservationScheme::TopMPartial;
  throw std::invalid_argument("unknown observation scheme '" + name + "'");
}

}  // namespace

GenerativeSpec parse_generative_spec(const std::string& json_text) {
  GenerativeSpec spec;
  try {
    const json doc = json::parse(json_text);
    spec.num_entities = doc.at("num_entities").get<std::size_t>();
    spec.num_rankers = doc.at("num_rankers").get<std::size_t>();
    if (doc.contains("clusters")) {
      for (const auto& node : doc["clusters"]) {
        spec.clusters.push_back(ClusterSpec{node.value("weight", 1.0), node.at("skills").get<std::vector<double>>()});
      }
    }
    if (doc.contains("crp")) {
      const auto& node = doc["crp"];
      CrpStructure crp;
      crp.alpha = node.value("alpha", crp.alpha);
      if (node.contains("gamma")) crp.gamma = node["gamma"].get<double>();
      crp.a_gamma = node.value("a_gamma", crp.a_gamma);
      crp.b_gamma = node.value("b_gamma", crp.b_gamma);
      crp.a = node.value("a", crp.a);
      spec.crp = crp;
    }
    const std::string alloc = doc.value("allocation", std::string("sampled"));
    if (alloc == "blocks") {
      spec.allocation = ClusterAllocation::Blocks;
    } else if (alloc != "sampled") {
      throw std::invalid_argument("allocation must be 'sampled' or 'blocks'");
    }
    if (doc.contains("reliability")) {
      const auto& rel = doc["reliability"];
      spec.reliability = rel.is_array() ? rel.get<std::vector<double>>() : std::vector<double>{rel.get<double>()};
    }
    if (doc.contains("observation")) {
      const auto& node = doc["observation"];
      spec.observation.scheme = parse_scheme(node.value("scheme", std::string("complete")));
      spec.observation.considered = node.value("considered", std::size_t{0});
      spec.observation.top_m = node.value("top_m", std::size_t{0});
    }
    if (doc.contains("entity_labels")) spec.entity_labels = doc["entity_labels"].get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("generative spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

std::string serialize_truth(const GroundTruth& truth) {
  std::vector<int> w(truth.w.begin(), truth.w.end());
  return json{{"c", truth.c}, {"D", truth.D}, {"skills", truth.skills}, {"w", w}}.dump(1);
}

GroundTruth parse_truth(const std::string& json_text) {
  const json doc = json::parse(json_text);
  GroundTruth truth;
  truth.c = doc.at("c").get<std::vector<int>>();
  truth.D = doc.at("D").get<std::vector<std::vector<int>>>();
  truth.skills = doc.at("skills").get<std::vector<std::vector<double>>>();
  for (int v : doc.at("w").get<std::vector<int>>()) truth.w.push_back(v != 0 ? 1 : 0);
  return truth;
}

RecoveryScore recovery_score(const GroundTruth& truth, const Trace& trace) {
  if (trace.empty()) throw std::invalid_argument("trace has no retained samples");
  const std::size_t n = truth.c.size();
  if (trace.records.front().state.c.size() != n || truth.w.size() != n) {
    throw std::invalid_argument("ground truth and trace disagree on the number of rankers");
  }
  RecoveryScore score;
  const DissimilarityMatrix delta = ranker_dissimilarity(trace);
  std::size_t agree = 0, pairs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool together = delta(i, j) < 0.5;
      agree += together == (truth.c[i] == truth.c[j]) ? 1 : 0;
      ++pairs;
    }
  }
  score.rand_index = pairs == 0 ? 1.0 : static_cast<double>(agree) / static_cast<double>(pairs);

  std::vector<int> labels = truth.c;
  std::sort(labels.begin(), labels.end());
  const auto true_count = static_cast<std::size_t>(std::unique(labels.begin(), labels.end()) - labels.begin());
  std::size_t hits = 0;
  for (const auto& rec : trace.records) hits += rec.state.num_ranker_clusters() == true_count ? 1 : 0;
  score.cluster_count_hit_rate = static_cast<double>(hits) / static_cast<double>(trace.size());

  const auto probs = reliability_probabilities(trace);
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) err += std::abs(probs[i] - static_cast<double>(truth.w[i]));
  score.weight_error = err / static_cast<double>(n);
  return score;
}

}  // namespace wand
