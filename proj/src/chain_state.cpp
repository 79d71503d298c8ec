#include "wand/chain_state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace wand {

using nlohmann::json;

void Hyperparams::validate() const {
  if (!(a > 0.0) || !(a_alpha > 0.0) || !(b_alpha > 0.0) || !(a_gamma > 0.0) || !(b_gamma > 0.0)) {
    throw std::invalid_argument("hyperparameters a, a_alpha, b_alpha, a_gamma, b_gamma must be positive");
  }
  if (m_r < 1 || m_e < 1) throw std::invalid_argument("auxiliary counts m_r and m_e must be at least 1");
  if (L < 1) throw std::invalid_argument("predictive samples per iteration L must be at least 1");
}

std::size_t ChainState::total_atoms() const {
  std::size_t n = 0;
  for (const auto& row : Lambda) n += row.size();
  return n;
}

double ChainState::total_skill() const {
  double total = 0.0;
  for (const auto& row : Lambda) {
    for (double v : row) total += v;
  }
  return total;
}

void ChainState::check_invariants(const Dataset& data) const {
  const std::size_t n = data.num_rankers();
  const std::size_t K = data.num_entities;
  auto fail = [](const std::string& msg) { throw std::logic_error("chain state invariant: " + msg); };
  if (c.size() != n || w.size() != n) fail("c and w must have one entry per ranker");
  const std::size_t nr = Lambda.size();
  if (D.size() != nr || gamma.size() != nr) fail("D, Lambda and gamma disagree on the number of ranker clusters");
  std::vector<bool> seen(nr, false);
  for (int ci : c) {
    if (ci < 0 || static_cast<std::size_t>(ci) >= nr) fail("ranker label out of range");
    seen[static_cast<std::size_t>(ci)] = true;
  }
  for (bool b : seen) {
    if (!b) fail("ranker labels are not contiguous");
  }
  for (std::size_t s = 0; s < nr; ++s) {
    if (!(gamma[s] > 0.0)) fail("gamma must be positive");
    if (D[s].size() != K) fail("every row of D must cover all entities");
    std::vector<bool> used(Lambda[s].size(), false);
    for (int d : D[s]) {
      if (d < 0 || static_cast<std::size_t>(d) >= Lambda[s].size()) fail("entity label out of range");
      used[static_cast<std::size_t>(d)] = true;
    }
    for (bool b : used) {
      if (!b) fail("entity labels are not contiguous");
    }
    for (double v : Lambda[s]) {
      if (!(v > 0.0) || !std::isfinite(v)) fail("skills must be positive and finite");
    }
  }
  if (!(alpha > 0.0)) fail("alpha must be positive");
  if (!Z.empty()) {
    if (Z.size() != n) fail("Z must have one row per ranker");
    for (std::size_t i = 0; i < n; ++i) {
      if (Z[i].size() != data.rankings[i].size()) fail("Z row length must equal n_i");
      for (double z : Z[i]) {
        if (!(z > 0.0)) fail("latent variables must be positive");
      }
    }
  }
}

ChainState init_from_prior(const Dataset& data, const Hyperparams& h, Rng& rng) {
  h.validate();
  ChainState state;
  const std::size_t n = data.num_rankers();
  const std::size_t K = data.num_entities;
  state.alpha = draw_gamma(rng, h.a_alpha, h.b_alpha);
  state.c = draw_crp_partition(rng, n, state.alpha);
  const std::size_t nr = n == 0 ? 0 : static_cast<std::size_t>(*std::max_element(state.c.begin(), state.c.end())) + 1;
  for (std::size_t s = 0; s < nr; ++s) {
    const double g = draw_gamma(rng, h.a_gamma, h.b_gamma);
    state.gamma.push_back(g);
    state.D.push_back(draw_crp_partition(rng, K, g));
    const std::size_t ne = static_cast<std::size_t>(*std::max_element(state.D.back().begin(), state.D.back().end())) + 1;
    std::vector<double> atoms(ne);
    for (double& v : atoms) v = floor_skill(draw_gamma(rng, h.a, 1.0));
    state.Lambda.push_back(std::move(atoms));
  }
  state.w.resize(n);
  for (std::size_t i = 0; i < n; ++i) state.w[i] = draw_bernoulli(rng, data.reliability_prior[i]) ? 1 : 0;
  draw_latents(state, data, rng);
  return state;
}

ChainState init_from_prior(const Dataset& data, const Hyperparams& h, std::uint64_t seed) {
  Rng rng(seed);
  return init_from_prior(data, h, rng);
}

void relabel(ChainState& state) {
  const std::size_t old_nr = state.Lambda.size();
  std::vector<int> ranker_map(old_nr, -1);
  std::vector<std::size_t> order;
  for (int& ci : state.c) {
    auto& mapped = ranker_map[static_cast<std::size_t>(ci)];
    if (mapped < 0) {
      mapped = static_cast<int>(order.size());
      order.push_back(static_cast<std::size_t>(ci));
    }
    ci = mapped;
  }
  std::vector<std::vector<int>> D;
  std::vector<std::vector<double>> Lambda;
  std::vector<double> gamma;
  D.reserve(order.size());
  Lambda.reserve(order.size());
  gamma.reserve(order.size());
  for (std::size_t old : order) {
    std::vector<int> row = std::move(state.D[old]);
    const auto& atoms = state.Lambda[old];
    std::vector<int> atom_map(atoms.size(), -1);
    std::vector<double> kept;
    for (int& d : row) {
      auto& mapped = atom_map[static_cast<std::size_t>(d)];
      if (mapped < 0) {
        mapped = static_cast<int>(kept.size());
        kept.push_back(atoms[static_cast<std::size_t>(d)]);
      }
      d = mapped;
    }
    D.push_back(std::move(row));
    Lambda.push_back(std::move(kept));
    gamma.push_back(state.gamma[old]);
  }
  state.D = std::move(D);
  state.Lambda = std::move(Lambda);
  state.gamma = std::move(gamma);
}

double skill_of(const ChainState& state, std::size_t ranker, EntityId entity) {
  if (ranker >= state.c.size()) throw std::out_of_range("ranker index out of range");
  const auto s = static_cast<std::size_t>(state.c[ranker]);
  if (s >= state.D.size()) throw std::out_of_range("ranker cluster label out of range");
  const auto& row = state.D[s];
  if (entity < 0 || static_cast<std::size_t>(entity) >= row.size()) throw std::out_of_range("entity id out of range");
  return state.Lambda[s].at(static_cast<std::size_t>(row[static_cast<std::size_t>(entity)]));
}

SkillAssignment skills_for(const ChainState& state, std::size_t ranker) {
  const auto s = static_cast<std::size_t>(state.c.at(ranker));
  const auto& row = state.D.at(s);
  std::vector<double> values(row.size());
  for (std::size_t e = 0; e < row.size(); ++e) values[e] = floor_skill(state.Lambda[s][static_cast<std::size_t>(row[e])]);
  return SkillAssignment(std::move(values));
}

void draw_latents(ChainState& state, const Dataset& data, Rng& rng) {
  const std::size_t n = data.num_rankers();
  state.Z.resize(n);
  std::vector<double> rates;
  for (std::size_t i = 0; i < n; ++i) {
    const auto s = static_cast<std::size_t>(state.c[i]);
    const auto& row = state.D[s];
    const auto& atoms = state.Lambda[s];
    denominator_rates(data.rankings[i], state.w[i] != 0,
                      [&](EntityId e) { return atoms[static_cast<std::size_t>(row[static_cast<std::size_t>(e)])]; },
                      rates);
    auto& z = state.Z[i];
    z.resize(rates.size());
    for (std::size_t j = 0; j < rates.size(); ++j) {
      // An exact zero would break the positivity invariant.
      z[j] = std::max(draw_exponential(rng, rates[j]), std::numeric_limits<double>::min());
    }
  }
}

double complete_data_log_lik(const ChainState& state, const Dataset& data) {
  double total = 0.0;
  for (std::size_t i = 0; i < data.num_rankers(); ++i) {
    const auto s = static_cast<std::size_t>(state.c[i]);
    const auto& row = state.D[s];
    const auto& atoms = state.Lambda[s];
    total += complete_data_log_lik_with(
        data.rankings[i], state.Z[i], state.w[i] != 0,
        [&](EntityId e) { return atoms[static_cast<std::size_t>(row[static_cast<std::size_t>(e)])]; });
  }
  return total;
}

// -----------------------------------------------------------------------------
// Trace I/O

namespace {

json to_json(const Hyperparams& h) {
  return json{{"a", h.a},           {"a_alpha", h.a_alpha}, {"b_alpha", h.b_alpha}, {"a_gamma", h.a_gamma},
              {"b_gamma", h.b_gamma}, {"m_r", h.m_r},         {"m_e", h.m_e},         {"L", h.L}};
}

Hyperparams hyper_from_json(const json& j) {
  Hyperparams h;
  h.a = j.at("a").get<double>();
  h.a_alpha = j.at("a_alpha").get<double>();
  h.b_alpha = j.at("b_alpha").get<double>();
  h.a_gamma = j.at("a_gamma").get<double>();
  h.b_gamma = j.at("b_gamma").get<double>();
  h.m_r = j.at("m_r").get<int>();
  h.m_e = j.at("m_e").get<int>();
  h.L = j.value("L", 1);
  return h;
}

json header_json(const TraceMetadata& m) {
  return json{{"header", true},
              {"seed", m.seed},
              {"hyperparams", to_json(m.hyper)},
              {"iterations", m.iterations},
              {"burn_in", m.burn_in},
              {"thin", m.thin},
              {"rescale", m.rescale},
              {"num_rankers", m.num_rankers},
              {"num_entities", m.num_entities}};
}

TraceMetadata meta_from_json(const json& j) {
  TraceMetadata m;
  m.seed = j.at("seed").get<std::uint64_t>();
  m.hyper = hyper_from_json(j.at("hyperparams"));
  m.iterations = j.at("iterations").get<std::size_t>();
  m.burn_in = j.at("burn_in").get<std::size_t>();
  m.thin = j.at("thin").get<std::size_t>();
  m.rescale = j.value("rescale", true);
  m.num_rankers = j.at("num_rankers").get<std::size_t>();
  m.num_entities = j.at("num_entities").get<std::size_t>();
  return m;
}

json record_json(const TraceRecord& r) {
  std::vector<int> w(r.state.w.begin(), r.state.w.end());
  return json{{"iter", r.iter},   {"c", r.state.c},         {"D", r.state.D},         {"lambda", r.state.Lambda},
              {"w", w},           {"alpha", r.state.alpha}, {"gamma", r.state.gamma}, {"loglik", r.loglik}};
}

TraceRecord record_from_json(const json& j) {
  TraceRecord r;
  r.iter = j.at("iter").get<std::size_t>();
  r.state.c = j.at("c").get<std::vector<int>>();
  r.state.D = j.at("D").get<std::vector<std::vector<int>>>();
  r.state.Lambda = j.at("lambda").get<std::vector<std::vector<double>>>();
  for (int v : j.at("w").get<std::vector<int>>()) r.state.w.push_back(v != 0 ? 1 : 0);
  r.state.alpha = j.at("alpha").get<double>();
  r.state.gamma = j.at("gamma").get<std::vector<double>>();
  r.loglik = j.at("loglik").get<double>();
  return r;
}

}  // namespace

TraceWriter::TraceWriter(std::ostream& out, const TraceMetadata& meta) : out_(&out) {
  *out_ << header_json(meta).dump() << '\n';
}

void TraceWriter::write(const TraceRecord& record) {
  if (any_ && record.iter <= last_iter_) throw std::logic_error("trace iterations must be strictly increasing");
  any_ = true;
  last_iter_ = record.iter;
  *out_ << record_json(record).dump() << '\n';
  if (!*out_) throw std::runtime_error("failed writing trace record");
}

void write_trace(std::ostream& out, const Trace& trace) {
  TraceWriter writer(out, trace.meta);
  for (const auto& r : trace.records) writer.write(r);
}

Trace read_trace(std::istream& in) {
  Trace trace;
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      if (!have_header) {
        if (!j.value("header", false)) throw std::runtime_error("first record is not a trace header");
        trace.meta = meta_from_json(j);
        have_header = true;
        continue;
      }
      trace.records.push_back(record_from_json(j));
      if (trace.records.size() > 1 && trace.records.back().iter <= trace.records[trace.records.size() - 2].iter) {
        throw std::runtime_error("iteration indices are not strictly increasing");
      }
    } catch (const json::exception& e) {
      throw std::runtime_error("trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) throw std::runtime_error("trace has no header record");
  return trace;
}

Trace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file '" + path + "'");
  return read_trace(in);
}

}  // namespace wand
