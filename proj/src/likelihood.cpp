#include "wand/likelihood.hpp"

#include <string>

namespace wand {

SkillAssignment::SkillAssignment(std::vector<double> by_entity) : values_(std::move(by_entity)) {
  for (std::size_t e = 0; e < values_.size(); ++e) {
    const double v = values_[e];
    if (std::isnan(v)) continue;
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("skill for entity " + std::to_string(e) + " must be positive and finite");
    }
  }
}

SkillAssignment SkillAssignment::unassigned(std::size_t num_entities) {
  return SkillAssignment(std::vector<double>(num_entities, std::numeric_limits<double>::quiet_NaN()));
}

void SkillAssignment::set(EntityId entity, double skill) {
  if (!(skill > 0.0) || !std::isfinite(skill)) throw std::invalid_argument("skill must be positive and finite");
  const auto idx = static_cast<std::size_t>(entity);
  if (idx >= values_.size()) values_.resize(idx + 1, std::numeric_limits<double>::quiet_NaN());
  values_[idx] = skill;
}

bool SkillAssignment::has(EntityId entity) const {
  const auto idx = static_cast<std::size_t>(entity);
  return entity >= 0 && idx < values_.size() && !std::isnan(values_[idx]);
}

double SkillAssignment::at(EntityId entity) const {
  if (!has(entity)) throw std::out_of_range("no skill assigned to entity " + std::to_string(entity));
  return values_[static_cast<std::size_t>(entity)];
}

SkillAssignment SkillAssignment::scaled(double factor) const {
  if (!(factor > 0.0)) throw std::invalid_argument("scale factor must be positive");
  std::vector<double> out = values_;
  for (double& v : out) v *= factor;
  return SkillAssignment(std::move(out));
}

namespace {

void require_skills(const Ranking& r, const SkillAssignment& s) {
  for (EntityId e : r.considered()) {
    if (!s.has(e)) throw std::out_of_range("no skill assigned to considered entity " + std::to_string(e));
  }
}

}  // namespace

double pl_log_prob(const Ranking& r, const SkillAssignment& s) {
  require_skills(r, s);
  return pl_log_prob_with(r, [&](EntityId e) { return s.at(e); });
}

double uninformative_log_prob(std::size_t considered_count, std::size_t ranked_count) {
  const double k = static_cast<double>(considered_count);
  const double n = static_cast<double>(ranked_count);
  return std::lgamma(k - n + 1.0) - std::lgamma(k + 1.0);
}

double uninformative_log_prob(const Ranking& r) { return uninformative_log_prob(r.considered_count(), r.size()); }

double weighted_pl_log_prob(const Ranking& r, const SkillAssignment& s, bool informative) {
  require_skills(r, s);
  if (!informative) return uninformative_log_prob(r);
  return pl_log_prob_with(r, [&](EntityId e) { return s.at(e); });
}

double complete_data_log_lik(const Ranking& r, std::span<const double> z, const SkillAssignment& s,
                             bool informative) {
  if (z.size() != r.size()) throw std::invalid_argument("latent vector length must equal the ranking length");
  for (double v : z) {
    if (!(v > 0.0)) throw std::invalid_argument("latent variables must be positive");
  }
  require_skills(r, s);
  return complete_data_log_lik_with(r, z, informative, [&](EntityId e) { return s.at(e); });
}

double ordering_count(std::size_t considered_count, std::size_t ranked_count) {
  double count = 1.0;
  for (std::size_t k = 0; k < ranked_count; ++k) count *= static_cast<double>(considered_count - k);
  return count;
}

}  // namespace wand
