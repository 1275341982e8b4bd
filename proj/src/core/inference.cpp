#include "psyborg/inference.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <json.hpp>

#include "psyborg/error.hpp"
#include "psyborg/quadrature.hpp"

namespace psyborg {

using nlohmann::json;

std::optional<Observable> observable_of(ActionId id) {
  switch (id) {
    case ActionId::AggressiveDiscovery: return Observable::Aggressive;
    case ActionId::StealthDiscovery: return Observable::Stealth;
    case ActionId::CredentialConfirm: return Observable::Confirm;
    case ActionId::CredentialDisconfirm: return Observable::Disconfirm;
    default: return std::nullopt;
  }
}

double EmissionRow::probability(Observable u) const {
  switch (u) {
    case Observable::Aggressive: return p_ua;
    case Observable::Stealth: return p_us;
    case Observable::Confirm: return p_uc;
    case Observable::Disconfirm: return p_ud;
  }
  return 0.0;
}

EmissionTable::EmissionTable(std::array<EmissionRow, BiasState::kCount> rows) : rows_(rows) {
  for (const auto& r : rows_) {
    for (double p : {r.p_ua, r.p_us, r.p_uc, r.p_ud})
      if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("emission probability outside [0, 1]");
    if (std::abs(r.p_ua + r.p_us - 1.0) > 1e-6 || std::abs(r.p_uc + r.p_ud - 1.0) > 1e-6)
      throw ConfigError("emission pairs must each sum to 1");
  }
}

EmissionTable reference_emissions() {
  std::array<EmissionRow, BiasState::kCount> rows{};
  for (BiasState s : BiasState::all()) {
    const bool high_loss = s.loss_aversion() == BiasLevel::High;
    const bool high_conf = s.confirmation() == BiasLevel::High;
    rows[static_cast<std::size_t>(s.index())] = {high_loss ? 0.33 : 0.66, high_loss ? 0.67 : 0.34,
                                                 high_conf ? 0.79 : 0.19, high_conf ? 0.21 : 0.81};
  }
  return EmissionTable(rows);
}

double clamped_normal_mean(double mean, double variance, double lo, double hi) {
  if (variance < 0.0) throw ConfigError("negative variance");
  if (variance == 0.0) return std::clamp(mean, lo, hi);
  const double sd = std::sqrt(variance);
  const double a = (lo - mean) / sd;
  const double b = (hi - mean) / sd;
  const auto cdf = [](double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); };
  const auto pdf = [](double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); };
  return lo * cdf(a) + hi * (1.0 - cdf(b)) + mean * (cdf(b) - cdf(a)) + sd * (pdf(a) - pdf(b));
}

EmissionTable compute_emissions(const ParamDistributionTable& table, const ChoiceConfig& cfg,
                                int quadrature_nodes) {
  if (quadrature_nodes < 16) throw ConfigError("compute_emissions needs at least 16 nodes");
  const QuadratureRule rule = gauss_hermite(quadrature_nodes);
  const auto aggressive = [&cfg](double lambda_l) { return aggressive_probability(cfg, lambda_l); };

  std::array<EmissionRow, BiasState::kCount> rows{};
  for (BiasState s : BiasState::all()) {
    const auto& dist = table[s];
    dist.loss.validate();
    dist.confirmation.validate();
    EmissionRow& row = rows[static_cast<std::size_t>(s.index())];
    row.p_ua = gaussian_expectation(aggressive, dist.loss.mean, dist.loss.variance, rule);
    row.p_us = 1.0 - row.p_ua;
    row.p_uc = clamped_normal_mean(dist.confirmation.mean, dist.confirmation.variance,
                                   kLambdaConfirmMin, kLambdaConfirmMax);
    row.p_ud = 1.0 - row.p_uc;
  }
  return EmissionTable(rows);
}

std::string emissions_to_json(const EmissionTable& table) {
  json rows = json::array();
  for (BiasState s : BiasState::all()) {
    const auto& r = table[s];
    rows.push_back({{"state", to_string(s)}, {"p_ua", r.p_ua}, {"p_us", r.p_us},
                    {"p_uc", r.p_uc}, {"p_ud", r.p_ud}});
  }
  return json{{"schema", "psyborg.emissions"}, {"schema_version", 1}, {"rows", rows}}.dump(2);
}

EmissionTable emissions_from_json(std::string_view text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("schema") != "psyborg.emissions" || doc.at("schema_version") != 1)
      throw IoError("not a version-1 emission table");
    std::array<EmissionRow, BiasState::kCount> rows{};
    std::array<bool, BiasState::kCount> seen{};
    for (const auto& r : doc.at("rows")) {
      const auto s = parse_bias_state(r.at("state").get<std::string>());
      if (!s) throw IoError("emission row has an unknown state");
      rows[static_cast<std::size_t>(s->index())] = {r.at("p_ua").get<double>(), r.at("p_us").get<double>(),
                                                    r.at("p_uc").get<double>(), r.at("p_ud").get<double>()};
      seen[static_cast<std::size_t>(s->index())] = true;
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end())
      throw IoError("emission table is missing a state");
    return EmissionTable(rows);
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed emission table: ") + e.what());
  }
}

Posterior Posterior::uniform() {
  std::array<double, BiasState::kCount> w;
  w.fill(1.0);
  return Posterior(w);
}

Posterior::Posterior(std::array<double, BiasState::kCount> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw PreconditionError("posterior weights must be finite and >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw PreconditionError("posterior has zero total mass");
  for (std::size_t i = 0; i < p_.size(); ++i) p_[i] = weights[i] / total;
}

std::array<double, 4> Posterior::identifiable() const {
  std::array<double, 4> out{};
  for (std::size_t i = 0; i < p_.size(); ++i) out[i >> 1] += p_[i];
  return out;
}

Posterior bayes_update(const Posterior& prior, Observable u, const EmissionTable& em) {
  std::array<double, BiasState::kCount> w{};
  for (BiasState s : BiasState::all())
    w[static_cast<std::size_t>(s.index())] = prior[s] * em[s].probability(u);
  double total = 0.0;
  for (double x : w) total += x;
  if (!(total > 0.0)) throw PreconditionError("observation has zero likelihood under every state");
  return Posterior(w);
}

Posterior infer_posterior(const ActionSequence& seq, const EmissionTable& em, Posterior prior,
                          std::vector<Posterior>* trace) {
  for (const auto& rec : seq.records) {
    const auto u = observable_of(rec.action);
    if (!u) continue;
    prior = bayes_update(prior, *u, em);
    if (trace) trace->push_back(prior);
  }
  return prior;
}

BiasState map_state(const Posterior& post) {
  const auto& p = post.probabilities();
  return BiasState::from_index(static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin()));
}

int map_identifiable(const Posterior& post) {
  const auto p = post.identifiable();
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

double FeatureVector::operator[](int feature) const {
  switch (feature) {
    case 0: return p_hat_ua;
    case 1: return p_hat_uc;
    case 2: return static_cast<double>(f_max);
    default: throw PreconditionError("feature index out of range");
  }
}

FeatureVector extract_features(const ActionSequence& seq) {
  int aggressive = 0, stealth = 0, confirm = 0, disconfirm = 0;
  std::map<std::pair<std::string_view, std::string_view>, int> per_file;
  for (const auto& rec : seq.records) {
    switch (rec.action) {
      case ActionId::AggressiveDiscovery: ++aggressive; break;
      case ActionId::StealthDiscovery: ++stealth; break;
      case ActionId::CredentialConfirm: ++confirm; break;
      case ActionId::CredentialDisconfirm: ++disconfirm; break;
      case ActionId::BruteforceCrack:
      case ActionId::PasswordCrack: ++per_file[{rec.host, rec.target}]; break;
      default: break;
    }
  }
  FeatureVector fv;
  if (aggressive + stealth > 0) fv.p_hat_ua = static_cast<double>(aggressive) / (aggressive + stealth);
  if (confirm + disconfirm > 0) fv.p_hat_uc = static_cast<double>(confirm) / (confirm + disconfirm);
  for (const auto& [file, n] : per_file) fv.f_max = std::max(fv.f_max, n);
  return fv;
}

}  // namespace psyborg
