#include "psyborg/bias_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "psyborg/error.hpp"

namespace psyborg {

BiasState BiasState::from_index(int index) {
  if (index < 0 || index >= kCount)
    throw ConfigError("bias state index out of range: " + std::to_string(index));
  return BiasState(index & 4 ? BiasLevel::High : BiasLevel::Low,
                   index & 2 ? BiasLevel::High : BiasLevel::Low,
                   index & 1 ? BiasLevel::High : BiasLevel::Low);
}

std::array<BiasState, BiasState::kCount> BiasState::all() {
  std::array<BiasState, kCount> states;
  for (int i = 0; i < kCount; ++i) states[static_cast<std::size_t>(i)] = from_index(i);
  return states;
}

std::string to_string(BiasState state) {
  return "theta" + std::to_string(state.index());
}

std::optional<BiasState> parse_bias_state(std::string_view text) {
  for (std::string_view prefix : {"theta", "\xce\xb8", "t"}) {
    if (text.starts_with(prefix)) {
      text.remove_prefix(prefix.size());
      break;
    }
  }
  if (text.size() != 1 || text[0] < '0' || text[0] > '7') return std::nullopt;
  return BiasState::from_index(text[0] - '0');
}

BiasParams clamp_params(BiasParams p) {
  p.lambda_l = std::max(p.lambda_l, kLambdaLossMin);
  p.lambda_c = std::clamp(p.lambda_c, kLambdaConfirmMin, kLambdaConfirmMax);
  p.lambda_s = std::max(p.lambda_s, 0.0);
  return p;
}

double GaussianSpec::stddev() const { return std::sqrt(variance); }

void GaussianSpec::validate() const {
  if (!std::isfinite(mean) || !std::isfinite(variance) || variance < 0.0)
    throw ConfigError("gaussian spec needs a finite mean and nonnegative variance");
}

ParamDistributionTable::ParamDistributionTable(
    GaussianSpec loss_low, GaussianSpec loss_high, GaussianSpec confirm_low,
    GaussianSpec confirm_high, GaussianSpec sunk_low, GaussianSpec sunk_high) {
  for (const auto& g : {loss_low, loss_high, confirm_low, confirm_high, sunk_low, sunk_high})
    g.validate();
  for (BiasState s : BiasState::all()) {
    auto& row = rows_[static_cast<std::size_t>(s.index())];
    row.loss = s.loss_aversion() == BiasLevel::High ? loss_high : loss_low;
    row.confirmation = s.confirmation() == BiasLevel::High ? confirm_high : confirm_low;
    row.sunk_cost = s.sunk_cost() == BiasLevel::High ? sunk_high : sunk_low;
  }
}

ParamDistributionTable ParamDistributionTable::defaults() {
  return ParamDistributionTable({0.5, 0.04}, {1.51, 0.04},   //
                                {0.19, 0.01}, {0.79, 0.01},  //
                                {201.0, 1764.0}, {798.0, 1521.0});
}

BiasParams sample_params(BiasState state, const ParamDistributionTable& table,
                         Rng& rng) {
  const auto& row = table[state];
  BiasParams p;
  p.lambda_l = rng.normal(row.loss.mean, row.loss.stddev());
  p.lambda_c = rng.normal(row.confirmation.mean, row.confirmation.stddev());
  p.lambda_s = rng.normal(row.sunk_cost.mean, row.sunk_cost.stddev());
  return clamp_params(p);
}

Prospect::Prospect(std::vector<ProspectOutcome> outcomes)
    : outcomes_(std::move(outcomes)) {
  if (outcomes_.empty()) throw ConfigError("prospect needs at least one outcome");
  double total = 0.0;
  for (const auto& o : outcomes_) {
    if (!(o.probability >= 0.0) || !std::isfinite(o.value))
      throw ConfigError("prospect outcome has a negative probability or non-finite value");
    total += o.probability;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw ConfigError("prospect probabilities must sum to 1");
}

double subjective_utility(double omega, double lambda_l, double rho) {
  if (omega >= 0.0) return std::pow(omega, rho);
  return -lambda_l * std::pow(-omega, rho);
}

double prospect_utility(const Prospect& prospect, double lambda_l, double rho) {
  double u = 0.0;
  for (const auto& o : prospect.outcomes())
    u += o.probability * subjective_utility(o.value, lambda_l, rho);
  return u;
}

double aggressive_probability(const ChoiceConfig& cfg, double lambda_l) {
  const double diff = prospect_utility(cfg.aggressive, lambda_l, cfg.rho) -
                      prospect_utility(cfg.stealth, lambda_l, cfg.rho);
  return 1.0 / (1.0 + std::exp(-cfg.mu * diff));
}

namespace {
double logit(double p) { return std::log(p / (1.0 - p)); }
}  // namespace

ChoiceConfig calibrate_choice(CalibrationTargets targets, CalibrationAnchors anchors) {
  const auto in_unit = [](double p) { return p > 0.0 && p < 1.0; };
  if (!in_unit(targets.p_low) || !in_unit(targets.p_high))
    throw CalibrationError("calibration targets must lie strictly inside (0, 1)");
  if (targets.p_low < targets.p_high)
    throw CalibrationError(
        "infeasible targets: the low-loss anchor must be at least as aggressive "
        "as the high-loss anchor");
  if (!(anchors.lambda_low < anchors.lambda_high) || anchors.lambda_low < 0.0)
    throw CalibrationError("anchors must satisfy 0 <= lambda_low < lambda_high");

  // U_a(lambda) - U_s = (1-d) g - d lambda l - s_u must equal logit(p) at both
  // anchors; with d and s_u fixed this is a 2x2 linear system in (g, l).
  const double d = kAggressiveLossProbability;
  const double s_u = kStealthSureGain;
  const double z_low = logit(targets.p_low);
  const double z_high = logit(targets.p_high);
  const double loss = (z_low - z_high) / (d * (anchors.lambda_high - anchors.lambda_low));
  const double gain = (z_low + s_u + d * anchors.lambda_low * loss) / (1.0 - d);
  if (gain < 0.0)
    throw CalibrationError("calibration would need a negative gain outcome");

  ChoiceConfig cfg;
  cfg.aggressive = Prospect({{gain, 1.0 - d}, {-loss, d}});
  cfg.stealth = Prospect::sure(s_u);
  return cfg;
}

double perceived_value(double reward, double sunk_cost, double lambda_s) {
  return reward + lambda_s * sunk_cost;
}

std::vector<double> target_distribution(std::span<const double> rewards,
                                        std::span<const double> sunk_costs,
                                        double lambda_s) {
  if (rewards.empty() || rewards.size() != sunk_costs.size())
    throw PreconditionError("target_distribution needs equal, nonempty inputs");
  std::vector<double> p(rewards.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = perceived_value(rewards[i], sunk_costs[i], lambda_s);
    if (p[i] < 0.0) throw PreconditionError("negative perceived value");
  }
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  if (total <= 0.0) {
    std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(p.size()));
    return p;
  }
  for (double& x : p) x /= total;
  return p;
}

Evidence confirm_decision(double lambda_c, Rng& rng) {
  return rng.bernoulli(lambda_c) ? Evidence::Confirm : Evidence::Disconfirm;
}

}  // namespace psyborg
