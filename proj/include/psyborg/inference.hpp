#pragma once

// Model-driven bias inference: emission probabilities integrated over the
// parameter distributions, and the sequential Bayesian posterior over the
// eight bias states.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "psyborg/agents.hpp"
#include "psyborg/bias_model.hpp"

namespace psyborg {

/// The four bias-revealing observations. Every other action has the same
/// likelihood under every state and cancels in the posterior.
enum class Observable { Aggressive, Stealth, Confirm, Disconfirm };

std::optional<Observable> observable_of(ActionId id);

struct EmissionRow {
  double p_ua = 0.5;
  double p_us = 0.5;
  double p_uc = 0.5;
  double p_ud = 0.5;

  double probability(Observable u) const;
};

class EmissionTable {
 public:
  EmissionTable() = default;
  explicit EmissionTable(std::array<EmissionRow, BiasState::kCount> rows);

  const EmissionRow& operator[](BiasState s) const {
    return rows_[static_cast<std::size_t>(s.index())];
  }
  const std::array<EmissionRow, BiasState::kCount>& rows() const { return rows_; }

 private:
  std::array<EmissionRow, BiasState::kCount> rows_{};
};

/// Reference emission table the default calibration is checked against.
EmissionTable reference_emissions();

/// p(u_a|state) by Gauss-Hermite quadrature of the logistic choice over the
/// loss-aversion distribution; p(u_c|state) is the mean of the clamped
/// confirmation-rate distribution. Throws ConfigError for nodes < 16.
EmissionTable compute_emissions(const ParamDistributionTable& table, const ChoiceConfig& cfg,
                                int quadrature_nodes = 64);

/// E[clamp(X, lo, hi)] for X ~ N(mean, variance).
double clamped_normal_mean(double mean, double variance, double lo, double hi);

std::string emissions_to_json(const EmissionTable& table);
EmissionTable emissions_from_json(std::string_view text);

class Posterior {
 public:
  static Posterior uniform();
  /// Normalizes; throws PreconditionError on negative or all-zero input.
  explicit Posterior(std::array<double, BiasState::kCount> weights);

  double operator[](BiasState s) const { return p_[static_cast<std::size_t>(s.index())]; }
  const std::array<double, BiasState::kCount>& probabilities() const { return p_; }

  /// Mass per (loss, confirmation) class, summing out the sunk-cost bit.
  std::array<double, 4> identifiable() const;

 private:
  std::array<double, BiasState::kCount> p_{};
};

Posterior bayes_update(const Posterior& prior, Observable u, const EmissionTable& em);

/// Folds every observable record of the sequence into the prior. When
/// `trace` is given it receives the posterior after each update.
Posterior infer_posterior(const ActionSequence& seq, const EmissionTable& em,
                          Posterior prior = Posterior::uniform(),
                          std::vector<Posterior>* trace = nullptr);

/// Argmax; ties go to the lowest index.
BiasState map_state(const Posterior& post);
/// Argmax over the four identifiable classes, lowest index on ties.
int map_identifiable(const Posterior& post);

/// Relative-frequency summary of a sequence.
struct FeatureVector {
  double p_hat_ua = 0.5;  // aggressive share of service discoveries
  double p_hat_uc = 0.5;  // confirm share of credential checks
  int f_max = 0;          // most cracking attempts on a single file

  static constexpr int kDimension = 3;
  double operator[](int feature) const;
};

FeatureVector extract_features(const ActionSequence& seq);

}  // namespace psyborg
