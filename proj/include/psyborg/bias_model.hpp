#pragma once

// Behavioral equations for the three modeled cognitive biases and the
// per-state parameter distributions they are sampled from.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "psyborg/rng.hpp"

namespace psyborg {

enum class BiasLevel : std::uint8_t { Low = 0, High = 1 };

/// One of the eight discrete bias states. The index packs the three levels
/// as 4*loss + 2*confirmation + 1*sunk_cost.
class BiasState {
 public:
  static constexpr int kCount = 8;

  constexpr BiasState() = default;
  constexpr BiasState(BiasLevel loss, BiasLevel confirmation, BiasLevel sunk)
      : index_(static_cast<std::uint8_t>(4 * static_cast<int>(loss) +
                                         2 * static_cast<int>(confirmation) +
                                         static_cast<int>(sunk))) {}

  /// Throws ConfigError outside 0..7.
  static BiasState from_index(int index);
  static std::array<BiasState, kCount> all();

  constexpr int index() const { return index_; }
  constexpr BiasLevel loss_aversion() const { return level(4); }
  constexpr BiasLevel confirmation() const { return level(2); }
  constexpr BiasLevel sunk_cost() const { return level(1); }

  /// Index over the four (loss, confirmation) classes; the sunk-cost bit is
  /// dropped.
  constexpr int identifiable_index() const { return index_ >> 1; }

  friend constexpr bool operator==(BiasState, BiasState) = default;

 private:
  constexpr BiasLevel level(int bit) const {
    return (index_ & bit) ? BiasLevel::High : BiasLevel::Low;
  }
  std::uint8_t index_ = 0;
};

/// "theta5"
std::string to_string(BiasState state);
/// Accepts "theta5", "θ5", "t5" or "5".
std::optional<BiasState> parse_bias_state(std::string_view text);

struct BiasParams {
  double lambda_l = 0.0;  // loss-aversion coefficient
  double lambda_c = 0.0;  // confirming-evidence rate
  double lambda_s = 0.0;  // sunk-cost coefficient
};

/// Lower/upper bounds applied after Gaussian sampling.
inline constexpr double kLambdaLossMin = 0.01;
inline constexpr double kLambdaConfirmMin = 0.01;
inline constexpr double kLambdaConfirmMax = 0.99;

BiasParams clamp_params(BiasParams params);

/// Normal distribution described by mean and variance (not stddev). A zero
/// variance is a point mass; negative variances are rejected.
struct GaussianSpec {
  double mean = 0.0;
  double variance = 1.0;

  double stddev() const;
  void validate() const;
};

struct BiasDistributions {
  GaussianSpec loss;
  GaussianSpec confirmation;
  GaussianSpec sunk_cost;
};

class ParamDistributionTable {
 public:
  /// Per-bias (low, high) specs; each state's row picks by its own levels.
  ParamDistributionTable(GaussianSpec loss_low, GaussianSpec loss_high,
                         GaussianSpec confirm_low, GaussianSpec confirm_high,
                         GaussianSpec sunk_low, GaussianSpec sunk_high);

  /// loss N(0.5, 0.04)/N(1.51, 0.04), confirmation N(0.19, 0.01)/N(0.79, 0.01),
  /// sunk cost N(201, 1764)/N(798, 1521).
  static ParamDistributionTable defaults();

  const BiasDistributions& operator[](BiasState state) const {
    return rows_[static_cast<std::size_t>(state.index())];
  }

 private:
  std::array<BiasDistributions, BiasState::kCount> rows_;
};

BiasParams sample_params(BiasState state, const ParamDistributionTable& table,
                         Rng& rng);

// ---------------------------------------------------------------------------
// Loss aversion

struct ProspectOutcome {
  double value = 0.0;
  double probability = 0.0;
};

/// A finite gamble. Probabilities are nonnegative and sum to one.
class Prospect {
 public:
  explicit Prospect(std::vector<ProspectOutcome> outcomes);
  static Prospect sure(double value) { return Prospect({{value, 1.0}}); }

  std::span<const ProspectOutcome> outcomes() const { return outcomes_; }

 private:
  std::vector<ProspectOutcome> outcomes_;
};

struct ChoiceConfig {
  double rho = 1.0;  // utility curvature
  double mu = 1.0;   // logit sensitivity
  Prospect aggressive = Prospect::sure(0.0);
  Prospect stealth = Prospect::sure(0.0);
};

/// w^rho for gains, -lambda_l * (-w)^rho for losses.
double subjective_utility(double omega, double lambda_l, double rho);
double prospect_utility(const Prospect& prospect, double lambda_l, double rho);

/// Logistic choice between the aggressive and stealth prospects.
double aggressive_probability(const ChoiceConfig& cfg, double lambda_l);

struct CalibrationTargets {
  double p_low = 0.66;   // aggressive share at the low-loss anchor
  double p_high = 0.33;  // aggressive share at the high-loss anchor
};

struct CalibrationAnchors {
  double lambda_low = 0.5;
  double lambda_high = 1.51;
};

/// Stealth is a sure gain of 0.5; aggressive is a fifty-fifty gamble
/// {(gain, 0.5), (-loss, 0.5)} whose gain and loss put the logistic choice
/// exactly on both targets at rho = mu = 1.
ChoiceConfig calibrate_choice(CalibrationTargets targets = {},
                              CalibrationAnchors anchors = {});

inline constexpr double kStealthSureGain = 0.5;
inline constexpr double kAggressiveLossProbability = 0.5;

// ---------------------------------------------------------------------------
// Sunk cost

/// reward + lambda_s * sunk_cost
double perceived_value(double reward, double sunk_cost, double lambda_s);

/// Choice probabilities proportional to perceived value. Falls back to the
/// uniform distribution when every perceived value is zero.
std::vector<double> target_distribution(std::span<const double> rewards,
                                        std::span<const double> sunk_costs,
                                        double lambda_s);

// ---------------------------------------------------------------------------
// Confirmation bias

enum class Evidence { Confirm, Disconfirm };

Evidence confirm_decision(double lambda_c, Rng& rng);

}  // namespace psyborg
