#pragma once

// Scoring of synthetic runs: per-run statistics, paired distance
// experiments against real and random parameters, classification metrics
// and the trigger-effect hypothesis test.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "psyborg/agents.hpp"
#include "psyborg/bias_model.hpp"
#include "psyborg/scenario.hpp"

namespace psyborg {

struct RunStatistics {
  double aggressive_share = 0.5;
  double confirm_share = 0.5;
  int max_crack_attempts = 0;
};

/// Same definitions as the inference features.
RunStatistics run_statistics(const ActionSequence& seq);

enum class Statistic { ServiceDiscovery = 0, CredentialChecking = 1, FileCracking = 2 };
enum class Condition { Sampled = 0, Real = 1, Random = 2 };

inline constexpr int kStatisticCount = 3;
inline constexpr int kConditionCount = 3;

std::string_view to_string(Statistic s);
std::string_view to_string(Condition c);

double statistic_value(const RunStatistics& stats, Statistic s);

struct TTestResult {
  double t_statistic = 0.0;
  double p_value = 1.0;
  double dof = 0.0;
};

/// Two-sided Welch test. Throws PreconditionError when a group has fewer
/// than two values or both groups have zero variance.
TTestResult welch_t_test(std::span<const double> group_a, std::span<const double> group_b);

struct ClassificationScore {
  double accuracy = 0.0;
  double cross_entropy = 0.0;
  int floored = 0;  // rows whose true-class mass was below the log floor
};

inline constexpr double kLogFloor = 1e-12;

/// `posteriors[i][labels[i]]` is the mass on the true class. Throws
/// PreconditionError on length mismatch, empty input or out-of-range labels.
ClassificationScore accuracy_and_xent(std::span<const int> predictions,
                                      std::span<const std::vector<double>> posteriors,
                                      std::span<const int> labels);

/// A generated episode with its ground truth.
struct LabeledRun {
  ActionSequence log;
  EpisodeLabel label;
};

using StateInferrer = std::function<BiasState(const ActionSequence&)>;

struct DistanceOptions {
  std::uint64_t seed = 0;
  int min_runs_per_state = 50;
  /// Re-simulate the real condition with each run's own seed (sanity mode:
  /// every real-condition distance is then zero).
  bool reuse_seed = false;
  /// Restrict to these state indices; empty means all states present.
  std::vector<int> states;
  int jobs = 1;
};

struct DistanceCell {
  double mean = 0.0;
  double stddev = 0.0;
  int count = 0;
};

struct DistanceSample {
  int run = 0;  // index into the input runs
  int state = 0;
  Condition condition = Condition::Sampled;
  RunStatistics real;
  RunStatistics synthetic;
  std::uint64_t seed = 0;
};

struct DistanceReport {
  // [state][statistic][condition]
  std::array<std::array<std::array<DistanceCell, kConditionCount>, kStatisticCount>,
             BiasState::kCount>
      cells{};
  std::array<bool, BiasState::kCount> present{};
  std::vector<DistanceSample> samples;

  const DistanceCell& cell(BiasState s, Statistic st, Condition c) const {
    return cells[static_cast<std::size_t>(s.index())][static_cast<std::size_t>(st)]
                [static_cast<std::size_t>(c)];
  }
};

/// Uniform ranges of the random-parameter baseline.
inline constexpr RealRange kRandomLossRange{0.0, 2.5};
inline constexpr RealRange kRandomConfirmRange{0.0, 1.0};
inline constexpr RealRange kRandomSunkRange{0.0, 1000.0};

BiasParams random_params(Rng& rng);

/// For every labeled run: simulate once from parameters sampled under the
/// inferred state, once from the run's own parameters with a new seed, and
/// once from random parameters; record absolute statistic differences.
/// Throws PreconditionError when a selected state has fewer than
/// `min_runs_per_state` runs or a run lacks a state label.
DistanceReport distance_experiment(std::span<const LabeledRun> runs, const ScenarioConfig& scenario,
                                   const ChoiceConfig& cfg, const ParamDistributionTable& table,
                                   const StateInferrer& infer, const DistanceOptions& options);

/// Max-attempt samples of high-sunk-cost runs, trigger group first.
TTestResult trigger_effect(std::span<const LabeledRun> trigger_runs,
                           std::span<const LabeledRun> baseline_runs);

/// Table-shaped text report with one row per (state, statistic).
std::string format_distance_report(const DistanceReport& report);
std::string distance_report_to_json(const DistanceReport& report,
                                    const std::optional<TTestResult>& ttest);
/// One line per sample: run, state, condition, the three real statistics,
/// the three synthetic statistics.
std::string distance_samples_csv(const DistanceReport& report);

}  // namespace psyborg
