#pragma once

// Experiment commands behind the CLI. Each is a pure function of its
// options and inputs: re-running reproduces byte-identical files.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "psyborg/bias_model.hpp"
#include "psyborg/dataset.hpp"
#include "psyborg/decision_tree.hpp"
#include "psyborg/eval.hpp"
#include "psyborg/inference.hpp"

namespace psyborg {

/// Environment variable naming the scenario used when no --config is given.
inline constexpr const char* kConfigEnvVar = "PSYBORG_CONFIG";

struct GenerateOptions {
  std::string config_path;  // empty: $PSYBORG_CONFIG, else built-in defaults
  std::string choice_path;  // empty: default calibration
  std::string out_dir;
  std::uint64_t seed = 0;
  bool trigger = false;
  int episodes_per_state = 50;
  int jobs = 1;
};

struct GenerateResult {
  DatasetManifest manifest;
  std::string summary;
};

GenerateResult cmd_generate(const GenerateOptions& options);

enum class InferMethod { Bayes, Tree };

struct InferOptions {
  std::string data_dir;
  InferMethod method = InferMethod::Bayes;
  std::string model_path;  // tree: load instead of training
  double train_split = 0.8;
  std::uint64_t split_seed = 0x5eed;
  std::string out_path;  // empty: <data>/predictions_<method>.jsonl
  bool trace = true;     // bayes: per-update posterior trace in the predictions
};

struct InferMetrics {
  int evaluated = 0;
  double accuracy4 = 0.0;  // (loss, confirmation) classes
  std::optional<double> cross_entropy4;
  int floored4 = 0;
  double accuracy8 = 0.0;
  std::optional<double> cross_entropy8;
  std::array<double, 3> bit_accuracy{};  // loss, confirmation, sunk cost
};

struct InferResult {
  InferMetrics metrics;
  std::string predictions_path;
  std::string metrics_path;
  std::string model_path;  // tree: where the trained model was written
  std::string summary;
};

InferResult cmd_infer(const InferOptions& options);

struct EvaluateOptions {
  std::string data_dir;
  std::string out_path;      // text report; .json and .csv siblings are written beside it
  std::string baseline_dir;  // optional dataset with the opposite trigger setting
  std::string model_path;    // optional tree model for the sunk-cost bit
  std::vector<int> states;   // empty: all
  int min_runs_per_state = 50;
  std::optional<std::uint64_t> seed;  // default: derived from the manifest seed
  bool reuse_seed = false;
  int jobs = 1;
};

struct EvaluateResult {
  DistanceReport report;
  std::optional<TTestResult> ttest;
  std::string summary;
};

EvaluateResult cmd_evaluate(const EvaluateOptions& options);

struct CalibrateOptions {
  std::string out_dir;
  CalibrationTargets targets;
  CalibrationAnchors anchors;
  int nodes = 64;
  int drift_nodes = 256;
};

struct CalibrateResult {
  ChoiceConfig choice;
  EmissionTable emissions;
  double max_deviation = 0.0;  // against the reference emission table
  double drift = 0.0;          // between `nodes` and `drift_nodes`
  std::string summary;
};

CalibrateResult cmd_calibrate(const CalibrateOptions& options);

/// State inferred from a sequence: Bayesian MAP for the loss and
/// confirmation bits, the tree's sunk-cost bit when a model is given.
BiasState infer_state(const ActionSequence& seq, const EmissionTable& em,
                      const BiasTreeModel* model);

/// Stratified split by state; returns (train, test) run indices.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(
    std::span<const LabeledRun> runs, double train_fraction, std::uint64_t seed);

}  // namespace psyborg
