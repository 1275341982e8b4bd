// psyborg command-line front end. Talks to the library only through the C API.

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "psyborg/psyborg.h"

namespace {

enum Exit { kOk = 0, kInternal = 1, kUsage = 2, kConfig = 3, kIo = 4, kCalibration = 5, kPrecondition = 6 };

int exit_code(psy_status s) {
  switch (s) {
    case PSY_OK: return kOk;
    case PSY_ERR_INVALID_ARGUMENT: return kUsage;
    case PSY_ERR_CONFIG: return kConfig;
    case PSY_ERR_IO: return kIo;
    case PSY_ERR_CALIBRATION: return kCalibration;
    case PSY_ERR_PRECONDITION: return kPrecondition;
    case PSY_ERR_INTERNAL: break;
  }
  return kInternal;
}

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

// Prints the summary or the error and maps the status to an exit code.
int finish(const char* command, psy_status s, char* summary) {
  if (s != PSY_OK) {
    std::fprintf(stderr, "psyborg %s: %s: %s\n", command, psy_status_name(s), psy_last_error());
    return exit_code(s);
  }
  if (summary) std::fputs(summary, stdout);
  psy_string_free(summary);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic attacker logs with cognitive biases: generate, infer, evaluate, calibrate"};
  app.require_subcommand(1);
  app.set_version_flag("--version", psy_version());

  std::string config, choice, out, data, model, baseline, method = "bayes";
  std::uint64_t seed = 0, split_seed = 0x5eed;
  bool trigger = false, no_trace = false, reuse_seed = false;
  int per_state = 50, jobs = 1, min_runs = 50, nodes = 64, drift_nodes = 256;
  double train_split = 0.8, p_low = 0.66, p_high = 0.33, lambda_low = 0.5, lambda_high = 1.51;
  std::vector<std::string> states;
  std::optional<std::uint64_t> eval_seed;

  auto* gen = app.add_subcommand("generate", "Simulate 8 x N labeled episodes into a dataset directory");
  gen->add_option("--config", config, "Scenario JSON (default: $PSYBORG_CONFIG, else built-in)");
  gen->add_option("--choice", choice, "Calibrated choice JSON (default: built-in calibration)");
  gen->add_option("--seed", seed, "Master seed")->required();
  gen->add_option("--out", out, "Output directory")->required();
  gen->add_flag("--trigger", trigger, "Enable the sunk-cost trigger");
  gen->add_option("--episodes-per-state", per_state, "Episodes per bias state")->check(CLI::PositiveNumber);
  gen->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto* inf = app.add_subcommand("infer", "Infer bias states of a dataset and score them");
  inf->add_option("--data", data, "Dataset directory")->required();
  inf->add_option("--method", method, "bayes or tree")->check(CLI::IsMember({"bayes", "tree"}));
  inf->add_option("--model", model, "Tree model to load instead of training one");
  inf->add_option("--train-split", train_split, "Training fraction for the tree")->check(CLI::Range(0.0, 1.0));
  inf->add_option("--split-seed", split_seed, "Seed of the stratified split");
  inf->add_option("--out", out, "Predictions file (default: <data>/predictions_<method>.jsonl)");
  inf->add_flag("--no-trace", no_trace, "Omit the per-update posterior trace");

  auto* ev = app.add_subcommand("evaluate", "Distance experiment and trigger-effect test");
  ev->add_option("--data", data, "Dataset directory")->required();
  ev->add_option("--out", out, "Report path; .json and .csv are written beside it")->required();
  ev->add_option("--baseline", baseline, "Dataset with the opposite trigger setting, for the t-test");
  ev->add_option("--model", model, "Tree model for the sunk-cost bit");
  ev->add_option("--states", states, "Restrict to these states (theta0 or 0)")->delimiter(',');
  ev->add_option("--min-runs", min_runs, "Minimum runs per selected state")->check(CLI::PositiveNumber);
  ev->add_option("--seed", eval_seed, "Seed of the synthetic runs (default: derived from the dataset)");
  ev->add_flag("--reuse-seed", reuse_seed, "Re-simulate the real condition with each run's own seed");
  ev->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto* cal = app.add_subcommand("calibrate", "Fit the discovery prospects and write the emission table");
  cal->add_option("--out", out, "Output directory")->required();
  cal->add_option("--p-low", p_low, "Aggressive share at the low-loss anchor");
  cal->add_option("--p-high", p_high, "Aggressive share at the high-loss anchor");
  cal->add_option("--lambda-low", lambda_low, "Low-loss anchor");
  cal->add_option("--lambda-high", lambda_high, "High-loss anchor");
  cal->add_option("--nodes", nodes, "Quadrature nodes");
  cal->add_option("--drift-nodes", drift_nodes, "Quadrature nodes of the drift check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  char* summary = nullptr;
  if (*gen) {
    psy_generate_options o;
    psy_generate_options_init(&o);
    o.config_path = opt(config);
    o.choice_path = opt(choice);
    o.out_dir = out.c_str();
    o.seed = seed;
    o.trigger = trigger;
    o.episodes_per_state = per_state;
    o.jobs = jobs;
    const psy_status s = psy_cmd_generate(&o, &summary);
    return finish("generate", s, summary);
  }
  if (*inf) {
    psy_infer_options o;
    psy_infer_options_init(&o);
    o.data_dir = data.c_str();
    o.method = method == "tree" ? PSY_INFER_TREE : PSY_INFER_BAYES;
    o.model_path = opt(model);
    o.train_split = train_split;
    o.split_seed = split_seed;
    o.out_path = opt(out);
    o.trace = !no_trace;
    const psy_status s = psy_cmd_infer(&o, nullptr, &summary);
    return finish("infer", s, summary);
  }
  if (*ev) {
    std::vector<int> indices;
    for (const auto& s : states) {
      int index = 0;
      if (psy_parse_state(s.c_str(), &index) != PSY_OK) {
        std::fprintf(stderr, "psyborg evaluate: %s\n", psy_last_error());
        return kUsage;
      }
      indices.push_back(index);
    }
    psy_evaluate_options o;
    psy_evaluate_options_init(&o);
    o.data_dir = data.c_str();
    o.out_path = out.c_str();
    o.baseline_dir = opt(baseline);
    o.model_path = opt(model);
    o.states = indices.data();
    o.state_count = indices.size();
    o.min_runs_per_state = min_runs;
    o.has_seed = eval_seed.has_value();
    o.seed = eval_seed.value_or(0);
    o.reuse_seed = reuse_seed;
    o.jobs = jobs;
    const psy_status s = psy_cmd_evaluate(&o, nullptr, &summary);
    return finish("evaluate", s, summary);
  }
  psy_calibrate_options o;
  psy_calibrate_options_init(&o);
  o.out_dir = out.c_str();
  o.p_low = p_low;
  o.p_high = p_high;
  o.lambda_low = lambda_low;
  o.lambda_high = lambda_high;
  o.nodes = nodes;
  o.drift_nodes = drift_nodes;
  const psy_status s = psy_cmd_calibrate(&o, nullptr, &summary);
  return finish("calibrate", s, summary);
}
