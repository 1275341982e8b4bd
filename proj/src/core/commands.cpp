#include "psyborg/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <sstream>

#include <json.hpp>

#include "psyborg/action_log.hpp"
#include "psyborg/error.hpp"

namespace psyborg {

using nlohmann::json;

namespace {

std::string fmt(const char* format, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, a);
  return buf;
}

ScenarioConfig resolve_scenario(const std::string& path) {
  if (!path.empty()) return load_scenario(path);
  if (const char* env = std::getenv(kConfigEnvVar); env && *env) return load_scenario(env);
  return ScenarioConfig{};
}

bool bit(BiasState s, int which) {
  switch (which) {
    case 0: return s.loss_aversion() == BiasLevel::High;
    case 1: return s.confirmation() == BiasLevel::High;
    default: return s.sunk_cost() == BiasLevel::High;
  }
}

const BiasState& true_state(const LabeledRun& run) {
  if (!run.label.state) throw PreconditionError("run has no state label");
  return *run.label.state;
}

}  // namespace

GenerateResult cmd_generate(const GenerateOptions& options) {
  if (options.out_dir.empty()) throw ConfigError("generate needs an output directory");
  ScenarioConfig scenario = resolve_scenario(options.config_path);
  if (options.trigger) scenario.trigger.enabled = true;
  const ChoiceConfig choice = options.choice_path.empty()
                                  ? calibrate_choice()
                                  : choice_from_json(read_text_file(options.choice_path));
  const Dataset d = generate_dataset(scenario, options.seed, options.episodes_per_state, choice, options.jobs);
  write_dataset(d, options.out_dir);

  std::ostringstream s;
  s << "wrote " << d.runs.size() << " episodes to " << options.out_dir << "\n"
    << "scenario " << d.manifest.scenario_hash << ", seed " << options.seed << ", trigger "
    << (scenario.trigger.enabled ? "on" : "off") << "\n";
  return {d.manifest, s.str()};
}

BiasState infer_state(const ActionSequence& seq, const EmissionTable& em, const BiasTreeModel* model) {
  const int cls = map_identifiable(infer_posterior(seq, em));
  const BiasLevel sunk = model ? model->classify(extract_features(seq)).sunk_cost() : BiasLevel::Low;
  return BiasState(cls & 2 ? BiasLevel::High : BiasLevel::Low, cls & 1 ? BiasLevel::High : BiasLevel::Low,
                   sunk);
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(
    std::span<const LabeledRun> runs, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError("train split must lie strictly inside (0, 1)");
  std::array<std::vector<std::size_t>, BiasState::kCount> by_state;
  for (std::size_t i = 0; i < runs.size(); ++i)
    by_state[static_cast<std::size_t>(true_state(runs[i]).index())].push_back(i);
  std::vector<std::size_t> train, test;
  for (std::size_t s = 0; s < by_state.size(); ++s) {
    auto& idx = by_state[s];
    Rng rng(Rng::derive(seed, s));
    std::shuffle(idx.begin(), idx.end(), rng.engine());
    const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(idx.size())));
    train.insert(train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    test.insert(test.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  if (train.empty() || test.empty()) throw PreconditionError("train split leaves an empty partition");
  return {train, test};
}

InferResult cmd_infer(const InferOptions& options) {
  const Dataset d = load_dataset(options.data_dir);
  const bool bayes = options.method == InferMethod::Bayes;
  InferResult result;
  result.predictions_path = options.out_path.empty()
                                ? (std::filesystem::path(options.data_dir) /
                                   (bayes ? "predictions_bayes.jsonl" : "predictions_tree.jsonl"))
                                      .string()
                                : options.out_path;
  result.metrics_path = result.predictions_path + ".metrics.json";

  std::vector<std::size_t> eval_idx;
  std::optional<BiasTreeModel> model;
  EmissionTable em;
  if (bayes) {
    em = compute_emissions(ParamDistributionTable::defaults(), d.manifest.choice);
    for (std::size_t i = 0; i < d.runs.size(); ++i) eval_idx.push_back(i);
  } else if (!options.model_path.empty()) {
    if (!std::filesystem::exists(options.model_path)) throw IoError("model not found: " + options.model_path);
    model = BiasTreeModel::from_json(read_text_file(options.model_path));
    for (std::size_t i = 0; i < d.runs.size(); ++i) eval_idx.push_back(i);
  } else {
    auto [train, test] = stratified_split(d.runs, options.train_split, options.split_seed);
    std::vector<std::pair<FeatureVector, BiasState>> rows;
    for (std::size_t i : train) rows.emplace_back(extract_features(d.runs[i].log), true_state(d.runs[i]));
    model = BiasTreeModel::train(rows);
    result.model_path = (std::filesystem::path(options.data_dir) / "tree_model.json").string();
    write_text_file(result.model_path, model->to_json());
    eval_idx = std::move(test);
  }

  std::string lines = json{{"schema", "psyborg.predictions"},
                           {"schema_version", 1},
                           {"method", bayes ? "bayes" : "tree"}}
                          .dump() +
                      "\n";
  std::vector<int> pred4, pred8, label4, label8;
  std::vector<std::vector<double>> post4, post8;
  std::array<int, 3> bit_correct{};
  for (std::size_t i : eval_idx) {
    const LabeledRun& run = d.runs[i];
    const BiasState truth = true_state(run);
    BiasState predicted;
    json row = {{"episode", d.manifest.episodes[i]}, {"true_state", to_string(truth)}};
    if (bayes) {
      std::vector<Posterior> trace;
      const Posterior post = infer_posterior(run.log, em, Posterior::uniform(), options.trace ? &trace : nullptr);
      predicted = map_state(post);
      const auto ident = post.identifiable();
      pred4.push_back(map_identifiable(post));
      post4.emplace_back(ident.begin(), ident.end());
      post8.emplace_back(post.probabilities().begin(), post.probabilities().end());
      row["posterior"] = post.probabilities();
      row["identifiable_posterior"] = ident;
      row["predicted_class"] = pred4.back();
      if (options.trace) {
        json t = json::array();
        for (const auto& p : trace) t.push_back(p.identifiable());
        row["trace"] = std::move(t);
      }
    } else {
      const FeatureVector fv = extract_features(run.log);
      predicted = model->classify(fv);
      pred4.push_back(predicted.identifiable_index());
      row["features"] = {fv.p_hat_ua, fv.p_hat_uc, fv.f_max};
    }
    row["predicted_state"] = to_string(predicted);
    pred8.push_back(predicted.index());
    label4.push_back(truth.identifiable_index());
    label8.push_back(truth.index());
    for (int b = 0; b < 3; ++b)
      if (bit(predicted, b) == bit(truth, b)) ++bit_correct[static_cast<std::size_t>(b)];
    lines += row.dump() + "\n";
  }
  write_text_file(result.predictions_path, lines);

  InferMetrics& m = result.metrics;
  m.evaluated = static_cast<int>(eval_idx.size());
  for (int b = 0; b < 3; ++b) m.bit_accuracy[static_cast<std::size_t>(b)] = bit_correct[static_cast<std::size_t>(b)] / static_cast<double>(m.evaluated);
  const auto hits = [](const std::vector<int>& p, const std::vector<int>& y) {
    int c = 0;
    for (std::size_t i = 0; i < p.size(); ++i) c += p[i] == y[i];
    return c / static_cast<double>(p.size());
  };
  m.accuracy4 = hits(pred4, label4);
  m.accuracy8 = hits(pred8, label8);
  if (bayes) {
    const auto s4 = accuracy_and_xent(pred4, post4, label4);
    const auto s8 = accuracy_and_xent(pred8, post8, label8);
    m.cross_entropy4 = s4.cross_entropy;
    m.floored4 = s4.floored;
    m.cross_entropy8 = s8.cross_entropy;
  }

  const json metrics = {{"schema", "psyborg.infer_metrics"},
                        {"schema_version", 1},
                        {"method", bayes ? "bayes" : "tree"},
                        {"evaluated", m.evaluated},
                        {"accuracy_4class", m.accuracy4},
                        {"cross_entropy_4class", m.cross_entropy4 ? json(*m.cross_entropy4) : json(nullptr)},
                        {"floored_4class", m.floored4},
                        {"accuracy_8class", m.accuracy8},
                        {"cross_entropy_8class", m.cross_entropy8 ? json(*m.cross_entropy8) : json(nullptr)},
                        {"bit_accuracy",
                         {{"loss_aversion", m.bit_accuracy[0]},
                          {"confirmation", m.bit_accuracy[1]},
                          {"sunk_cost", m.bit_accuracy[2]}}}};
  write_text_file(result.metrics_path, metrics.dump(2));

  std::ostringstream s;
  s << "method " << (bayes ? "bayes" : "tree") << ", " << m.evaluated << " sequences\n"
    << "accuracy (loss x confirmation): " << fmt("%.4f", m.accuracy4) << "\n";
  if (m.cross_entropy4)
    s << "cross-entropy (loss x confirmation): " << fmt("%.4f", *m.cross_entropy4)
      << (m.floored4 ? " (" + std::to_string(m.floored4) + " floored)" : std::string()) << "\n";
  s << "accuracy (all bits): " << fmt("%.4f", m.accuracy8) << "\n"
    << "bit accuracy: loss " << fmt("%.4f", m.bit_accuracy[0]) << ", confirmation "
    << fmt("%.4f", m.bit_accuracy[1]) << ", sunk cost " << fmt("%.4f", m.bit_accuracy[2]) << "\n"
    << "predictions: " << result.predictions_path << "\n";
  if (!result.model_path.empty()) s << "model: " << result.model_path << "\n";
  result.summary = s.str();
  return result;
}

EvaluateResult cmd_evaluate(const EvaluateOptions& options) {
  if (options.out_path.empty()) throw ConfigError("evaluate needs an output path");
  const Dataset d = load_dataset(options.data_dir);
  const EmissionTable em = compute_emissions(ParamDistributionTable::defaults(), d.manifest.choice);

  BiasTreeModel model;
  if (!options.model_path.empty()) {
    model = BiasTreeModel::from_json(read_text_file(options.model_path));
  } else {
    std::vector<std::pair<FeatureVector, BiasState>> rows;
    for (const auto& r : d.runs) rows.emplace_back(extract_features(r.log), true_state(r));
    model = BiasTreeModel::train(rows);
  }

  DistanceOptions dopt;
  dopt.seed = options.seed.value_or(Rng::derive(d.manifest.master_seed, 0xd157));
  dopt.min_runs_per_state = options.min_runs_per_state;
  dopt.reuse_seed = options.reuse_seed;
  dopt.states = options.states;
  dopt.jobs = options.jobs;
  EvaluateResult result;
  result.report = distance_experiment(
      d.runs, d.manifest.scenario, d.manifest.choice, ParamDistributionTable::defaults(),
      [&](const ActionSequence& seq) { return infer_state(seq, em, &model); }, dopt);

  if (!options.baseline_dir.empty()) {
    const Dataset base = load_dataset(options.baseline_dir);
    if (base.manifest.trigger == d.manifest.trigger)
      throw PreconditionError("the baseline must have the opposite trigger setting");
    result.ttest = d.manifest.trigger ? trigger_effect(d.runs, base.runs) : trigger_effect(base.runs, d.runs);
  }

  std::string text = format_distance_report(result.report);
  if (result.ttest) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "\n# trigger effect (high sunk cost, max crack attempts)\nt = %.4f  dof = %.2f  p = %.3e\n",
                  result.ttest->t_statistic, result.ttest->dof, result.ttest->p_value);
    text += buf;
  }
  write_text_file(options.out_path, text);
  write_text_file(options.out_path + ".json", distance_report_to_json(result.report, result.ttest));
  write_text_file(options.out_path + ".csv", distance_samples_csv(result.report));
  result.summary = text + "report: " + options.out_path + " (+ .json, .csv)\n";
  return result;
}

CalibrateResult cmd_calibrate(const CalibrateOptions& options) {
  if (options.out_dir.empty()) throw ConfigError("calibrate needs an output directory");
  CalibrateResult r;
  r.choice = calibrate_choice(options.targets, options.anchors);
  const auto table = ParamDistributionTable::defaults();
  r.emissions = compute_emissions(table, r.choice, options.nodes);
  const EmissionTable fine = compute_emissions(table, r.choice, options.drift_nodes);
  const EmissionTable ref = reference_emissions();

  std::ostringstream s;
  s << "state    p_ua     p_us     p_uc     p_ud     max|dev|\n";
  for (BiasState st : BiasState::all()) {
    const auto& e = r.emissions[st];
    const auto& x = ref[st];
    const auto& f = fine[st];
    double dev = 0.0;
    for (auto [a, b] : {std::pair{e.p_ua, x.p_ua}, {e.p_us, x.p_us}, {e.p_uc, x.p_uc}, {e.p_ud, x.p_ud}})
      dev = std::max(dev, std::abs(a - b));
    for (auto [a, b] : {std::pair{e.p_ua, f.p_ua}, {e.p_uc, f.p_uc}})
      r.drift = std::max(r.drift, std::abs(a - b));
    r.max_deviation = std::max(r.max_deviation, dev);
    char line[128];
    std::snprintf(line, sizeof line, "%-8s %.4f   %.4f   %.4f   %.4f   %.4f\n", to_string(st).c_str(), e.p_ua,
                  e.p_us, e.p_uc, e.p_ud, dev);
    s << line;
  }
  const auto& agg = r.choice.aggressive.outcomes();
  s << "aggressive prospect:";
  for (const auto& o : agg) s << " (" << fmt("%.6f", o.value) << ", " << fmt("%.2f", o.probability) << ")";
  s << "\nstealth prospect: sure " << fmt("%.6f", kStealthSureGain) << "\n"
    << "max deviation from reference: " << fmt("%.4f", r.max_deviation) << "\n"
    << "quadrature drift " << options.nodes << " -> " << options.drift_nodes << " nodes: "
    << fmt("%.3e", r.drift) << "\n";

  const std::filesystem::path dir(options.out_dir);
  write_text_file((dir / "choice.json").string(), choice_to_json(r.choice));
  write_text_file((dir / "emissions.json").string(), emissions_to_json(r.emissions));
  s << "wrote " << (dir / "choice.json").string() << " and " << (dir / "emissions.json").string() << "\n";
  r.summary = s.str();
  return r;
}

}  // namespace psyborg
