#include "psyborg/eval.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "parallel.hpp"
#include "psyborg/error.hpp"
#include "psyborg/inference.hpp"

namespace psyborg {

using nlohmann::json;

RunStatistics run_statistics(const ActionSequence& seq) {
  const FeatureVector fv = extract_features(seq);
  return {fv.p_hat_ua, fv.p_hat_uc, fv.f_max};
}

std::string_view to_string(Statistic s) {
  switch (s) {
    case Statistic::ServiceDiscovery: return "service_discovery";
    case Statistic::CredentialChecking: return "credential_checking";
    case Statistic::FileCracking: return "file_cracking";
  }
  return "?";
}

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::Sampled: return "sampled";
    case Condition::Real: return "real";
    case Condition::Random: return "random";
  }
  return "?";
}

double statistic_value(const RunStatistics& stats, Statistic s) {
  switch (s) {
    case Statistic::ServiceDiscovery: return stats.aggressive_share;
    case Statistic::CredentialChecking: return stats.confirm_share;
    case Statistic::FileCracking: return stats.max_crack_attempts;
  }
  return 0.0;
}

namespace {

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
};

Moments moments(std::span<const double> xs) {
  Moments m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  for (double x : xs) m.variance += (x - m.mean) * (x - m.mean);
  if (xs.size() > 1) m.variance /= static_cast<double>(xs.size() - 1);
  return m;
}

}  // namespace

TTestResult welch_t_test(std::span<const double> group_a, std::span<const double> group_b) {
  if (group_a.size() < 2 || group_b.size() < 2)
    throw PreconditionError("welch_t_test needs at least two values per group");
  const Moments a = moments(group_a);
  const Moments b = moments(group_b);
  const double na = static_cast<double>(group_a.size());
  const double nb = static_cast<double>(group_b.size());
  const double va = a.variance / na;
  const double vb = b.variance / nb;
  if (!(va + vb > 0.0)) throw PreconditionError("welch_t_test needs nonzero variance in a group");

  TTestResult r;
  r.t_statistic = (a.mean - b.mean) / std::sqrt(va + vb);
  r.dof = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  const boost::math::students_t dist(r.dof);
  r.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t_statistic))));
  return r;
}

ClassificationScore accuracy_and_xent(std::span<const int> predictions,
                                      std::span<const std::vector<double>> posteriors,
                                      std::span<const int> labels) {
  if (predictions.size() != labels.size() || posteriors.size() != labels.size())
    throw PreconditionError("predictions, posteriors and labels must have equal lengths");
  if (labels.empty()) throw PreconditionError("no predictions to score");
  ClassificationScore s;
  int correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= posteriors[i].size())
      throw PreconditionError("label outside the posterior's class range");
    if (predictions[i] == y) ++correct;
    double mass = posteriors[i][static_cast<std::size_t>(y)];
    if (mass < kLogFloor) {
      mass = kLogFloor;
      ++s.floored;
    }
    s.cross_entropy -= std::log(mass);
  }
  const double n = static_cast<double>(labels.size());
  s.accuracy = correct / n;
  s.cross_entropy /= n;
  return s;
}

BiasParams random_params(Rng& rng) {
  BiasParams p;
  p.lambda_l = rng.uniform(kRandomLossRange.min, kRandomLossRange.max);
  p.lambda_c = rng.uniform(kRandomConfirmRange.min, kRandomConfirmRange.max);
  p.lambda_s = rng.uniform(kRandomSunkRange.min, kRandomSunkRange.max);
  return p;
}

DistanceReport distance_experiment(std::span<const LabeledRun> runs, const ScenarioConfig& scenario,
                                   const ChoiceConfig& cfg, const ParamDistributionTable& table,
                                   const StateInferrer& infer, const DistanceOptions& options) {
  std::array<bool, BiasState::kCount> wanted{};
  if (options.states.empty()) {
    wanted.fill(true);
  } else {
    for (int s : options.states) wanted[static_cast<std::size_t>(BiasState::from_index(s).index())] = true;
  }

  std::array<int, BiasState::kCount> counts{};
  std::vector<std::size_t> selected;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& state = runs[i].label.state;
    if (!state) throw PreconditionError("distance_experiment needs state-labeled runs");
    if (!wanted[static_cast<std::size_t>(state->index())]) continue;
    ++counts[static_cast<std::size_t>(state->index())];
    selected.push_back(i);
  }
  if (selected.empty()) throw PreconditionError("no runs match the selected states");
  for (int s = 0; s < BiasState::kCount; ++s) {
    const int c = counts[static_cast<std::size_t>(s)];
    if (c > 0 && c < options.min_runs_per_state)
      throw PreconditionError(to_string(BiasState::from_index(s)) + " has " + std::to_string(c) +
                              " runs; at least " + std::to_string(options.min_runs_per_state) +
                              " are required");
  }
  if (!options.states.empty())
    for (int s : options.states)
      if (counts[static_cast<std::size_t>(s)] == 0)
        throw PreconditionError(to_string(BiasState::from_index(s)) + " has no runs");

  DistanceReport report;
  report.samples.resize(selected.size() * kConditionCount);
  detail::parallel_for(report.samples.size(), options.jobs, [&](std::size_t task) {
    const std::size_t run_index = selected[task / kConditionCount];
    const auto condition = static_cast<Condition>(task % kConditionCount);
    const LabeledRun& run = runs[run_index];
    std::uint64_t seed = Rng::derive(options.seed, run_index * kConditionCount + task % kConditionCount);

    EpisodeSubject subject = run.label.params;
    switch (condition) {
      case Condition::Sampled: subject = infer(run.log); break;
      case Condition::Real:
        if (options.reuse_seed) seed = run.label.seed;
        break;
      case Condition::Random: {
        Rng rng(Rng::derive(seed, 0));
        subject = random_params(rng);
        break;
      }
    }
    const EpisodeResult sim = run_episode(scenario, subject, cfg, seed, table);
    report.samples[task] = {static_cast<int>(run_index), run.label.state->index(), condition,
                            run_statistics(run.log), run_statistics(sim.log), seed};
  });

  std::map<std::tuple<int, int, int>, std::vector<double>> distances;
  for (const auto& s : report.samples)
    for (int st = 0; st < kStatisticCount; ++st) {
      const auto statistic = static_cast<Statistic>(st);
      distances[{s.state, st, static_cast<int>(s.condition)}].push_back(
          std::abs(statistic_value(s.real, statistic) - statistic_value(s.synthetic, statistic)));
    }
  for (const auto& [key, values] : distances) {
    const auto [state, st, cond] = key;
    const Moments m = moments(values);
    auto& cell = report.cells[static_cast<std::size_t>(state)][static_cast<std::size_t>(st)]
                             [static_cast<std::size_t>(cond)];
    cell = {m.mean, values.size() > 1 ? std::sqrt(m.variance) : 0.0, static_cast<int>(values.size())};
    report.present[static_cast<std::size_t>(state)] = true;
  }
  return report;
}

TTestResult trigger_effect(std::span<const LabeledRun> trigger_runs,
                           std::span<const LabeledRun> baseline_runs) {
  const auto high_sunk = [](std::span<const LabeledRun> runs) {
    std::vector<double> out;
    for (const auto& r : runs)
      if (r.label.state && r.label.state->sunk_cost() == BiasLevel::High)
        out.push_back(run_statistics(r.log).max_crack_attempts);
    return out;
  };
  const auto a = high_sunk(trigger_runs);
  const auto b = high_sunk(baseline_runs);
  return welch_t_test(a, b);
}

namespace {

std::string cell_text(const DistanceCell& c) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.3f +/- %.3f", c.mean, c.stddev);
  return buf;
}

}  // namespace

std::string format_distance_report(const DistanceReport& report) {
  std::ostringstream out;
  out << "# psyborg distance report v1\n";
  char line[192];
  std::snprintf(line, sizeof line, "%-8s %-20s %-18s %-18s %-18s %s\n", "state", "statistic", "sampled",
                "real", "random", "n");
  out << line;
  for (BiasState s : BiasState::all()) {
    if (!report.present[static_cast<std::size_t>(s.index())]) continue;
    for (int st = 0; st < kStatisticCount; ++st) {
      const auto statistic = static_cast<Statistic>(st);
      std::snprintf(line, sizeof line, "%-8s %-20s %-18s %-18s %-18s %d\n", to_string(s).c_str(),
                    std::string(to_string(statistic)).c_str(),
                    cell_text(report.cell(s, statistic, Condition::Sampled)).c_str(),
                    cell_text(report.cell(s, statistic, Condition::Real)).c_str(),
                    cell_text(report.cell(s, statistic, Condition::Random)).c_str(),
                    report.cell(s, statistic, Condition::Sampled).count);
      out << line;
    }
  }
  return out.str();
}

std::string distance_report_to_json(const DistanceReport& report,
                                    const std::optional<TTestResult>& ttest) {
  json rows = json::array();
  for (BiasState s : BiasState::all()) {
    if (!report.present[static_cast<std::size_t>(s.index())]) continue;
    for (int st = 0; st < kStatisticCount; ++st) {
      const auto statistic = static_cast<Statistic>(st);
      json row = {{"state", to_string(s)}, {"statistic", to_string(statistic)}};
      for (int c = 0; c < kConditionCount; ++c) {
        const auto& cell = report.cell(s, statistic, static_cast<Condition>(c));
        row[std::string(to_string(static_cast<Condition>(c)))] = {
            {"mean", cell.mean}, {"std", cell.stddev}, {"n", cell.count}};
      }
      rows.push_back(std::move(row));
    }
  }
  json doc = {{"schema", "psyborg.distance_report"}, {"schema_version", 1}, {"rows", rows}};
  if (ttest)
    doc["trigger_ttest"] = {{"t_statistic", ttest->t_statistic}, {"p_value", ttest->p_value},
                            {"dof", ttest->dof}};
  return doc.dump(2);
}

std::string distance_samples_csv(const DistanceReport& report) {
  std::ostringstream out;
  out << "run,state,condition,real_aggressive_share,real_confirm_share,real_max_crack_attempts,"
         "synthetic_aggressive_share,synthetic_confirm_share,synthetic_max_crack_attempts\n";
  char line[256];
  for (const auto& s : report.samples) {
    std::snprintf(line, sizeof line, "%d,%s,%s,%.6f,%.6f,%d,%.6f,%.6f,%d\n", s.run,
                  to_string(BiasState::from_index(s.state)).c_str(),
                  std::string(to_string(s.condition)).c_str(), s.real.aggressive_share,
                  s.real.confirm_share, s.real.max_crack_attempts, s.synthetic.aggressive_share,
                  s.synthetic.confirm_share, s.synthetic.max_crack_attempts);
    out << line;
  }
  return out.str();
}

}  // namespace psyborg
