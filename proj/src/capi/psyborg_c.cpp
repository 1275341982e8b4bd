#include "psyborg/psyborg.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "psyborg/action_log.hpp"
#include "psyborg/commands.hpp"
#include "psyborg/error.hpp"

struct psy_scenario {
  psyborg::ScenarioConfig config;
};

struct psy_choice {
  psyborg::ChoiceConfig config;
};

struct psy_emissions {
  psyborg::EmissionTable table;
};

struct psy_episode {
  psyborg::ActionSequence log;
};

namespace {

thread_local std::string last_error;

psy_status fail(psy_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

// Runs `fn`, mapping library exceptions onto status codes.
template <class Fn>
psy_status guarded(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return PSY_OK;
  } catch (const psyborg::ConfigError& e) {
    return fail(PSY_ERR_CONFIG, e.what());
  } catch (const psyborg::CalibrationError& e) {
    return fail(PSY_ERR_CALIBRATION, e.what());
  } catch (const psyborg::PreconditionError& e) {
    return fail(PSY_ERR_PRECONDITION, e.what());
  } catch (const psyborg::IoError& e) {
    return fail(PSY_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(PSY_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PSY_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(PSY_ERR_INTERNAL, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string str(const char* s) { return s ? s : ""; }

bool valid_state(int index) { return index >= 0 && index < psyborg::BiasState::kCount; }

psyborg::BiasState state_of(int index) { return psyborg::BiasState::from_index(index); }

psy_ttest to_c(const psyborg::TTestResult& r) { return {r.t_statistic, r.dof, r.p_value}; }

}  // namespace

#define PSY_REQUIRE(cond) \
  if (!(cond)) return fail(PSY_ERR_INVALID_ARGUMENT, "invalid argument: " #cond)

extern "C" {

const char* psy_version(void) { return PSYBORG_VERSION; }

const char* psy_last_error(void) { return last_error.c_str(); }

const char* psy_status_name(psy_status status) {
  switch (status) {
    case PSY_OK: return "ok";
    case PSY_ERR_INVALID_ARGUMENT: return "invalid argument";
    case PSY_ERR_CONFIG: return "config error";
    case PSY_ERR_CALIBRATION: return "calibration error";
    case PSY_ERR_PRECONDITION: return "precondition error";
    case PSY_ERR_IO: return "io error";
    case PSY_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void psy_string_free(char* s) { std::free(s); }

psy_status psy_parse_state(const char* text, int* index_out) {
  PSY_REQUIRE(text && index_out);
  const auto s = psyborg::parse_bias_state(text);
  if (!s) return fail(PSY_ERR_INVALID_ARGUMENT, std::string("unknown bias state: ") + text);
  *index_out = s->index();
  last_error.clear();
  return PSY_OK;
}

psy_status psy_scenario_default(psy_scenario** out) {
  PSY_REQUIRE(out);
  return guarded([&] { *out = new psy_scenario{}; });
}

psy_status psy_scenario_load(const char* path, psy_scenario** out) {
  PSY_REQUIRE(path && out);
  return guarded([&] { *out = new psy_scenario{psyborg::load_scenario(path)}; });
}

psy_status psy_scenario_from_json(const char* text, psy_scenario** out) {
  PSY_REQUIRE(text && out);
  return guarded([&] { *out = new psy_scenario{psyborg::scenario_from_json(text)}; });
}

psy_status psy_scenario_set_trigger(psy_scenario* scenario, int enabled) {
  PSY_REQUIRE(scenario);
  scenario->config.trigger.enabled = enabled != 0;
  last_error.clear();
  return PSY_OK;
}

psy_status psy_scenario_to_json(const psy_scenario* scenario, char** json_out) {
  PSY_REQUIRE(scenario && json_out);
  return guarded([&] { *json_out = dup_string(psyborg::scenario_to_json(scenario->config)); });
}

psy_status psy_scenario_hash(const psy_scenario* scenario, char** hash_out) {
  PSY_REQUIRE(scenario && hash_out);
  return guarded([&] { *hash_out = dup_string(psyborg::scenario_hash(scenario->config)); });
}

void psy_scenario_free(psy_scenario* scenario) { delete scenario; }

psy_status psy_choice_calibrate(double p_low, double p_high, double lambda_low,
                                double lambda_high, psy_choice** out) {
  PSY_REQUIRE(out);
  return guarded([&] {
    *out = new psy_choice{psyborg::calibrate_choice({p_low, p_high}, {lambda_low, lambda_high})};
  });
}

psy_status psy_choice_load(const char* path, psy_choice** out) {
  PSY_REQUIRE(path && out);
  return guarded([&] {
    *out = new psy_choice{psyborg::choice_from_json(psyborg::read_text_file(path))};
  });
}

psy_status psy_choice_to_json(const psy_choice* choice, char** json_out) {
  PSY_REQUIRE(choice && json_out);
  return guarded([&] { *json_out = dup_string(psyborg::choice_to_json(choice->config)); });
}

psy_status psy_aggressive_probability(const psy_choice* choice, double lambda_l, double* p_out) {
  PSY_REQUIRE(choice && p_out);
  return guarded([&] { *p_out = psyborg::aggressive_probability(choice->config, lambda_l); });
}

void psy_choice_free(psy_choice* choice) { delete choice; }

psy_status psy_emissions_compute(const psy_choice* choice, int nodes, psy_emissions** out) {
  PSY_REQUIRE(choice && out);
  return guarded([&] {
    *out = new psy_emissions{psyborg::compute_emissions(psyborg::ParamDistributionTable::defaults(),
                                                        choice->config, nodes)};
  });
}

psy_status psy_emissions_load(const char* path, psy_emissions** out) {
  PSY_REQUIRE(path && out);
  return guarded([&] {
    *out = new psy_emissions{psyborg::emissions_from_json(psyborg::read_text_file(path))};
  });
}

psy_status psy_emissions_row(const psy_emissions* em, int state, psy_emission_row* row_out) {
  PSY_REQUIRE(em && row_out && valid_state(state));
  return guarded([&] {
    const auto& r = em->table[state_of(state)];
    *row_out = {r.p_ua, r.p_us, r.p_uc, r.p_ud};
  });
}

void psy_emissions_free(psy_emissions* em) { delete em; }

psy_status psy_episode_run(const psy_scenario* scenario, const psy_choice* choice, int state,
                           uint64_t seed, psy_episode** out) {
  PSY_REQUIRE(scenario && out && valid_state(state));
  return guarded([&] {
    const psyborg::ChoiceConfig cfg = choice ? choice->config : psyborg::calibrate_choice();
    auto result = psyborg::run_episode(scenario->config, state_of(state), cfg, seed);
    *out = new psy_episode{std::move(result.log)};
  });
}

psy_status psy_episode_load(const char* log_path, psy_episode** out) {
  PSY_REQUIRE(log_path && out);
  return guarded([&] {
    *out = new psy_episode{psyborg::action_log_from_jsonl(psyborg::read_text_file(log_path))};
  });
}

size_t psy_episode_length(const psy_episode* episode) {
  return episode ? episode->log.records.size() : 0;
}

psy_status psy_episode_to_jsonl(const psy_episode* episode, char** jsonl_out) {
  PSY_REQUIRE(episode && jsonl_out);
  return guarded([&] { *jsonl_out = dup_string(psyborg::action_log_to_jsonl(episode->log)); });
}

psy_status psy_episode_features(const psy_episode* episode, psy_features* out) {
  PSY_REQUIRE(episode && out);
  return guarded([&] {
    const auto fv = psyborg::extract_features(episode->log);
    *out = {fv.p_hat_ua, fv.p_hat_uc, fv.f_max};
  });
}

psy_status psy_episode_posterior(const psy_episode* episode, const psy_emissions* em,
                                 psy_posterior* out) {
  PSY_REQUIRE(episode && em && out);
  return guarded([&] {
    const auto post = psyborg::infer_posterior(episode->log, em->table);
    const auto id = post.identifiable();
    for (int i = 0; i < PSY_STATE_COUNT; ++i) out->state[i] = post.probabilities()[static_cast<std::size_t>(i)];
    for (int i = 0; i < 4; ++i) out->identifiable[i] = id[static_cast<std::size_t>(i)];
    out->map_state = psyborg::map_state(post).index();
    out->map_identifiable = psyborg::map_identifiable(post);
  });
}

void psy_episode_free(psy_episode* episode) { delete episode; }

psy_status psy_welch_t_test(const double* a, size_t na, const double* b, size_t nb,
                            psy_ttest* out) {
  PSY_REQUIRE((a || na == 0) && (b || nb == 0) && out);
  return guarded([&] { *out = to_c(psyborg::welch_t_test({a, na}, {b, nb})); });
}

void psy_generate_options_init(psy_generate_options* options) {
  if (!options) return;
  const psyborg::GenerateOptions d;
  *options = {nullptr, nullptr, nullptr, d.seed, d.trigger ? 1 : 0, d.episodes_per_state, d.jobs};
}

psy_status psy_cmd_generate(const psy_generate_options* options, char** summary_out) {
  PSY_REQUIRE(options && options->out_dir);
  return guarded([&] {
    psyborg::GenerateOptions o;
    o.config_path = str(options->config_path);
    o.choice_path = str(options->choice_path);
    o.out_dir = options->out_dir;
    o.seed = options->seed;
    o.trigger = options->trigger != 0;
    o.episodes_per_state = options->episodes_per_state;
    o.jobs = options->jobs;
    const auto r = psyborg::cmd_generate(o);
    if (summary_out) *summary_out = dup_string(r.summary);
  });
}

void psy_infer_options_init(psy_infer_options* options) {
  if (!options) return;
  const psyborg::InferOptions d;
  *options = {nullptr, PSY_INFER_BAYES, nullptr, d.train_split, d.split_seed, nullptr, d.trace ? 1 : 0};
}

psy_status psy_cmd_infer(const psy_infer_options* options, psy_infer_metrics* metrics_out,
                         char** summary_out) {
  PSY_REQUIRE(options && options->data_dir);
  PSY_REQUIRE(options->method == PSY_INFER_BAYES || options->method == PSY_INFER_TREE);
  return guarded([&] {
    psyborg::InferOptions o;
    o.data_dir = options->data_dir;
    o.method = options->method == PSY_INFER_TREE ? psyborg::InferMethod::Tree : psyborg::InferMethod::Bayes;
    o.model_path = str(options->model_path);
    o.train_split = options->train_split;
    o.split_seed = options->split_seed;
    o.out_path = str(options->out_path);
    o.trace = options->trace != 0;
    const auto r = psyborg::cmd_infer(o);
    if (metrics_out) {
      const auto& m = r.metrics;
      *metrics_out = {m.evaluated, m.accuracy4, m.cross_entropy4.has_value(), m.cross_entropy4.value_or(0.0),
                      m.floored4, m.accuracy8, m.cross_entropy8.has_value(), m.cross_entropy8.value_or(0.0),
                      {m.bit_accuracy[0], m.bit_accuracy[1], m.bit_accuracy[2]}};
    }
    if (summary_out) *summary_out = dup_string(r.summary);
  });
}

void psy_evaluate_options_init(psy_evaluate_options* options) {
  if (!options) return;
  const psyborg::EvaluateOptions d;
  *options = {nullptr, nullptr, nullptr, nullptr, nullptr, 0, d.min_runs_per_state, 0, 0,
              d.reuse_seed ? 1 : 0, d.jobs};
}

psy_status psy_cmd_evaluate(const psy_evaluate_options* options, psy_evaluate_result* result_out,
                            char** summary_out) {
  PSY_REQUIRE(options && options->data_dir && options->out_path);
  PSY_REQUIRE(options->states || options->state_count == 0);
  PSY_REQUIRE(std::all_of(options->states, options->states + options->state_count, valid_state));
  return guarded([&] {
    psyborg::EvaluateOptions o;
    o.data_dir = options->data_dir;
    o.out_path = options->out_path;
    o.baseline_dir = str(options->baseline_dir);
    o.model_path = str(options->model_path);
    o.states.assign(options->states, options->states + options->state_count);
    o.min_runs_per_state = options->min_runs_per_state;
    if (options->has_seed) o.seed = options->seed;
    o.reuse_seed = options->reuse_seed != 0;
    o.jobs = options->jobs;
    const auto r = psyborg::cmd_evaluate(o);
    if (result_out) {
      *result_out = {};
      for (int s = 0; s < PSY_STATE_COUNT; ++s)
        for (int st = 0; st < 3; ++st)
          for (int c = 0; c < 3; ++c) {
            const auto& cell = r.report.cells[static_cast<std::size_t>(s)][static_cast<std::size_t>(st)]
                                             [static_cast<std::size_t>(c)];
            result_out->cells[s][st][c] = {r.report.present[static_cast<std::size_t>(s)] ? 1 : 0,
                                           cell.mean, cell.stddev, cell.count};
          }
      result_out->has_ttest = r.ttest.has_value();
      if (r.ttest) result_out->ttest = to_c(*r.ttest);
    }
    if (summary_out) *summary_out = dup_string(r.summary);
  });
}

void psy_calibrate_options_init(psy_calibrate_options* options) {
  if (!options) return;
  const psyborg::CalibrateOptions d;
  *options = {nullptr, d.targets.p_low, d.targets.p_high, d.anchors.lambda_low, d.anchors.lambda_high,
              d.nodes, d.drift_nodes};
}

psy_status psy_cmd_calibrate(const psy_calibrate_options* options, psy_calibrate_result* result_out,
                             char** summary_out) {
  PSY_REQUIRE(options && options->out_dir);
  return guarded([&] {
    psyborg::CalibrateOptions o;
    o.out_dir = options->out_dir;
    o.targets = {options->p_low, options->p_high};
    o.anchors = {options->lambda_low, options->lambda_high};
    o.nodes = options->nodes;
    o.drift_nodes = options->drift_nodes;
    const auto r = psyborg::cmd_calibrate(o);
    if (result_out) *result_out = {r.max_deviation, r.drift};
    if (summary_out) *summary_out = dup_string(r.summary);
  });
}

}  // extern "C"
