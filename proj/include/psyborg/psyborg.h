#ifndef PSYBORG_PSYBORG_H
#define PSYBORG_PSYBORG_H

/* C interface of the psyborg library. Every function returns a psy_status;
 * on failure psy_last_error() describes the problem for the calling thread.
 * Strings returned through char** are owned by the caller and released with
 * psy_string_free. Handles are released with their matching *_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  ifdef PSY_BUILDING_LIBRARY
#    define PSY_API __declspec(dllexport)
#  else
#    define PSY_API __declspec(dllimport)
#  endif
#else
#  define PSY_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum psy_status {
  PSY_OK = 0,
  PSY_ERR_INVALID_ARGUMENT = 1, /* null pointer or out-of-range argument */
  PSY_ERR_CONFIG = 2,
  PSY_ERR_CALIBRATION = 3,
  PSY_ERR_PRECONDITION = 4,
  PSY_ERR_IO = 5,
  PSY_ERR_INTERNAL = 6
} psy_status;

PSY_API const char* psy_version(void);
/* Message of the last failing call on this thread; "" after a success. */
PSY_API const char* psy_last_error(void);
PSY_API const char* psy_status_name(psy_status status);
PSY_API void psy_string_free(char* s);

/* ---- bias states ------------------------------------------------------ */

enum { PSY_STATE_COUNT = 8 };

/* "theta3" or "3" -> 3. */
PSY_API psy_status psy_parse_state(const char* text, int* index_out);

/* ---- scenario --------------------------------------------------------- */

typedef struct psy_scenario psy_scenario;

PSY_API psy_status psy_scenario_default(psy_scenario** out);
PSY_API psy_status psy_scenario_load(const char* path, psy_scenario** out);
PSY_API psy_status psy_scenario_from_json(const char* text, psy_scenario** out);
PSY_API psy_status psy_scenario_set_trigger(psy_scenario* scenario, int enabled);
PSY_API psy_status psy_scenario_to_json(const psy_scenario* scenario, char** json_out);
/* 16 hex digits. */
PSY_API psy_status psy_scenario_hash(const psy_scenario* scenario, char** hash_out);
PSY_API void psy_scenario_free(psy_scenario* scenario);

/* ---- choice model and emissions -------------------------------------- */

typedef struct psy_choice psy_choice;

PSY_API psy_status psy_choice_calibrate(double p_low, double p_high, double lambda_low,
                                        double lambda_high, psy_choice** out);
PSY_API psy_status psy_choice_load(const char* path, psy_choice** out);
PSY_API psy_status psy_choice_to_json(const psy_choice* choice, char** json_out);
PSY_API psy_status psy_aggressive_probability(const psy_choice* choice, double lambda_l,
                                              double* p_out);
PSY_API void psy_choice_free(psy_choice* choice);

typedef struct psy_emissions psy_emissions;

typedef struct psy_emission_row {
  double p_ua, p_us, p_uc, p_ud;
} psy_emission_row;

/* Default parameter distributions integrated with `nodes` quadrature nodes. */
PSY_API psy_status psy_emissions_compute(const psy_choice* choice, int nodes, psy_emissions** out);
PSY_API psy_status psy_emissions_load(const char* path, psy_emissions** out);
PSY_API psy_status psy_emissions_row(const psy_emissions* em, int state, psy_emission_row* row_out);
PSY_API void psy_emissions_free(psy_emissions* em);

/* ---- episodes --------------------------------------------------------- */

typedef struct psy_episode psy_episode;

typedef struct psy_features {
  double p_hat_ua;
  double p_hat_uc;
  int f_max;
} psy_features;

typedef struct psy_posterior {
  double state[PSY_STATE_COUNT];
  double identifiable[4]; /* (loss, confirmation) classes */
  int map_state;
  int map_identifiable;
} psy_posterior;

/* Simulates one episode of `state` (0..7); `choice` may be NULL for the
 * default calibration. */
PSY_API psy_status psy_episode_run(const psy_scenario* scenario, const psy_choice* choice,
                                   int state, uint64_t seed, psy_episode** out);
PSY_API psy_status psy_episode_load(const char* log_path, psy_episode** out);
PSY_API size_t psy_episode_length(const psy_episode* episode);
PSY_API psy_status psy_episode_to_jsonl(const psy_episode* episode, char** jsonl_out);
PSY_API psy_status psy_episode_features(const psy_episode* episode, psy_features* out);
PSY_API psy_status psy_episode_posterior(const psy_episode* episode, const psy_emissions* em,
                                         psy_posterior* out);
PSY_API void psy_episode_free(psy_episode* episode);

/* ---- statistics ------------------------------------------------------- */

typedef struct psy_ttest {
  double t;
  double df;
  double p;
} psy_ttest;

PSY_API psy_status psy_welch_t_test(const double* a, size_t na, const double* b, size_t nb,
                                    psy_ttest* out);

/* ---- commands --------------------------------------------------------- */

typedef struct psy_generate_options {
  const char* config_path; /* NULL: $PSYBORG_CONFIG, else defaults */
  const char* choice_path; /* NULL: default calibration */
  const char* out_dir;
  uint64_t seed;
  int trigger;
  int episodes_per_state;
  int jobs;
} psy_generate_options;

PSY_API void psy_generate_options_init(psy_generate_options* options);
PSY_API psy_status psy_cmd_generate(const psy_generate_options* options, char** summary_out);

typedef enum psy_infer_method { PSY_INFER_BAYES = 0, PSY_INFER_TREE = 1 } psy_infer_method;

typedef struct psy_infer_options {
  const char* data_dir;
  psy_infer_method method;
  const char* model_path; /* tree: load instead of training */
  double train_split;
  uint64_t split_seed;
  const char* out_path; /* NULL: <data>/predictions_<method>.jsonl */
  int trace;
} psy_infer_options;

typedef struct psy_infer_metrics {
  int evaluated;
  double accuracy4;
  int has_cross_entropy4;
  double cross_entropy4;
  int floored4;
  double accuracy8;
  int has_cross_entropy8;
  double cross_entropy8;
  double bit_accuracy[3]; /* loss, confirmation, sunk cost */
} psy_infer_metrics;

PSY_API void psy_infer_options_init(psy_infer_options* options);
/* `metrics_out` and `summary_out` may be NULL. */
PSY_API psy_status psy_cmd_infer(const psy_infer_options* options, psy_infer_metrics* metrics_out,
                                 char** summary_out);

typedef struct psy_evaluate_options {
  const char* data_dir;
  const char* out_path;
  const char* baseline_dir; /* optional: dataset with the opposite trigger setting */
  const char* model_path;   /* optional tree model */
  const int* states;        /* NULL or state_count == 0: all */
  size_t state_count;
  int min_runs_per_state;
  int has_seed;
  uint64_t seed;
  int reuse_seed;
  int jobs;
} psy_evaluate_options;

typedef struct psy_distance_cell {
  int present;
  double mean;
  double sd;
  int n;
} psy_distance_cell;

typedef struct psy_evaluate_result {
  /* [state][statistic: service, credential, cracking][condition: sampled, real, random] */
  psy_distance_cell cells[PSY_STATE_COUNT][3][3];
  int has_ttest;
  psy_ttest ttest;
} psy_evaluate_result;

PSY_API void psy_evaluate_options_init(psy_evaluate_options* options);
/* `result_out` and `summary_out` may be NULL. */
PSY_API psy_status psy_cmd_evaluate(const psy_evaluate_options* options,
                                    psy_evaluate_result* result_out, char** summary_out);

typedef struct psy_calibrate_options {
  const char* out_dir;
  double p_low, p_high;
  double lambda_low, lambda_high;
  int nodes;
  int drift_nodes;
} psy_calibrate_options;

typedef struct psy_calibrate_result {
  double max_deviation;
  double drift;
} psy_calibrate_result;

PSY_API void psy_calibrate_options_init(psy_calibrate_options* options);
PSY_API psy_status psy_cmd_calibrate(const psy_calibrate_options* options,
                                     psy_calibrate_result* result_out, char** summary_out);

#ifdef __cplusplus
}
#endif

#endif
