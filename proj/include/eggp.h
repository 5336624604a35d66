#ifndef EGGP_H
#define EGGP_H

/* C interface to the evolving-graph GP library. All functions returning
 * eggp_status set a thread-local message retrievable via eggp_last_error()
 * on failure. Handles are opaque; every open/train allocation must be
 * released with the matching close call. */

#ifdef __cplusplus
extern "C" {
#endif

typedef enum eggp_status {
  EGGP_OK = 0,
  EGGP_INVALID_INPUT = 1,
  EGGP_CONFIG_ERROR = 2,
  EGGP_TRAINING_ERROR = 3,
  EGGP_MISMATCH = 4,
  EGGP_NUMERICAL_ERROR = 5,
  EGGP_IO_ERROR = 6,
  EGGP_INTERNAL_ERROR = 7
} eggp_status;

const char* eggp_version(void);
const char* eggp_status_name(eggp_status status);
/* Message from the most recent failing call on this thread; empty if none. */
const char* eggp_last_error(void);

typedef struct eggp_series eggp_series;
typedef struct eggp_model eggp_model;

/* Generates a graph series for env "gi" or "eis" and writes it to out_path
 * (plus .meta.json and .manifest.json sidecars). config_path may be NULL for
 * defaults. seed overrides the config seed when override_seed is nonzero;
 * the rope scene is deterministic and ignores it. */
eggp_status eggp_simulate(const char* env, const char* config_path,
                          unsigned long long seed, int override_seed,
                          const char* out_path);

eggp_status eggp_series_open(const char* path, eggp_series** out);
void eggp_series_close(eggp_series* series);
int eggp_series_length(const eggp_series* series);
/* Node count of one snapshot, or -1 if the index is out of range. */
int eggp_series_node_count(const eggp_series* series, int snapshot);

typedef struct eggp_train_options {
  const char* method; /* "eggp" | "gpr" */
  const char* mode;   /* "evolving" | "fixed" */
  int n_points;
  int min_gap;
  int target_dim; /* position dim to fit, or -1 for all dims jointly */
  double r_nn;    /* <= 0: environment default is NOT inferred; set explicitly */
  int k_nn;
  int adam_iterations;
  double learning_rate;
  int optimize; /* 0: keep initial hyperparameters */
} eggp_train_options;

/* Fills every field with the library defaults (r_nn 0.043, k_nn 2). */
void eggp_train_options_init(eggp_train_options* opts);

eggp_status eggp_train(const eggp_series* series,
                       const eggp_train_options* opts, eggp_model** out);
/* File-to-file variant; also writes the loss trace CSV (loss_csv_path, or
 * model_out_path + ".loss.csv" when NULL) and a manifest sidecar. On a
 * training failure the partial loss trace is still written. */
eggp_status eggp_train_file(const char* data_path,
                            const eggp_train_options* opts,
                            const char* model_out_path,
                            const char* loss_csv_path);

eggp_status eggp_model_open(const char* path, eggp_model** out);
eggp_status eggp_model_save(const eggp_model* model, const char* path);
void eggp_model_close(eggp_model* model);
int eggp_model_output_dim(const eggp_model* model);

/* One-step posterior for one snapshot of a series. Call with NULL buffers to
 * query sizes: *m_out nodes and *f_out outputs. With non-NULL buffers, both
 * must hold m*f doubles and are filled row-major (node-major). In fixed
 * adjacency mode the series' first snapshot supplies the edge set. */
eggp_status eggp_predict_step(const eggp_model* model,
                              const eggp_series* series, int snapshot,
                              double* mean_out, double* var_out, int* m_out,
                              int* f_out);

typedef struct eggp_eval_options {
  int one_step;      /* nonzero: one-step-ahead evaluation */
  int rollout_steps; /* used when one_step is zero */
} eggp_eval_options;

/* Evaluates a stored model on a stored series. Writes <out_prefix>.csv,
 * <out_prefix>.json and <out_prefix>.manifest.json. */
eggp_status eggp_evaluate_files(const char* model_path, const char* data_path,
                                const eggp_eval_options* opts,
                                const char* out_prefix);

/* Runs the experiment matrix config; artifacts land under out_dir. */
eggp_status eggp_experiment_run(const char* matrix_path, const char* out_dir,
                                int jobs, int svg);

#ifdef __cplusplus
}
#endif

#endif /* EGGP_H */
