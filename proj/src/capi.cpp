#include "eggp.h"

#include <map>
#include <optional>
#include <string>

#include "eggp/config.hpp"
#include "eggp/errors.hpp"
#include "eggp/experiment.hpp"
#include "eggp/io.hpp"
#include "eggp/metrics.hpp"
#include "eggp/model.hpp"
#include "eggp/simulate.hpp"
#include "eggp/version.hpp"
#include "json.hpp"

struct eggp_series {
  eggp::GraphSeries series;
};

struct eggp_model {
  eggp::FittedModel model;
};

namespace {

thread_local std::string g_last_error;

template <typename F>
eggp_status wrap(F&& fn) {
  try {
    fn();
    g_last_error.clear();
    return EGGP_OK;
  } catch (const eggp::InvalidInputError& e) {
    g_last_error = e.what();
    return EGGP_INVALID_INPUT;
  } catch (const eggp::ConfigError& e) {
    g_last_error = e.what();
    return EGGP_CONFIG_ERROR;
  } catch (const eggp::TrainingError& e) {
    g_last_error = e.what();
    return EGGP_TRAINING_ERROR;
  } catch (const eggp::MismatchError& e) {
    g_last_error = e.what();
    return EGGP_MISMATCH;
  } catch (const eggp::NumericalError& e) {
    g_last_error = e.what();
    return EGGP_NUMERICAL_ERROR;
  } catch (const eggp::IoError& e) {
    g_last_error = e.what();
    return EGGP_IO_ERROR;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return EGGP_INTERNAL_ERROR;
  }
}

eggp_status fail_invalid(const char* msg) {
  g_last_error = msg;
  return EGGP_INVALID_INPUT;
}

struct TrainSpec {
  eggp::SelectionConfig selection;
  eggp::FitOptions options;
};

TrainSpec train_spec_from(const eggp_train_options& o) {
  if (!o.method) throw eggp::ConfigError("train options: method is null");
  if (!o.mode) throw eggp::ConfigError("train options: mode is null");
  TrainSpec spec;
  spec.options.method = eggp::method_from_string(o.method);
  spec.options.mode = eggp::adjacency_mode_from_string(o.mode);
  spec.options.connectivity.r_nn = o.r_nn;
  spec.options.connectivity.k_nn = o.k_nn;
  spec.options.adam.iterations = o.adam_iterations;
  spec.options.adam.learning_rate = o.learning_rate;
  spec.options.optimize = o.optimize != 0;
  if (o.target_dim >= 0) spec.options.target_dims = {o.target_dim};
  spec.selection.points_per_node = o.n_points;
  spec.selection.min_gap = o.min_gap;
  spec.selection.target_dim = o.target_dim >= 0 ? o.target_dim : 0;
  return spec;
}

eggp::FittedModel train_on(const eggp::GraphSeries& series,
                           const eggp_train_options& opts) {
  const TrainSpec spec = train_spec_from(opts);
  return spec.options.method == eggp::Method::gpr
             ? eggp::fit_gpr_baseline(series, spec.selection, spec.options)
             : eggp::fit(series, spec.selection, spec.options);
}

std::map<std::string, std::string> train_params_echo(
    const eggp_train_options& o) {
  return {{"method", o.method ? o.method : ""},
          {"mode", o.mode ? o.mode : ""},
          {"n_points", std::to_string(o.n_points)},
          {"min_gap", std::to_string(o.min_gap)},
          {"target_dim", std::to_string(o.target_dim)},
          {"r_nn", eggp::io::format_double(o.r_nn)},
          {"k_nn", std::to_string(o.k_nn)},
          {"adam_iterations", std::to_string(o.adam_iterations)},
          {"learning_rate", eggp::io::format_double(o.learning_rate)},
          {"optimize", std::to_string(o.optimize)}};
}

void write_one_step_report(const std::string& out_prefix,
                           const eggp::MetricReport& rep,
                           const std::string& model_path,
                           const std::string& data_path) {
  using eggp::io::format_double;
  std::vector<std::vector<std::string>> rows;
  for (const auto& t : rep.per_target)
    rows.push_back({t.name, format_double(t.rmse), format_double(t.mape),
                    format_double(t.mape_unfloored), format_double(t.nll),
                    std::to_string(t.count)});
  rows.push_back({"all", format_double(rep.rmse), format_double(rep.mape),
                  format_double(rep.mape_unfloored), format_double(rep.nll),
                  std::to_string(rep.count)});
  eggp::io::write_csv(out_prefix + ".csv",
                      "target,rmse,mape,mape_unfloored,nll,count", rows);
  nlohmann::ordered_json j;
  j["kind"] = "one_step";
  j["model"] = model_path;
  j["data"] = data_path;
  j["rmse"] = format_double(rep.rmse);
  j["mape"] = format_double(rep.mape);
  j["mape_unfloored"] = format_double(rep.mape_unfloored);
  j["nll"] = format_double(rep.nll);
  j["count"] = rep.count;
  nlohmann::ordered_json targets = nlohmann::ordered_json::array();
  for (const auto& t : rep.per_target) {
    nlohmann::ordered_json tj;
    tj["target"] = t.name;
    tj["rmse"] = format_double(t.rmse);
    tj["mape"] = format_double(t.mape);
    tj["mape_unfloored"] = format_double(t.mape_unfloored);
    tj["nll"] = format_double(t.nll);
    tj["count"] = t.count;
    targets.push_back(std::move(tj));
  }
  j["per_target"] = std::move(targets);
  eggp::io::write_text_atomic(out_prefix + ".json", j.dump(2) + "\n");
}

void write_rollout_report(const std::string& out_prefix,
                          const eggp::RolloutEval& ev,
                          const std::string& model_path,
                          const std::string& data_path, int steps) {
  using eggp::io::format_double;
  std::vector<std::vector<std::string>> rows;
  for (std::size_t s = 0; s < ev.mean_variance.size(); ++s)
    rows.push_back({std::to_string(s + 1),
                    s < ev.position_rmse.size()
                        ? format_double(ev.position_rmse[s])
                        : std::string(),
                    format_double(ev.mean_variance[s])});
  eggp::io::write_csv(out_prefix + ".csv", "step,position_rmse,mean_variance",
                      rows);
  nlohmann::ordered_json j;
  j["kind"] = "rollout";
  j["model"] = model_path;
  j["data"] = data_path;
  j["steps"] = steps;
  j["compared_steps"] = ev.position_rmse.size();
  if (!ev.position_rmse.empty())
    j["final_compared_rmse"] = format_double(ev.position_rmse.back());
  eggp::io::write_text_atomic(out_prefix + ".json", j.dump(2) + "\n");
}

}  // namespace

extern "C" {

const char* eggp_version(void) { return eggp::kVersion; }

const char* eggp_status_name(eggp_status status) {
  switch (status) {
    case EGGP_OK: return "ok";
    case EGGP_INVALID_INPUT: return "invalid input";
    case EGGP_CONFIG_ERROR: return "config error";
    case EGGP_TRAINING_ERROR: return "training error";
    case EGGP_MISMATCH: return "model/data mismatch";
    case EGGP_NUMERICAL_ERROR: return "numerical error";
    case EGGP_IO_ERROR: return "io error";
    case EGGP_INTERNAL_ERROR: return "internal error";
  }
  return "unknown";
}

const char* eggp_last_error(void) { return g_last_error.c_str(); }

eggp_status eggp_simulate(const char* env, const char* config_path,
                          unsigned long long seed, int override_seed,
                          const char* out_path) {
  if (!env || !out_path) return fail_invalid("simulate: null argument");
  return wrap([&] {
    const std::string env_name = env;
    std::map<std::string, std::string> params;
    params["env"] = env_name;
    params["config"] = config_path ? config_path : "";
    params["seed"] = override_seed ? std::to_string(seed) : "config";
    eggp::GraphSeries series;
    eggp::io::SeriesMeta meta;
    meta.env = env_name;
    if (env_name == "gi") {
      eggp::GiConfig cfg;
      eggp::ConnectivityConfig conn = eggp::gi_default_connectivity();
      if (config_path) {
        const auto tbl = eggp::config::Table::parse_file(config_path);
        const auto& s = tbl.section("gi");
        cfg = eggp::config::gi_config_from(s);
        conn.r_nn = s.get_double("r_nn", conn.r_nn);
        conn.k_nn = static_cast<int>(s.get_int("k_nn", conn.k_nn));
        tbl.finish();
      }
      const auto sim = eggp::simulate_gi(cfg);
      series = eggp::gi_graph_series(sim, conn);
      meta.offset = cfg.rope_offset;
      meta.config["last_contact_step"] = std::to_string(sim.last_contact_step);
    } else if (env_name == "eis") {
      eggp::EisConfig cfg;
      eggp::ConnectivityConfig conn = eggp::eis_default_connectivity();
      if (config_path) {
        const auto tbl = eggp::config::Table::parse_file(config_path);
        const auto& s = tbl.section("eis");
        cfg = eggp::config::eis_config_from(s);
        conn.r_nn = s.get_double("r_nn", conn.r_nn);
        conn.k_nn = static_cast<int>(s.get_int("k_nn", conn.k_nn));
        tbl.finish();
      }
      if (override_seed) cfg.seed = seed;
      series = eggp::eis_graph_series(eggp::simulate_eis(cfg), conn);
      meta.seed = cfg.seed;
    } else {
      throw eggp::ConfigError("unknown environment '" + env_name +
                              "' (expected gi or eis)");
    }
    eggp::io::write_series(out_path, series);
    eggp::io::write_series_meta(out_path, meta);
    std::vector<std::string> inputs;
    if (config_path) inputs.push_back(config_path);
    eggp::io::write_manifest(std::string(out_path) + ".manifest.json",
                             "simulate", params, inputs,
                             {out_path, std::string(out_path) + ".meta.json"});
  });
}

eggp_status eggp_series_open(const char* path, eggp_series** out) {
  if (!path || !out) return fail_invalid("series_open: null argument");
  return wrap([&] { *out = new eggp_series{eggp::io::read_series(path)}; });
}

void eggp_series_close(eggp_series* series) { delete series; }

int eggp_series_length(const eggp_series* series) {
  return series ? static_cast<int>(series->series.size()) : -1;
}

int eggp_series_node_count(const eggp_series* series, int snapshot) {
  if (!series || snapshot < 0 ||
      snapshot >= static_cast<int>(series->series.size()))
    return -1;
  return series->series[static_cast<std::size_t>(snapshot)].num_vertices();
}

void eggp_train_options_init(eggp_train_options* opts) {
  if (!opts) return;
  opts->method = "eggp";
  opts->mode = "evolving";
  opts->n_points = 10;
  opts->min_gap = 20;
  opts->target_dim = -1;
  opts->r_nn = 0.043;
  opts->k_nn = 2;
  opts->adam_iterations = 150;
  opts->learning_rate = 0.1;
  opts->optimize = 1;
}

eggp_status eggp_train(const eggp_series* series,
                       const eggp_train_options* opts, eggp_model** out) {
  if (!series || !opts || !out) return fail_invalid("train: null argument");
  return wrap([&] { *out = new eggp_model{train_on(series->series, *opts)}; });
}

eggp_status eggp_train_file(const char* data_path,
                            const eggp_train_options* opts,
                            const char* model_out_path,
                            const char* loss_csv_path) {
  if (!data_path || !opts || !model_out_path)
    return fail_invalid("train_file: null argument");
  const std::string loss_path =
      loss_csv_path ? loss_csv_path : std::string(model_out_path) + ".loss.csv";
  return wrap([&] {
    const auto series = eggp::io::read_series(data_path);
    eggp::FittedModel model;
    try {
      model = train_on(series, *opts);
    } catch (const eggp::TrainingError& e) {
      eggp::io::write_loss_csv(loss_path, e.loss_trace);
      throw eggp::TrainingError(std::string(e.what()) +
                                    " (partial trace at " + loss_path + ")",
                                e.loss_trace);
    }
    eggp::io::save_model(model_out_path, model);
    eggp::io::write_loss_csv(loss_path, model.loss_trace);
    eggp::io::write_manifest(std::string(model_out_path) + ".manifest.json",
                             "train", train_params_echo(*opts), {data_path},
                             {model_out_path, loss_path});
  });
}

eggp_status eggp_model_open(const char* path, eggp_model** out) {
  if (!path || !out) return fail_invalid("model_open: null argument");
  return wrap([&] { *out = new eggp_model{eggp::io::load_model(path)}; });
}

eggp_status eggp_model_save(const eggp_model* model, const char* path) {
  if (!model || !path) return fail_invalid("model_save: null argument");
  return wrap([&] { eggp::io::save_model(path, model->model); });
}

void eggp_model_close(eggp_model* model) { delete model; }

int eggp_model_output_dim(const eggp_model* model) {
  return model ? static_cast<int>(model->model.output_dim()) : -1;
}

eggp_status eggp_predict_step(const eggp_model* model,
                              const eggp_series* series, int snapshot,
                              double* mean_out, double* var_out, int* m_out,
                              int* f_out) {
  if (!model || !series) return fail_invalid("predict_step: null argument");
  if (snapshot < 0 || snapshot >= static_cast<int>(series->series.size()))
    return fail_invalid("predict_step: snapshot index out of range");
  return wrap([&] {
    const auto& src = series->series[static_cast<std::size_t>(snapshot)];
    const int m = src.num_vertices();
    const int f = static_cast<int>(model->model.output_dim());
    if (m_out) *m_out = m;
    if (f_out) *f_out = f;
    if (!mean_out && !var_out) return;
    if (!mean_out || !var_out)
      throw eggp::InvalidInputError(
          "predict_step: both buffers must be given together");
    const eggp::GraphSnapshot* query = &src;
    std::optional<eggp::GraphSnapshot> fixed_query;
    if (model->model.mode == eggp::AdjacencyMode::fixed) {
      const auto& first = series->series.front();
      fixed_query.emplace(src.time_index(), src.vertices(), first.edges(),
                          first.mandatory_edges());
      query = &*fixed_query;
    }
    const eggp::Prediction pred = eggp::predict_step(model->model, *query);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < f; ++j) {
        mean_out[i * f + j] = pred.mean(i, j);
        var_out[i * f + j] = pred.variance(i, j);
      }
  });
}

eggp_status eggp_evaluate_files(const char* model_path, const char* data_path,
                                const eggp_eval_options* opts,
                                const char* out_prefix) {
  if (!model_path || !data_path || !opts || !out_prefix)
    return fail_invalid("evaluate: null argument");
  return wrap([&] {
    const eggp::FittedModel model = eggp::io::load_model(model_path);
    const auto series = eggp::io::read_series(data_path);
    std::map<std::string, std::string> params;
    params["model"] = model_path;
    params["data"] = data_path;
    if (opts->one_step) {
      params["kind"] = "one_step";
      write_one_step_report(out_prefix, eggp::evaluate_one_step(model, series),
                            model_path, data_path);
    } else {
      if (opts->rollout_steps < 1)
        throw eggp::ConfigError("evaluate: rollout_steps must be >= 1");
      params["kind"] = "rollout";
      params["steps"] = std::to_string(opts->rollout_steps);
      write_rollout_report(out_prefix,
                           eggp::evaluate_rollout(model, series,
                                                  opts->rollout_steps),
                           model_path, data_path, opts->rollout_steps);
    }
    eggp::io::write_manifest(
        std::string(out_prefix) + ".manifest.json", "eval", params,
        {model_path, data_path},
        {std::string(out_prefix) + ".csv", std::string(out_prefix) + ".json"});
  });
}

eggp_status eggp_experiment_run(const char* matrix_path, const char* out_dir,
                                int jobs, int svg) {
  if (!matrix_path || !out_dir)
    return fail_invalid("experiment: null argument");
  return wrap([&] {
    const auto matrix = eggp::ExperimentMatrix::from_file(matrix_path);
    const auto summary =
        eggp::run_experiment(matrix, out_dir, jobs, svg != 0);
    std::map<std::string, std::string> params;
    params["matrix"] = matrix_path;
    params["out_dir"] = out_dir;
    params["computed"] = std::to_string(summary.computed);
    params["reused"] = std::to_string(summary.reused);
    params["failed"] = std::to_string(summary.failed);
    std::vector<std::string> outputs = summary.table_paths;
    outputs.push_back(std::string(out_dir) + "/summary.json");
    eggp::io::write_manifest(std::string(out_dir) + "/manifest.json",
                             "experiment", params, {matrix_path}, outputs);
  });
}

}  // extern "C"
