#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "eggp.h"

namespace {

int exit_code(eggp_status status) {
  switch (status) {
    case EGGP_OK: return 0;
    case EGGP_INVALID_INPUT: return 2;
    case EGGP_CONFIG_ERROR: return 2;
    case EGGP_TRAINING_ERROR: return 3;
    case EGGP_MISMATCH: return 4;
    case EGGP_NUMERICAL_ERROR: return 5;
    case EGGP_IO_ERROR: return 2;
    case EGGP_INTERNAL_ERROR: return 1;
  }
  return 1;
}

int finish(eggp_status status) {
  if (status != EGGP_OK)
    std::fprintf(stderr, "error (%s): %s\n", eggp_status_name(status),
                 eggp_last_error());
  return exit_code(status);
}

int target_dim_from(const std::string& name) {
  if (name == "all") return -1;
  if (name == "dx") return 0;
  if (name == "dy") return 1;
  if (name == "dz") return 2;
  return -2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"evolving-graph Gaussian process toolkit"};
  app.set_version_flag("--version", eggp_version());
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "generate a graph-series file");
  std::string sim_env, sim_config, sim_out;
  unsigned long long sim_seed = 0;
  sim->add_option("env", sim_env, "environment: gi or eis")->required();
  sim->add_option("--config", sim_config, "simulator config file");
  auto* seed_opt = sim->add_option("--seed", sim_seed, "seed override")
                       ->envname("EGGP_SEED");
  sim->add_option("--out", sim_out, "output series path")->required();

  auto* train = app.add_subcommand("train", "fit a model on a series file");
  std::string tr_data, tr_method = "eggp", tr_mode = "evolving";
  std::string tr_target = "all", tr_out, tr_loss;
  eggp_train_options topts;
  eggp_train_options_init(&topts);
  bool tr_no_optimize = false;
  train->add_option("--data", tr_data, "training series file")->required();
  train->add_option("--method", tr_method, "eggp or gpr")
      ->check(CLI::IsMember({"eggp", "gpr"}));
  train->add_option("--mode", tr_mode, "adjacency mode: evolving or fixed")
      ->check(CLI::IsMember({"evolving", "fixed"}));
  train->add_option("--n-points", topts.n_points, "training points per node");
  train->add_option("--min-gap", topts.min_gap, "minimum timepoint gap");
  train->add_option("--target", tr_target, "dx, dy, dz or all")
      ->check(CLI::IsMember({"dx", "dy", "dz", "all"}));
  train->add_option("--r-nn", topts.r_nn, "neighbourhood radius");
  train->add_option("--k-nn", topts.k_nn, "max neighbours per node");
  train->add_option("--iterations", topts.adam_iterations, "optimizer steps");
  train->add_option("--learning-rate", topts.learning_rate, "optimizer rate");
  train->add_flag("--no-optimize", tr_no_optimize,
                  "keep initial hyperparameters");
  train->add_option("--out", tr_out, "output model path")->required();
  train->add_option("--loss", tr_loss,
                    "loss trace CSV path (default <out>.loss.csv)");

  auto* eval = app.add_subcommand("eval", "evaluate a model on a series file");
  std::string ev_model, ev_data, ev_out;
  bool ev_one_step = false;
  int ev_rollout = 0;
  eval->add_option("--model", ev_model, "model file")->required();
  eval->add_option("--data", ev_data, "evaluation series file")->required();
  auto* one_step_flag =
      eval->add_flag("--one-step", ev_one_step, "one-step-ahead evaluation");
  auto* rollout_opt =
      eval->add_option("--rollout", ev_rollout, "autoregressive steps");
  one_step_flag->excludes(rollout_opt);
  eval->add_option("--out", ev_out, "output report prefix")->required();

  auto* exp = app.add_subcommand("experiment", "run an experiment matrix");
  std::string ex_matrix, ex_out;
  int ex_jobs = 1;
  bool ex_svg = false;
  exp->add_option("--matrix", ex_matrix, "matrix config file")->required();
  exp->add_option("--out", ex_out, "output directory")->required();
  exp->add_option("--jobs", ex_jobs, "parallel workers");
  exp->add_flag("--svg", ex_svg, "emit SVG plots");

  CLI11_PARSE(app, argc, argv);

  if (sim->parsed()) {
    return finish(eggp_simulate(sim_env.c_str(),
                                sim_config.empty() ? nullptr : sim_config.c_str(),
                                sim_seed, seed_opt->count() > 0 ? 1 : 0,
                                sim_out.c_str()));
  }
  if (train->parsed()) {
    topts.method = tr_method.c_str();
    topts.mode = tr_mode.c_str();
    topts.target_dim = target_dim_from(tr_target);
    topts.optimize = tr_no_optimize ? 0 : 1;
    return finish(eggp_train_file(tr_data.c_str(), &topts, tr_out.c_str(),
                                  tr_loss.empty() ? nullptr : tr_loss.c_str()));
  }
  if (eval->parsed()) {
    if (!ev_one_step && ev_rollout <= 0) {
      std::fprintf(stderr,
                   "error (config error): pass --one-step or --rollout N\n");
      return 2;
    }
    eggp_eval_options eopts{ev_one_step ? 1 : 0, ev_rollout};
    return finish(eggp_evaluate_files(ev_model.c_str(), ev_data.c_str(),
                                      &eopts, ev_out.c_str()));
  }
  if (exp->parsed()) {
    return finish(eggp_experiment_run(ex_matrix.c_str(), ex_out.c_str(),
                                      ex_jobs, ex_svg ? 1 : 0));
  }
  return 1;
}
