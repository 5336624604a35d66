#pragma once

#include <Eigen/Core>
#include <map>
#include <string>
#include <vector>

#include "eggp/model.hpp"

namespace eggp {

// Root mean squared error over all entries.
double rmse(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth);

// Mean absolute percentage error with the denominator floored at `floor` to
// keep near-zero truths from dominating.
double mape(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth,
            double floor = 1e-8);
// Literal |pred - truth| / |truth|; may be inf or nan at zero truths.
double mape_unfloored(const Eigen::MatrixXd& pred,
                      const Eigen::MatrixXd& truth);

// Mean Gaussian marginal negative log likelihood; variances floored at 1e-12.
double nll(const Eigen::MatrixXd& mean, const Eigen::MatrixXd& variance,
           const Eigen::MatrixXd& truth);

struct TargetMetrics {
  std::string name;
  double rmse = 0.0;
  double mape = 0.0;
  double mape_unfloored = 0.0;
  double nll = 0.0;
  long count = 0;
};

struct MetricReport {
  // Aggregates: rmse/mape over all entries; nll is the per-target mean summed
  // over targets.
  double rmse = 0.0;
  double mape = 0.0;
  double mape_unfloored = 0.0;
  double nll = 0.0;
  long count = 0;
  std::vector<TargetMetrics> per_target;
  std::map<std::string, std::string> config_echo;
};

std::string target_name(int position_dim_index);

// One-step-ahead evaluation over a held-out series: every snapshot t with a
// successor is predicted from ground truth. In fixed mode the adjacency of
// the series' first snapshot is used throughout.
MetricReport evaluate_one_step(const FittedModel& model,
                               const GraphSeries& series);

struct RolloutEval {
  // Per step: position RMSE against the matching ground-truth snapshot (only
  // while the series lasts) and the mean predictive variance.
  std::vector<double> position_rmse;
  std::vector<double> mean_variance;
};
RolloutEval evaluate_rollout(const FittedModel& model,
                             const GraphSeries& series, int steps);

}  // namespace eggp
