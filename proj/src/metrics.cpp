#include "eggp/metrics.hpp"

#include <cmath>
#include <numbers>

#include "eggp/errors.hpp"

namespace eggp {
namespace {

void check_shapes(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                  const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvalidInputError(std::string(what) + ": shape mismatch");
  if (a.size() == 0) throw InvalidInputError(std::string(what) + ": empty");
}

}  // namespace

double rmse(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth) {
  check_shapes(pred, truth, "rmse");
  return std::sqrt((pred - truth).array().square().mean());
}

double mape(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth,
            double floor) {
  check_shapes(pred, truth, "mape");
  return ((pred - truth).array().abs() /
          truth.array().abs().max(floor))
      .mean();
}

double mape_unfloored(const Eigen::MatrixXd& pred,
                      const Eigen::MatrixXd& truth) {
  check_shapes(pred, truth, "mape");
  return ((pred - truth).array().abs() / truth.array().abs()).mean();
}

double nll(const Eigen::MatrixXd& mean, const Eigen::MatrixXd& variance,
           const Eigen::MatrixXd& truth) {
  check_shapes(mean, truth, "nll");
  check_shapes(variance, truth, "nll");
  const auto var = variance.array().max(1e-12);
  return (0.5 * (2.0 * std::numbers::pi * var).log() +
          (truth - mean).array().square() / (2.0 * var))
      .mean();
}

std::string target_name(int position_dim_index) {
  static const char* names[] = {"dx", "dy", "dz"};
  if (position_dim_index >= 0 && position_dim_index < 3)
    return names[position_dim_index];
  return "d" + std::to_string(position_dim_index);
}

MetricReport evaluate_one_step(const FittedModel& model,
                               const GraphSeries& series) {
  if (series.size() < 3)
    throw InvalidInputError("evaluate_one_step: series needs at least 3 snapshots");
  const int num_nodes = series.front().num_vertices();
  for (const auto& g : series)
    if (g.num_vertices() != num_nodes)
      throw MismatchError("evaluate_one_step: node count varies across series");

  GraphSeries eval_series;
  const GraphSeries* src = &series;
  if (model.mode == AdjacencyMode::fixed) {
    eval_series = freeze_adjacency(series);
    src = &eval_series;
  }

  // Snapshot 0 carries a zero prev_velocity placeholder, so prediction starts
  // at t = 1, mirroring the training candidate range.
  const Eigen::Index f = model.output_dim();
  const Eigen::Index steps = static_cast<Eigen::Index>(series.size()) - 2;
  Eigen::MatrixXd pred_mean(steps * num_nodes, f);
  Eigen::MatrixXd pred_var(steps * num_nodes, f);
  Eigen::MatrixXd truth(steps * num_nodes, f);
  for (Eigen::Index s = 0; s < steps; ++s) {
    const std::size_t t = static_cast<std::size_t>(s) + 1;
    Prediction p = predict_step(model, (*src)[t]);
    pred_mean.middleRows(s * num_nodes, num_nodes) = p.mean;
    pred_var.middleRows(s * num_nodes, num_nodes) = p.variance;
    const auto& cur = series[t].vertices();
    const auto& nxt = series[t + 1].vertices();
    for (int i = 0; i < num_nodes; ++i)
      for (Eigen::Index j = 0; j < f; ++j)
        truth(s * num_nodes + i, j) =
            nxt[static_cast<std::size_t>(i)].position[model.target_dims[static_cast<std::size_t>(j)]] -
            cur[static_cast<std::size_t>(i)].position[model.target_dims[static_cast<std::size_t>(j)]];
  }

  MetricReport rep;
  rep.count = static_cast<long>(truth.size());
  rep.rmse = rmse(pred_mean, truth);
  rep.mape = mape(pred_mean, truth);
  rep.mape_unfloored = mape_unfloored(pred_mean, truth);
  rep.nll = 0.0;
  for (Eigen::Index j = 0; j < f; ++j) {
    TargetMetrics tm;
    tm.name = target_name(model.target_dims[static_cast<std::size_t>(j)]);
    tm.count = static_cast<long>(truth.rows());
    tm.rmse = rmse(pred_mean.col(j), truth.col(j));
    tm.mape = mape(pred_mean.col(j), truth.col(j));
    tm.mape_unfloored = mape_unfloored(pred_mean.col(j), truth.col(j));
    tm.nll = nll(pred_mean.col(j), pred_var.col(j), truth.col(j));
    rep.nll += tm.nll;
    rep.per_target.push_back(std::move(tm));
  }
  return rep;
}

RolloutEval evaluate_rollout(const FittedModel& model,
                             const GraphSeries& series, int steps) {
  if (series.empty())
    throw InvalidInputError("evaluate_rollout: empty series");
  Rollout ro = rollout(model, series.front(), steps);
  RolloutEval ev;
  for (int s = 1; s <= steps; ++s) {
    const GraphSnapshot& pred = ro.snapshots[static_cast<std::size_t>(s)];
    if (static_cast<std::size_t>(s) < series.size()) {
      const GraphSnapshot& truth = series[static_cast<std::size_t>(s)];
      if (truth.num_vertices() != pred.num_vertices())
        throw MismatchError("evaluate_rollout: node count varies across series");
      double acc = 0.0;
      long cnt = 0;
      for (int i = 0; i < pred.num_vertices(); ++i) {
        const auto& pp = pred.vertex(i).position;
        const auto& tp = truth.vertex(i).position;
        for (Eigen::Index d = 0; d < pp.size(); ++d) {
          const double diff = pp[d] - tp[d];
          acc += diff * diff;
          ++cnt;
        }
      }
      ev.position_rmse.push_back(std::sqrt(acc / static_cast<double>(cnt)));
    }
    ev.mean_variance.push_back(
        ro.variances[static_cast<std::size_t>(s) - 1].mean());
  }
  return ev;
}

}  // namespace eggp
