#include "eggp/adam.hpp"

#include <cmath>

#include "eggp/errors.hpp"

namespace eggp {

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidInputError("adam: learning_rate must be positive");
  }
  if (iterations < 1) {
    throw InvalidInputError("adam: iterations must be >= 1");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) ||
      !(eps > 0.0)) {
    throw InvalidInputError("adam: bad moment parameters");
  }
}

AdamResult adam_optimize(const Objective& objective, Eigen::VectorXd init,
                         const AdamConfig& cfg) {
  cfg.validate();
  Eigen::VectorXd params = std::move(init);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(params.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(params.size());
  std::vector<double> trace;
  trace.reserve(static_cast<std::size_t>(cfg.iterations) + 1);

  for (int it = 1; it <= cfg.iterations; ++it) {
    auto [loss, grad] = objective(params);
    if (!std::isfinite(loss) || !grad.allFinite()) {
      throw TrainingError(
          "adam: non-finite objective or gradient at iteration " +
              std::to_string(it - 1),
          std::move(trace));
    }
    trace.push_back(loss);

    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(cfg.beta1, it);
    const double c2 = 1.0 - std::pow(cfg.beta2, it);
    params.array() -= cfg.learning_rate * (m.array() / c1) /
                      ((v.array() / c2).sqrt() + cfg.eps);
  }

  auto [final_loss, final_grad] = objective(params);
  (void)final_grad;
  if (!std::isfinite(final_loss)) {
    throw TrainingError("adam: non-finite objective at final parameters",
                        std::move(trace));
  }
  trace.push_back(final_loss);
  return {std::move(params), std::move(trace)};
}

}  // namespace eggp
