#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

namespace eggp {

struct AdamConfig {
  double learning_rate = 0.1;
  int iterations = 150;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

struct AdamResult {
  Eigen::VectorXd params;
  // Objective value at every iterate, plus one final evaluation at the
  // returned parameters (iterations + 1 entries).
  std::vector<double> trace;
};

using Objective =
    std::function<std::pair<double, Eigen::VectorXd>(const Eigen::VectorXd&)>;

// Standard Adam with bias correction. Throws TrainingError (carrying the
// trace so far) if the objective or gradient turns non-finite.
AdamResult adam_optimize(const Objective& objective, Eigen::VectorXd init,
                         const AdamConfig& cfg);

}  // namespace eggp
