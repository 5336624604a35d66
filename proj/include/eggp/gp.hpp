#pragma once

#include <Eigen/Core>
#include <vector>

namespace eggp {

// Exact GP regression problem: one shared Gram matrix, one target column per
// output, homoscedastic noise in log space.
struct GpProblem {
  Eigen::MatrixXd gram;     // n x n, symmetric
  Eigen::MatrixXd targets;  // n x F
  double log_noise = 0.0;

  void validate() const;
};

struct CholeskyFactor {
  Eigen::MatrixXd lower;
  double noise = 0.0;   // exp(log_noise)
  double jitter = 0.0;  // diagonal boost that made the factorization succeed
};

// Factor gram + (noise + jitter) I, escalating jitter from 1e-6 by decades up
// to 1e-2 before giving up.
CholeskyFactor cholesky_jittered(const Eigen::MatrixXd& gram,
                                 double log_noise);

// Factorization plus the solved weights, reusable across predictions.
struct FactorizedGp {
  CholeskyFactor chol;
  Eigen::MatrixXd alpha;  // (K + noise I)^-1 targets
};
FactorizedGp factorize(const GpProblem& p);

struct PosteriorResult {
  Eigen::MatrixXd mean;      // n* x F
  Eigen::MatrixXd variance;  // n* x F; columns identical (shared kernel)
};

PosteriorResult posterior_from(const FactorizedGp& f,
                               const Eigen::MatrixXd& k_star,
                               const Eigen::VectorXd& k_star_star_diag);
PosteriorResult posterior(const GpProblem& p, const Eigen::MatrixXd& k_star,
                          const Eigen::VectorXd& k_star_star_diag);

// Negative marginal log likelihood summed over output columns.
double neg_mll(const GpProblem& p);

// Gradient of neg_mll with respect to the kernel parameters behind the given
// Gram derivatives, with d/dlog_noise appended as the last entry.
Eigen::VectorXd neg_mll_grad(const GpProblem& p,
                             const std::vector<Eigen::MatrixXd>& d_gram);

}  // namespace eggp
