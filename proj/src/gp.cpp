#include "eggp/gp.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <string>

#include "eggp/errors.hpp"

namespace eggp {

namespace {

constexpr double kJitterStart = 1e-6;
constexpr double kJitterMax = 1e-2;
constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

void GpProblem::validate() const {
  const Eigen::Index n = gram.rows();
  if (n == 0 || gram.cols() != n) {
    throw InvalidInputError("gp: gram must be square and non-empty");
  }
  if (targets.rows() != n || targets.cols() == 0) {
    throw InvalidInputError("gp: targets/gram row mismatch");
  }
  if (!gram.allFinite() || !targets.allFinite()) {
    throw InvalidInputError("gp: non-finite input");
  }
  const double scale = std::max(1.0, gram.cwiseAbs().maxCoeff());
  if ((gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InvalidInputError("gp: gram not symmetric");
  }
}

CholeskyFactor cholesky_jittered(const Eigen::MatrixXd& gram,
                                 double log_noise) {
  if (gram.rows() == 0 || gram.rows() != gram.cols()) {
    throw InvalidInputError("cholesky: gram must be square and non-empty");
  }
  const double noise = std::exp(log_noise);
  const Eigen::Index n = gram.rows();
  for (double jitter = kJitterStart; jitter <= kJitterMax * (1.0 + 1e-12);
       jitter *= 10.0) {
    Eigen::MatrixXd shifted = gram;
    shifted.diagonal().array() += noise + jitter;
    const Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() == Eigen::Success) {
      return {llt.matrixL(), noise, jitter};
    }
  }
  throw NumericalError(
      "cholesky: factorization failed after jitter escalation (n=" +
      std::to_string(n) + ", noise=" + std::to_string(noise) +
      ", max jitter=" + std::to_string(kJitterMax) + ")");
}

FactorizedGp factorize(const GpProblem& p) {
  p.validate();
  FactorizedGp f;
  f.chol = cholesky_jittered(p.gram, p.log_noise);
  const auto& L = f.chol.lower;
  f.alpha = L.transpose().triangularView<Eigen::Upper>().solve(
      L.triangularView<Eigen::Lower>().solve(p.targets));
  return f;
}

PosteriorResult posterior_from(const FactorizedGp& f,
                               const Eigen::MatrixXd& k_star,
                               const Eigen::VectorXd& k_star_star_diag) {
  const Eigen::Index n = f.chol.lower.rows();
  if (k_star.cols() != n || k_star.rows() != k_star_star_diag.size()) {
    throw InvalidInputError("posterior: k_star shape mismatch");
  }
  PosteriorResult out;
  out.mean = k_star * f.alpha;
  // var_i = k**_i - || L^-1 k*_i ||^2, clamped at zero.
  const Eigen::MatrixXd v = f.chol.lower.triangularView<Eigen::Lower>().solve(
      k_star.transpose());
  Eigen::VectorXd var =
      (k_star_star_diag.array() - v.colwise().squaredNorm().transpose().array())
          .max(0.0);
  out.variance = var.replicate(1, out.mean.cols());
  return out;
}

PosteriorResult posterior(const GpProblem& p, const Eigen::MatrixXd& k_star,
                          const Eigen::VectorXd& k_star_star_diag) {
  return posterior_from(factorize(p), k_star, k_star_star_diag);
}

double neg_mll(const GpProblem& p) {
  const FactorizedGp f = factorize(p);
  const Eigen::Index n = p.gram.rows();
  const Eigen::Index cols = p.targets.cols();
  const double logdet =
      2.0 * f.chol.lower.diagonal().array().log().sum();
  double fit = 0.0;
  for (Eigen::Index c = 0; c < cols; ++c) {
    fit += p.targets.col(c).dot(f.alpha.col(c));
  }
  return 0.5 * fit + static_cast<double>(cols) *
                         (0.5 * logdet +
                          0.5 * static_cast<double>(n) * std::log(kTwoPi));
}

Eigen::VectorXd neg_mll_grad(const GpProblem& p,
                             const std::vector<Eigen::MatrixXd>& d_gram) {
  const FactorizedGp f = factorize(p);
  const Eigen::Index n = p.gram.rows();
  const double cols = static_cast<double>(p.targets.cols());

  // W = F (K + noise I)^-1 - alpha alpha^T; each gradient is 0.5 tr(W dK).
  const auto& L = f.chol.lower;
  Eigen::MatrixXd kinv = L.transpose().triangularView<Eigen::Upper>().solve(
      L.triangularView<Eigen::Lower>().solve(
          Eigen::MatrixXd::Identity(n, n)));
  Eigen::MatrixXd w = cols * kinv;
  w.noalias() -= f.alpha * f.alpha.transpose();

  Eigen::VectorXd grad(static_cast<Eigen::Index>(d_gram.size()) + 1);
  for (std::size_t j = 0; j < d_gram.size(); ++j) {
    if (d_gram[j].rows() != n || d_gram[j].cols() != n) {
      throw InvalidInputError("neg_mll_grad: derivative shape mismatch");
    }
    grad(static_cast<Eigen::Index>(j)) =
        0.5 * w.cwiseProduct(d_gram[j]).sum();
  }
  // d(K + noise I)/dlog_noise = noise I.
  grad(grad.size() - 1) = 0.5 * f.chol.noise * w.trace();
  return grad;
}

}  // namespace eggp
