#pragma once

#include <Eigen/Core>
#include <vector>

#include "eggp/graph.hpp"

namespace eggp {

// Anisotropic squared-exponential parameters, kept in log space so the
// optimizer is unconstrained.
struct ArdRbfParams {
  Eigen::VectorXd log_lengthscales;
  double log_variance = 0.0;

  Eigen::Index dim() const { return log_lengthscales.size(); }
  Eigen::VectorXd lengthscales() const {
    return log_lengthscales.array().exp();
  }
  double variance() const { return std::exp(log_variance); }

  static ArdRbfParams zeros(Eigen::Index dim) {
    return {Eigen::VectorXd::Zero(dim), 0.0};
  }
};

// Parameters of the rooted-neighbourhood kernel: one base kernel comparing
// roots, an independently parameterized one comparing leaves, and the boolean
// mask selecting which vertex attributes feed both.
struct SubTreeKernelParams {
  ArdRbfParams root;
  ArdRbfParams leaf;
  std::vector<bool> attr_mask;

  Eigen::Index mapped_dim() const;
  // Flat layout: [root log_ls (E), root log_var, leaf log_ls (E), leaf
  // log_var]. Shared by the gradient vector and the optimizer.
  Eigen::Index param_count() const { return 2 * root.dim() + 2; }
  Eigen::VectorXd pack() const;
  void unpack(const Eigen::VectorXd& flat);

  void validate(Eigen::Index attribute_dim) const;
  static SubTreeKernelParams defaults(const std::vector<bool>& mask);
};

// Gather the masked attribute entries of a vertex, preserving order.
Eigen::VectorXd phi_v(const VertexState& v, const std::vector<bool>& mask);

double ard_rbf(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
               const ArdRbfParams& p);

struct ArdRbfGrad {
  double value = 0.0;
  Eigen::VectorXd d_log_ls;
  double d_log_var = 0.0;
};
ArdRbfGrad ard_rbf_grad(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                        const ArdRbfParams& p);

// Mean pairwise leaf similarity, normalized by |leaves_i| * |leaves_j|.
// Zero when either side has no leaves. Contributions are summed in
// value-sorted order, which makes the result independent of leaf order.
double k_nn(const SubTree& a, const SubTree& b, const SubTreeKernelParams& p);

// Root similarity plus the neighbourhood term.
double subtree_kernel(const SubTree& a, const SubTree& b,
                      const SubTreeKernelParams& p);

struct SubTreeKernelGrad {
  double value = 0.0;
  Eigen::VectorXd d_params;  // layout per SubTreeKernelParams::pack()
};
SubTreeKernelGrad subtree_kernel_grad(const SubTree& a, const SubTree& b,
                                      const SubTreeKernelParams& p);

// Feature-space core shared with the batched Gram paths: inputs are already
// masked (and, inside a fitted model, standardized) vectors.
double knn_on_features(const Eigen::MatrixXd& leaves_a,
                       const Eigen::MatrixXd& leaves_b, const ArdRbfParams& p);
double subtree_kernel_on_features(const Eigen::VectorXd& root_a,
                                  const Eigen::MatrixXd& leaves_a,
                                  const Eigen::VectorXd& root_b,
                                  const Eigen::MatrixXd& leaves_b,
                                  const SubTreeKernelParams& p);

// Pluggable base kernel for the generic sub-tree kernel variant. The default
// pipeline uses the ARD-RBF pair above; alternates slot in here.
class BaseKernel {
 public:
  virtual ~BaseKernel() = default;
  virtual double eval(const Eigen::VectorXd& a,
                      const Eigen::VectorXd& b) const = 0;
};

class ArdRbfKernel final : public BaseKernel {
 public:
  explicit ArdRbfKernel(ArdRbfParams p) : p_(std::move(p)) {}
  double eval(const Eigen::VectorXd& a,
              const Eigen::VectorXd& b) const override {
    return ard_rbf(a, b, p_);
  }

 private:
  ArdRbfParams p_;
};

class ArdMatern52Kernel final : public BaseKernel {
 public:
  explicit ArdMatern52Kernel(ArdRbfParams p) : p_(std::move(p)) {}
  double eval(const Eigen::VectorXd& a,
              const Eigen::VectorXd& b) const override;

 private:
  ArdRbfParams p_;
};

// subtree kernel over arbitrary base kernels: root_kernel(roots) + mean
// pairwise leaf_kernel (value-sorted summation, zero on empty leaf sets).
double subtree_kernel_generic(const SubTree& a, const SubTree& b,
                              const std::vector<bool>& mask,
                              const BaseKernel& root_kernel,
                              const BaseKernel& leaf_kernel);

}  // namespace eggp
