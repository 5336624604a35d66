#include "eggp/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "eggp/errors.hpp"

namespace eggp {

namespace {

// Sum in ascending value order so the result depends only on the multiset of
// contributions, not on leaf enumeration order.
double sorted_sum(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc;
}

Eigen::MatrixXd map_leaves(const SubTree& s, const std::vector<bool>& mask,
                           Eigen::Index e) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(s.leaves.size()), e);
  for (std::size_t i = 0; i < s.leaves.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = phi_v(s.leaves[i], mask);
  }
  return out;
}

}  // namespace

Eigen::Index SubTreeKernelParams::mapped_dim() const {
  Eigen::Index e = 0;
  for (bool b : attr_mask) e += b ? 1 : 0;
  return e;
}

Eigen::VectorXd SubTreeKernelParams::pack() const {
  const Eigen::Index e = root.dim();
  Eigen::VectorXd flat(param_count());
  flat.head(e) = root.log_lengthscales;
  flat(e) = root.log_variance;
  flat.segment(e + 1, e) = leaf.log_lengthscales;
  flat(2 * e + 1) = leaf.log_variance;
  return flat;
}

void SubTreeKernelParams::unpack(const Eigen::VectorXd& flat) {
  const Eigen::Index e = root.dim();
  if (flat.size() != param_count()) {
    throw InvalidInputError("kernel params: flat vector length mismatch");
  }
  root.log_lengthscales = flat.head(e);
  root.log_variance = flat(e);
  leaf.log_lengthscales = flat.segment(e + 1, e);
  leaf.log_variance = flat(2 * e + 1);
}

void SubTreeKernelParams::validate(Eigen::Index attribute_dim) const {
  if (static_cast<Eigen::Index>(attr_mask.size()) != attribute_dim) {
    throw InvalidInputError("kernel params: mask length != attribute dim");
  }
  const Eigen::Index e = mapped_dim();
  if (e == 0) {
    throw InvalidInputError("kernel params: mask selects no dimensions");
  }
  if (root.dim() != e || leaf.dim() != e) {
    throw InvalidInputError("kernel params: lengthscale count != mapped dim");
  }
  if (!root.log_lengthscales.allFinite() || !leaf.log_lengthscales.allFinite() ||
      !std::isfinite(root.log_variance) || !std::isfinite(leaf.log_variance)) {
    throw InvalidInputError("kernel params: non-finite entry");
  }
}

SubTreeKernelParams SubTreeKernelParams::defaults(
    const std::vector<bool>& mask) {
  SubTreeKernelParams p;
  p.attr_mask = mask;
  const Eigen::Index e = p.mapped_dim();
  p.root = ArdRbfParams::zeros(e);
  p.leaf = ArdRbfParams::zeros(e);
  return p;
}

Eigen::VectorXd phi_v(const VertexState& v, const std::vector<bool>& mask) {
  const Eigen::VectorXd full = v.attributes();
  if (static_cast<Eigen::Index>(mask.size()) != full.size()) {
    throw InvalidInputError("phi_v: mask length != attribute dim");
  }
  Eigen::Index e = 0;
  for (bool b : mask) e += b ? 1 : 0;
  if (e == 0) {
    throw InvalidInputError("phi_v: mask selects no dimensions");
  }
  Eigen::VectorXd out(e);
  Eigen::Index k = 0;
  for (Eigen::Index d = 0; d < full.size(); ++d) {
    if (mask[static_cast<std::size_t>(d)]) out(k++) = full(d);
  }
  return out;
}

double ard_rbf(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
               const ArdRbfParams& p) {
  if (a.size() != b.size() || a.size() != p.dim()) {
    throw InvalidInputError("ard_rbf: dimension mismatch");
  }
  const Eigen::ArrayXd ls = p.log_lengthscales.array().exp();
  const double z = ((a - b).array() / ls).square().sum();
  return p.variance() * std::exp(-0.5 * z);
}

ArdRbfGrad ard_rbf_grad(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                        const ArdRbfParams& p) {
  if (a.size() != b.size() || a.size() != p.dim()) {
    throw InvalidInputError("ard_rbf_grad: dimension mismatch");
  }
  const Eigen::ArrayXd ls = p.log_lengthscales.array().exp();
  const Eigen::ArrayXd z = ((a - b).array() / ls).square();
  const double k = p.variance() * std::exp(-0.5 * z.sum());
  ArdRbfGrad g;
  g.value = k;
  g.d_log_ls = (z * k).matrix();  // d/d log(ls_d) = k * z_d
  g.d_log_var = k;                // d/d log(var)  = k
  return g;
}

double knn_on_features(const Eigen::MatrixXd& leaves_a,
                       const Eigen::MatrixXd& leaves_b, const ArdRbfParams& p) {
  const Eigen::Index na = leaves_a.rows();
  const Eigen::Index nb = leaves_b.rows();
  if (na == 0 || nb == 0) return 0.0;
  const Eigen::ArrayXd ls = p.log_lengthscales.array().exp();
  const double var = p.variance();
  std::vector<double> vals;
  vals.reserve(static_cast<std::size_t>(na * nb));
  // Contiguous copies keep the arithmetic identical to ard_rbf on plain
  // vectors, so every evaluation path produces the same bits.
  Eigen::VectorXd va(leaves_a.cols());
  Eigen::VectorXd vb(leaves_b.cols());
  for (Eigen::Index i = 0; i < na; ++i) {
    va = leaves_a.row(i);
    for (Eigen::Index j = 0; j < nb; ++j) {
      vb = leaves_b.row(j);
      const double z = ((va - vb).array() / ls).square().sum();
      vals.push_back(var * std::exp(-0.5 * z));
    }
  }
  return sorted_sum(vals) / static_cast<double>(na * nb);
}

double subtree_kernel_on_features(const Eigen::VectorXd& root_a,
                                  const Eigen::MatrixXd& leaves_a,
                                  const Eigen::VectorXd& root_b,
                                  const Eigen::MatrixXd& leaves_b,
                                  const SubTreeKernelParams& p) {
  return ard_rbf(root_a, root_b, p.root) +
         knn_on_features(leaves_a, leaves_b, p.leaf);
}

double k_nn(const SubTree& a, const SubTree& b, const SubTreeKernelParams& p) {
  p.validate(a.root.attribute_dim());
  if (b.root.attribute_dim() != a.root.attribute_dim()) {
    throw InvalidInputError("k_nn: attribute dim mismatch");
  }
  const Eigen::Index e = p.mapped_dim();
  return knn_on_features(map_leaves(a, p.attr_mask, e),
                         map_leaves(b, p.attr_mask, e), p.leaf);
}

double subtree_kernel(const SubTree& a, const SubTree& b,
                      const SubTreeKernelParams& p) {
  p.validate(a.root.attribute_dim());
  if (b.root.attribute_dim() != a.root.attribute_dim()) {
    throw InvalidInputError("subtree_kernel: attribute dim mismatch");
  }
  const Eigen::Index e = p.mapped_dim();
  return subtree_kernel_on_features(
      phi_v(a.root, p.attr_mask), map_leaves(a, p.attr_mask, e),
      phi_v(b.root, p.attr_mask), map_leaves(b, p.attr_mask, e), p);
}

SubTreeKernelGrad subtree_kernel_grad(const SubTree& a, const SubTree& b,
                                      const SubTreeKernelParams& p) {
  p.validate(a.root.attribute_dim());
  if (b.root.attribute_dim() != a.root.attribute_dim()) {
    throw InvalidInputError("subtree_kernel_grad: attribute dim mismatch");
  }
  const Eigen::Index e = p.mapped_dim();

  SubTreeKernelGrad out;
  out.d_params = Eigen::VectorXd::Zero(p.param_count());

  const ArdRbfGrad root_g =
      ard_rbf_grad(phi_v(a.root, p.attr_mask), phi_v(b.root, p.attr_mask),
                   p.root);
  out.value = root_g.value;
  out.d_params.head(e) = root_g.d_log_ls;
  out.d_params(e) = root_g.d_log_var;

  const Eigen::MatrixXd la = map_leaves(a, p.attr_mask, e);
  const Eigen::MatrixXd lb = map_leaves(b, p.attr_mask, e);
  const Eigen::Index na = la.rows();
  const Eigen::Index nb = lb.rows();
  if (na > 0 && nb > 0) {
    const double norm = 1.0 / static_cast<double>(na * nb);
    const Eigen::ArrayXd ls = p.leaf.log_lengthscales.array().exp();
    const double var = p.leaf.variance();
    double knn_acc = 0.0;
    Eigen::VectorXd ls_acc = Eigen::VectorXd::Zero(e);
    for (Eigen::Index i = 0; i < na; ++i) {
      for (Eigen::Index j = 0; j < nb; ++j) {
        const Eigen::ArrayXd z =
            ((la.row(i) - lb.row(j)).transpose().array() / ls).square();
        const double k = var * std::exp(-0.5 * z.sum());
        knn_acc += k;
        ls_acc += (z * k).matrix();
      }
    }
    // Match the value path bit-for-bit where it matters; the gradient itself
    // is only consumed by the optimizer and finite-difference checks.
    out.value += knn_on_features(la, lb, p.leaf);
    out.d_params.segment(e + 1, e) = norm * ls_acc;
    out.d_params(2 * e + 1) = norm * knn_acc;
  }
  return out;
}

double ArdMatern52Kernel::eval(const Eigen::VectorXd& a,
                               const Eigen::VectorXd& b) const {
  if (a.size() != b.size() || a.size() != p_.dim()) {
    throw InvalidInputError("matern52: dimension mismatch");
  }
  const Eigen::ArrayXd ls = p_.log_lengthscales.array().exp();
  const double r = std::sqrt(((a - b).array() / ls).square().sum());
  const double sr5 = std::sqrt(5.0) * r;
  return p_.variance() * (1.0 + sr5 + sr5 * sr5 / 3.0) * std::exp(-sr5);
}

double subtree_kernel_generic(const SubTree& a, const SubTree& b,
                              const std::vector<bool>& mask,
                              const BaseKernel& root_kernel,
                              const BaseKernel& leaf_kernel) {
  double out = root_kernel.eval(phi_v(a.root, mask), phi_v(b.root, mask));
  if (a.leaves.empty() || b.leaves.empty()) return out;
  std::vector<double> vals;
  vals.reserve(a.leaves.size() * b.leaves.size());
  for (const auto& la : a.leaves) {
    for (const auto& lb : b.leaves) {
      vals.push_back(leaf_kernel.eval(phi_v(la, mask), phi_v(lb, mask)));
    }
  }
  return out + sorted_sum(vals) /
                   static_cast<double>(a.leaves.size() * b.leaves.size());
}

}  // namespace eggp
