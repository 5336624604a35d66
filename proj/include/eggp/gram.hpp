#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "eggp/graph.hpp"
#include "eggp/kernels.hpp"

namespace eggp {

// Per-column affine normalization. Constant columns get unit scale so the
// transform stays invertible.
struct Standardization {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;

  Eigen::Index dim() const { return mean.size(); }
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
    return (v - mean).cwiseQuotient(stddev);
  }
  Eigen::VectorXd invert(const Eigen::VectorXd& v) const {
    return v.cwiseProduct(stddev) + mean;
  }
};

Standardization fit_standardization(const Eigen::MatrixXd& rows);

// Masked feature matrices for a batch of sub-trees. Leaf rows are grouped by
// sub-tree: block i spans [offsets[i], offsets[i+1]).
struct SubtreeDesign {
  Eigen::MatrixXd roots;
  Eigen::MatrixXd leaves;
  std::vector<Eigen::Index> offsets;

  Eigen::Index size() const { return roots.rows(); }
  Eigen::Index leaf_count(Eigen::Index i) const {
    return offsets[i + 1] - offsets[i];
  }
};

SubtreeDesign make_design(std::span<const SubTree> subtrees,
                          const std::vector<bool>& mask,
                          bool include_leaves = true);
void standardize_design(SubtreeDesign& design, const Standardization& st);

// All mapped vertex rows of a design (roots stacked over leaves); the pool
// the input standardization statistics are computed from.
Eigen::MatrixXd mapped_rows(const SubtreeDesign& design);

// Dense n x n sub-tree kernel Gram over one design. Exactly symmetric: the
// upper triangle is computed and mirrored.
Eigen::MatrixXd assemble_gram(const SubtreeDesign& design,
                              const SubTreeKernelParams& p);

struct GramWithGrads {
  Eigen::MatrixXd gram;
  // Derivatives with respect to the packed kernel parameters, same layout as
  // SubTreeKernelParams::pack().
  std::vector<Eigen::MatrixXd> d_gram;
};
GramWithGrads assemble_gram_with_grads(const SubtreeDesign& design,
                                       const SubTreeKernelParams& p);

// Rectangular kernel matrix rows x cols. Leaf-pair contributions per cell are
// summed in value-sorted order, so each row depends only on the row
// sub-tree's content, never on leaf enumeration order.
Eigen::MatrixXd cross_gram(const SubtreeDesign& rows,
                           const SubtreeDesign& cols,
                           const SubTreeKernelParams& p);

// k(s, s) per sub-tree.
Eigen::VectorXd self_kernel_diag(const SubtreeDesign& design,
                                 const SubTreeKernelParams& p);

}  // namespace eggp
