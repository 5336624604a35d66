#include "eggp/gram.hpp"

#include <algorithm>
#include <cmath>

#include "eggp/errors.hpp"

namespace eggp {

namespace {

constexpr Eigen::Index kTileRows = 512;

// Mirror the upper triangle into the lower one so the result is exactly
// symmetric regardless of floating-point evaluation order.
void mirror_upper(Eigen::MatrixXd& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = j + 1; i < m.rows(); ++i) {
      m(i, j) = m(j, i);
    }
  }
}

std::vector<Eigen::Index> leaf_owner_map(const SubtreeDesign& d) {
  std::vector<Eigen::Index> owner(static_cast<std::size_t>(d.leaves.rows()));
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    for (Eigen::Index r = d.offsets[i]; r < d.offsets[i + 1]; ++r) {
      owner[static_cast<std::size_t>(r)] = i;
    }
  }
  return owner;
}

struct LeafReduction {
  Eigen::MatrixXd sums;                 // n x n, sum of leaf-kernel entries
  std::vector<Eigen::MatrixXd> d_sums;  // per mapped dim, sum of entry * z_d
};

// One pass over the leaf-pair kernel matrix in row tiles. Only column blocks
// at or above the tile's first sub-tree are touched; the caller mirrors.
LeafReduction reduce_leaf_blocks(const SubtreeDesign& d,
                                 const ArdRbfParams& leaf, bool with_grads) {
  const Eigen::Index n = d.size();
  const Eigen::Index total = d.leaves.rows();
  const Eigen::Index e = leaf.dim();

  LeafReduction red;
  red.sums = Eigen::MatrixXd::Zero(n, n);
  if (with_grads) {
    red.d_sums.assign(static_cast<std::size_t>(e),
                      Eigen::MatrixXd::Zero(n, n));
  }
  if (total == 0) return red;

  const Eigen::MatrixXd scaled =
      d.leaves * leaf.lengthscales().cwiseInverse().asDiagonal();
  const Eigen::VectorXd sq = scaled.rowwise().squaredNorm();
  const double var = leaf.variance();
  const std::vector<Eigen::Index> owner = leaf_owner_map(d);

  Eigen::RowVectorXd wrow(total);
  for (Eigen::Index r0 = 0; r0 < total; r0 += kTileRows) {
    const Eigen::Index rows = std::min(kTileRows, total - r0);
    const Eigen::Index first_tree = owner[static_cast<std::size_t>(r0)];
    const Eigen::Index c0 = d.offsets[first_tree];
    const Eigen::Index cols = total - c0;

    Eigen::MatrixXd g = -2.0 * scaled.middleRows(r0, rows) *
                        scaled.middleRows(c0, cols).transpose();
    g.colwise() += sq.segment(r0, rows);
    g.rowwise() += sq.segment(c0, cols).transpose();
    g = (g.array().max(0.0) * -0.5).exp() * var;

    for (Eigen::Index a = 0; a < rows; ++a) {
      const Eigen::Index ga = r0 + a;
      const Eigen::Index i = owner[static_cast<std::size_t>(ga)];
      // Value sums for column blocks j >= i.
      for (Eigen::Index j = i; j < n; ++j) {
        const Eigen::Index len = d.offsets[j + 1] - d.offsets[j];
        if (len == 0) continue;
        red.sums(i, j) += g.row(a).segment(d.offsets[j] - c0, len).sum();
      }
      if (!with_grads) continue;
      for (Eigen::Index dd = 0; dd < e; ++dd) {
        const double ua = scaled(ga, dd);
        wrow.head(cols) =
            g.row(a).array() *
            (scaled.col(dd).segment(c0, cols).transpose().array() - ua)
                .square();
        for (Eigen::Index j = i; j < n; ++j) {
          const Eigen::Index len = d.offsets[j + 1] - d.offsets[j];
          if (len == 0) continue;
          red.d_sums[static_cast<std::size_t>(dd)](i, j) +=
              wrow.segment(d.offsets[j] - c0, len).sum();
        }
      }
    }
  }
  return red;
}

Eigen::VectorXd inverse_counts(const SubtreeDesign& d) {
  Eigen::VectorXd inv(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    const Eigen::Index c = d.leaf_count(i);
    inv(i) = c > 0 ? 1.0 / static_cast<double>(c) : 0.0;
  }
  return inv;
}

// Dense pairwise ARD-RBF Gram over one row set (upper triangle valid).
Eigen::MatrixXd root_gram_upper(const Eigen::MatrixXd& roots,
                                const ArdRbfParams& p) {
  const Eigen::MatrixXd scaled =
      roots * p.lengthscales().cwiseInverse().asDiagonal();
  const Eigen::VectorXd sq = scaled.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = -2.0 * scaled * scaled.transpose();
  d2.colwise() += sq;
  d2.rowwise() += sq.transpose();
  return ((d2.array().max(0.0)) * -0.5).exp() * p.variance();
}

void check_design_params(const SubtreeDesign& d, const SubTreeKernelParams& p) {
  if (d.roots.cols() != p.root.dim() || p.leaf.dim() != p.root.dim()) {
    throw InvalidInputError("gram: design/param dimension mismatch");
  }
  if (d.leaves.rows() > 0 && d.leaves.cols() != d.roots.cols()) {
    throw InvalidInputError("gram: leaf/root feature width mismatch");
  }
}

}  // namespace

Standardization fit_standardization(const Eigen::MatrixXd& rows) {
  if (rows.rows() == 0) {
    throw InvalidInputError("standardization: no rows");
  }
  Standardization st;
  st.mean = rows.colwise().mean();
  const Eigen::ArrayXd var =
      (rows.rowwise() - st.mean.transpose()).array().square().colwise().mean();
  st.stddev = var.sqrt().matrix();
  for (Eigen::Index dd = 0; dd < st.stddev.size(); ++dd) {
    if (st.stddev(dd) < 1e-12) st.stddev(dd) = 1.0;  // constant column
  }
  return st;
}

SubtreeDesign make_design(std::span<const SubTree> subtrees,
                          const std::vector<bool>& mask, bool include_leaves) {
  if (subtrees.empty()) {
    throw InvalidInputError("design: no sub-trees");
  }
  Eigen::Index e = 0;
  for (bool b : mask) e += b ? 1 : 0;
  if (e == 0) {
    throw InvalidInputError("design: mask selects no dimensions");
  }

  const Eigen::Index n = static_cast<Eigen::Index>(subtrees.size());
  SubtreeDesign d;
  d.roots.resize(n, e);
  d.offsets.assign(static_cast<std::size_t>(n) + 1, 0);

  Eigen::Index total = 0;
  if (include_leaves) {
    for (Eigen::Index i = 0; i < n; ++i) {
      total += static_cast<Eigen::Index>(subtrees[i].leaves.size());
    }
  }
  d.leaves.resize(total, e);

  Eigen::Index cursor = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const SubTree& s = subtrees[static_cast<std::size_t>(i)];
    if (s.root.attribute_dim() != static_cast<Eigen::Index>(mask.size())) {
      throw InvalidInputError("design: attribute dim != mask length");
    }
    d.roots.row(i) = phi_v(s.root, mask).transpose();
    d.offsets[static_cast<std::size_t>(i)] = cursor;
    if (include_leaves) {
      for (const auto& leaf : s.leaves) {
        d.leaves.row(cursor++) = phi_v(leaf, mask).transpose();
      }
    }
  }
  d.offsets[static_cast<std::size_t>(n)] = cursor;
  return d;
}

void standardize_design(SubtreeDesign& design, const Standardization& st) {
  if (st.dim() != design.roots.cols()) {
    throw InvalidInputError("standardize: dimension mismatch");
  }
  design.roots = (design.roots.rowwise() - st.mean.transpose()).array().rowwise() /
                 st.stddev.transpose().array();
  if (design.leaves.rows() > 0) {
    design.leaves =
        (design.leaves.rowwise() - st.mean.transpose()).array().rowwise() /
        st.stddev.transpose().array();
  }
}

Eigen::MatrixXd mapped_rows(const SubtreeDesign& design) {
  Eigen::MatrixXd out(design.roots.rows() + design.leaves.rows(),
                      design.roots.cols());
  out.topRows(design.roots.rows()) = design.roots;
  if (design.leaves.rows() > 0) {
    out.bottomRows(design.leaves.rows()) = design.leaves;
  }
  return out;
}

Eigen::MatrixXd assemble_gram(const SubtreeDesign& design,
                              const SubTreeKernelParams& p) {
  check_design_params(design, p);
  Eigen::MatrixXd gram = root_gram_upper(design.roots, p.root);
  const LeafReduction red = reduce_leaf_blocks(design, p.leaf, false);
  const Eigen::VectorXd inv = inverse_counts(design);
  gram.array() += (red.sums.array().colwise() * inv.array()).rowwise() *
                  inv.transpose().array();
  mirror_upper(gram);
  return gram;
}

GramWithGrads assemble_gram_with_grads(const SubtreeDesign& design,
                                       const SubTreeKernelParams& p) {
  check_design_params(design, p);
  const Eigen::Index e = p.root.dim();

  GramWithGrads out;
  out.gram = root_gram_upper(design.roots, p.root);
  out.d_gram.assign(static_cast<std::size_t>(2 * e + 2),
                    Eigen::MatrixXd::Zero(design.size(), design.size()));

  // Root lengthscales: dK/dlog ls_d = K_root .* (delta_d / ls_d)^2.
  const Eigen::MatrixXd scaled_roots =
      design.roots * p.root.lengthscales().cwiseInverse().asDiagonal();
  for (Eigen::Index dd = 0; dd < e; ++dd) {
    const Eigen::VectorXd u = scaled_roots.col(dd);
    Eigen::MatrixXd z = u.array().square().matrix().replicate(1, u.size());
    z += z.transpose().eval();
    z.noalias() -= 2.0 * u * u.transpose();
    out.d_gram[static_cast<std::size_t>(dd)] =
        out.gram.cwiseProduct(z.cwiseMax(0.0));
  }
  out.d_gram[static_cast<std::size_t>(e)] = out.gram;  // d/dlog var_r

  const LeafReduction red = reduce_leaf_blocks(design, p.leaf, true);
  const Eigen::VectorXd inv = inverse_counts(design);
  const auto normalize = [&](const Eigen::MatrixXd& m) {
    return ((m.array().colwise() * inv.array()).rowwise() *
            inv.transpose().array())
        .matrix();
  };
  const Eigen::MatrixXd knn = normalize(red.sums);
  out.gram += knn;
  for (Eigen::Index dd = 0; dd < e; ++dd) {
    out.d_gram[static_cast<std::size_t>(e + 1 + dd)] =
        normalize(red.d_sums[static_cast<std::size_t>(dd)]);
  }
  out.d_gram[static_cast<std::size_t>(2 * e + 1)] = knn;  // d/dlog var_l

  mirror_upper(out.gram);
  for (auto& m : out.d_gram) mirror_upper(m);
  return out;
}

Eigen::MatrixXd cross_gram(const SubtreeDesign& rows,
                           const SubtreeDesign& cols,
                           const SubTreeKernelParams& p) {
  check_design_params(rows, p);
  check_design_params(cols, p);
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (Eigen::Index i = 0; i < rows.size(); ++i) {
    const Eigen::MatrixXd la =
        rows.leaves.middleRows(rows.offsets[i], rows.leaf_count(i));
    for (Eigen::Index j = 0; j < cols.size(); ++j) {
      const Eigen::MatrixXd lb =
          cols.leaves.middleRows(cols.offsets[j], cols.leaf_count(j));
      out(i, j) =
          ard_rbf(rows.roots.row(i).transpose(), cols.roots.row(j).transpose(),
                  p.root) +
          knn_on_features(la, lb, p.leaf);
    }
  }
  return out;
}

Eigen::VectorXd self_kernel_diag(const SubtreeDesign& design,
                                 const SubTreeKernelParams& p) {
  check_design_params(design, p);
  Eigen::VectorXd out(design.size());
  for (Eigen::Index i = 0; i < design.size(); ++i) {
    const Eigen::MatrixXd li =
        design.leaves.middleRows(design.offsets[i], design.leaf_count(i));
    out(i) = p.root.variance() + knn_on_features(li, li, p.leaf);
  }
  return out;
}

}  // namespace eggp
