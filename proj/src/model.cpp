#include "eggp/model.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <limits>
#include <numeric>
#include <utility>

#include "eggp/errors.hpp"

namespace eggp {

std::string to_string(AdjacencyMode m) {
  return m == AdjacencyMode::evolving ? "evolving" : "fixed";
}

std::string to_string(Method m) { return m == Method::eggp ? "eggp" : "gpr"; }

AdjacencyMode adjacency_mode_from_string(const std::string& s) {
  if (s == "evolving") return AdjacencyMode::evolving;
  if (s == "fixed") return AdjacencyMode::fixed;
  throw InvalidInputError("unknown adjacency mode: " + s);
}

Method method_from_string(const std::string& s) {
  if (s == "eggp") return Method::eggp;
  if (s == "gpr") return Method::gpr;
  throw InvalidInputError("unknown method: " + s);
}

void SelectionConfig::validate() const {
  if (points_per_node < 1) {
    throw InvalidInputError("selection: points_per_node must be >= 1");
  }
  if (min_gap < 1) {
    throw InvalidInputError("selection: min_gap must be >= 1");
  }
  if (target_dim < 0) {
    throw InvalidInputError("selection: target_dim must be >= 0");
  }
}

namespace {

// Greedy pick in descending-score order subject to pairwise |t - t'| >= gap.
std::vector<int> greedy_pick(const std::vector<std::pair<double, int>>& order,
                             int gap, int wanted) {
  std::vector<int> picked;
  for (const auto& [neg_score, t] : order) {
    (void)neg_score;
    bool ok = true;
    for (int p : picked) {
      if (std::abs(t - p) < gap) {
        ok = false;
        break;
      }
    }
    if (ok) {
      picked.push_back(t);
      if (static_cast<int>(picked.size()) == wanted) break;
    }
  }
  return picked;
}

}  // namespace

TransitionDataset select_training_points(const GraphSeries& series,
                                         const SelectionConfig& cfg) {
  cfg.validate();
  const int len = static_cast<int>(series.size());
  if (len < cfg.min_gap + 2) {
    throw InvalidInputError("selection: series shorter than min_gap + 2");
  }
  const int m = series.front().num_vertices();
  const Eigen::Index p = series.front().vertex(0).position_dim();
  for (const auto& g : series) {
    if (g.num_vertices() != m || g.vertex(0).position_dim() != p) {
      throw InvalidInputError("selection: series layout varies over time");
    }
  }
  if (cfg.target_dim >= p) {
    throw InvalidInputError("selection: target_dim out of range");
  }
  // Candidates need prev_velocity (t >= 1) and a next snapshot (t <= len-2).
  const int n_cand = len - 2;
  if (cfg.points_per_node > n_cand) {
    throw InvalidInputError(
        "selection: requested more points than available timepoints");
  }

  TransitionDataset ds;
  ds.targets.resize(static_cast<Eigen::Index>(m) * cfg.points_per_node, p);
  ds.inputs.reserve(static_cast<std::size_t>(ds.targets.rows()));
  ds.provenance.reserve(static_cast<std::size_t>(ds.targets.rows()));

  std::vector<std::pair<double, int>> order;
  order.reserve(static_cast<std::size_t>(n_cand));
  Eigen::Index row = 0;
  for (int i = 0; i < m; ++i) {
    order.clear();
    for (int t = 1; t <= len - 2; ++t) {
      const double acc = series[t + 1].vertex(i).position(cfg.target_dim) -
                         2.0 * series[t].vertex(i).position(cfg.target_dim) +
                         series[t - 1].vertex(i).position(cfg.target_dim);
      // Negated so ascending sort gives descending score, ties by earlier t.
      order.emplace_back(-std::abs(acc), t);
    }
    std::sort(order.begin(), order.end());

    std::vector<int> picked;
    for (int gap = cfg.min_gap; gap >= 1; --gap) {
      picked = greedy_pick(order, gap, cfg.points_per_node);
      if (static_cast<int>(picked.size()) == cfg.points_per_node) break;
    }
    if (static_cast<int>(picked.size()) < cfg.points_per_node) {
      throw InvalidInputError(
          "selection: cannot satisfy point count even at gap 1");
    }
    std::sort(picked.begin(), picked.end());

    for (int t : picked) {
      ds.inputs.push_back(extract_subtree(series[t], i));
      ds.targets.row(row++) =
          (series[t + 1].vertex(i).position - series[t].vertex(i).position)
              .transpose();
      ds.provenance.push_back({t, i});
    }
  }
  return ds;
}

GraphSeries freeze_adjacency(const GraphSeries& series) {
  if (series.empty()) {
    throw InvalidInputError("freeze_adjacency: empty series");
  }
  const int m = series.front().num_vertices();
  GraphSeries out;
  out.reserve(series.size());
  for (const auto& g : series) {
    if (g.num_vertices() != m) {
      throw MismatchError("freeze_adjacency: node count varies over time");
    }
    out.emplace_back(g.time_index(), g.vertices(), series.front().edges(),
                     series.front().mandatory_edges());
  }
  return out;
}

namespace {

std::vector<int> resolve_target_dims(const std::vector<int>& requested,
                                     Eigen::Index p) {
  std::vector<int> dims = requested;
  if (dims.empty()) {
    dims.resize(static_cast<std::size_t>(p));
    std::iota(dims.begin(), dims.end(), 0);
  }
  for (int dd : dims) {
    if (dd < 0 || dd >= p) {
      throw InvalidInputError("fit: target dim out of range");
    }
  }
  std::vector<int> sorted = dims;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InvalidInputError("fit: duplicate target dims");
  }
  return dims;
}

std::vector<bool> resolve_mask(const std::vector<bool>& requested,
                               Eigen::Index attr_dim) {
  if (requested.empty()) {
    return std::vector<bool>(static_cast<std::size_t>(attr_dim), true);
  }
  if (static_cast<Eigen::Index>(requested.size()) != attr_dim) {
    throw InvalidInputError("fit: mask length != attribute dim");
  }
  return requested;
}

// Shared skeleton of the fit paths: build the standardized design and target
// block, leaving parameters untouched.
FittedModel prepare_model(const TransitionDataset& ds, const FitOptions& opts) {
  if (ds.inputs.empty() ||
      ds.targets.rows() != static_cast<Eigen::Index>(ds.inputs.size())) {
    throw InvalidInputError("fit: empty or inconsistent dataset");
  }
  opts.connectivity.validate();

  FittedModel mdl;
  mdl.method = opts.method;
  mdl.mode = opts.mode;
  mdl.connectivity = opts.connectivity;

  const Eigen::Index attr_dim = ds.inputs.front().root.attribute_dim();
  const Eigen::Index p = ds.inputs.front().root.position_dim();
  mdl.attr_mask = opts.method == Method::gpr
                      ? std::vector<bool>(static_cast<std::size_t>(attr_dim),
                                          true)
                      : resolve_mask(opts.attr_mask, attr_dim);
  mdl.target_dims = resolve_target_dims(opts.target_dims, p);

  mdl.train_inputs = ds.inputs;
  if (opts.method == Method::gpr) {
    for (auto& s : mdl.train_inputs) s.leaves.clear();
  }

  SubtreeDesign design = make_design(mdl.train_inputs, mdl.attr_mask,
                                     opts.method == Method::eggp);
  mdl.input_std = fit_standardization(mapped_rows(design));
  standardize_design(design, mdl.input_std);
  mdl.design = std::move(design);

  Eigen::MatrixXd y(ds.targets.rows(), mdl.output_dim());
  for (Eigen::Index f = 0; f < mdl.output_dim(); ++f) {
    y.col(f) = ds.targets.col(mdl.target_dims[static_cast<std::size_t>(f)]);
  }
  mdl.target_std = fit_standardization(y);
  for (Eigen::Index f = 0; f < y.cols(); ++f) {
    y.col(f) = (y.col(f).array() - mdl.target_std.mean(f)) /
               mdl.target_std.stddev(f);
  }
  mdl.alpha = y;  // holds standardized targets until the final solve
  return mdl;
}

// One factorization for both the objective value and its gradient.
std::pair<double, Eigen::VectorXd> mll_value_grad(
    const Eigen::MatrixXd& gram, const std::vector<Eigen::MatrixXd>& d_gram,
    const Eigen::MatrixXd& y, double log_noise) {
  GpProblem prob{gram, y, log_noise};
  const FactorizedGp f = factorize(prob);
  const Eigen::Index n = gram.rows();
  const double cols = static_cast<double>(y.cols());

  const double logdet = 2.0 * f.chol.lower.diagonal().array().log().sum();
  double fit_term = 0.0;
  for (Eigen::Index c = 0; c < y.cols(); ++c) {
    fit_term += y.col(c).dot(f.alpha.col(c));
  }
  const double value =
      0.5 * fit_term +
      cols * (0.5 * logdet + 0.5 * static_cast<double>(n) *
                                 std::log(6.283185307179586476925286766559));

  const auto& L = f.chol.lower;
  Eigen::MatrixXd w = L.transpose().triangularView<Eigen::Upper>().solve(
      L.triangularView<Eigen::Lower>().solve(
          Eigen::MatrixXd::Identity(n, n)));
  w *= cols;
  w.noalias() -= f.alpha * f.alpha.transpose();

  Eigen::VectorXd grad(static_cast<Eigen::Index>(d_gram.size()) + 1);
  for (std::size_t j = 0; j < d_gram.size(); ++j) {
    grad(static_cast<Eigen::Index>(j)) =
        0.5 * w.cwiseProduct(d_gram[j]).sum();
  }
  grad(grad.size() - 1) = 0.5 * f.chol.noise * w.trace();
  return {value, std::move(grad)};
}

}  // namespace

void FittedModel::finalize() {
  if (train_inputs.empty()) {
    throw InvalidInputError("model: no training inputs");
  }
  kernel.validate(train_inputs.front().root.attribute_dim());
  SubtreeDesign d =
      make_design(train_inputs, attr_mask, method == Method::eggp);
  standardize_design(d, input_std);
  design = std::move(d);
  chol = cholesky_jittered(assemble_gram(design, kernel), log_noise);
  if (alpha.rows() != design.size()) {
    throw MismatchError("model: alpha row count != training size");
  }
}

FittedModel fit_dataset_with_params(const TransitionDataset& ds,
                                    const FitOptions& opts,
                                    const SubTreeKernelParams& kernel,
                                    double log_noise) {
  FittedModel mdl = prepare_model(ds, opts);
  mdl.kernel = kernel;
  mdl.kernel.attr_mask = mdl.attr_mask;
  mdl.log_noise = log_noise;
  mdl.kernel.validate(ds.inputs.front().root.attribute_dim());

  const Eigen::MatrixXd y = mdl.alpha;
  const Eigen::MatrixXd gram = assemble_gram(mdl.design, mdl.kernel);
  mdl.chol = cholesky_jittered(gram, mdl.log_noise);
  const auto& L = mdl.chol.lower;
  mdl.alpha = L.transpose().triangularView<Eigen::Upper>().solve(
      L.triangularView<Eigen::Lower>().solve(y));
  return mdl;
}

FittedModel fit_dataset(const TransitionDataset& ds, const FitOptions& opts) {
  SubTreeKernelParams init = SubTreeKernelParams::defaults(
      opts.method == Method::gpr
          ? std::vector<bool>(
                static_cast<std::size_t>(
                    ds.inputs.empty() ? 0
                                      : ds.inputs.front().root.attribute_dim()),
                true)
          : resolve_mask(opts.attr_mask,
                         ds.inputs.empty()
                             ? 0
                             : ds.inputs.front().root.attribute_dim()));
  if (!opts.optimize) {
    return fit_dataset_with_params(ds, opts, init, opts.init_log_noise);
  }

  FittedModel mdl = prepare_model(ds, opts);
  const Eigen::MatrixXd y = mdl.alpha;

  SubTreeKernelParams kp = init;
  Eigen::VectorXd theta(kp.param_count() + 1);
  theta << kp.pack(), opts.init_log_noise;

  const Objective objective =
      [&](const Eigen::VectorXd& params) -> std::pair<double, Eigen::VectorXd> {
    // Infeasible parameter points read as infinite loss so the optimizer
    // reports divergence instead of masking it as an input error.
    const auto diverged = [&] {
      return std::pair<double, Eigen::VectorXd>(
          std::numeric_limits<double>::infinity(),
          Eigen::VectorXd::Zero(params.size()));
    };
    kp.unpack(params.head(kp.param_count()));
    GramWithGrads gg = assemble_gram_with_grads(mdl.design, kp);
    if (!gg.gram.allFinite()) return diverged();
    try {
      return mll_value_grad(gg.gram, gg.d_gram, y, params(params.size() - 1));
    } catch (const NumericalError&) {
      return diverged();
    }
  };

  AdamResult res = adam_optimize(objective, theta, opts.adam);
  kp.unpack(res.params.head(kp.param_count()));

  FittedModel out =
      fit_dataset_with_params(ds, opts, kp, res.params(res.params.size() - 1));
  out.loss_trace = std::move(res.trace);
  return out;
}

FittedModel fit(const GraphSeries& series, const SelectionConfig& sel,
                const FitOptions& opts) {
  const GraphSeries* src = &series;
  GraphSeries frozen;
  if (opts.mode == AdjacencyMode::fixed) {
    frozen = freeze_adjacency(series);
    src = &frozen;
  }
  TransitionDataset ds = select_training_points(*src, sel);
  FittedModel mdl = fit_dataset(ds, opts);
  mdl.training = {sel.points_per_node, sel.min_gap, sel.target_dim};
  return mdl;
}

FittedModel fit_gpr_baseline(const GraphSeries& series,
                             const SelectionConfig& sel, FitOptions opts) {
  opts.method = Method::gpr;
  opts.attr_mask.clear();  // full attribute vector
  return fit(series, sel, opts);
}

Prediction predict_step(const FittedModel& model, const GraphSnapshot& g) {
  if (model.design.size() == 0) {
    throw InvalidInputError("predict: model not finalized");
  }
  if (g.vertex(0).attribute_dim() !=
      static_cast<Eigen::Index>(model.attr_mask.size())) {
    throw MismatchError("predict: attribute dim != model mask length");
  }
  if (g.vertex(0).position_dim() != model.position_dim()) {
    throw MismatchError("predict: position dim mismatch");
  }

  const int m = g.num_vertices();
  std::vector<SubTree> query;
  query.reserve(static_cast<std::size_t>(m));
  if (model.method == Method::gpr) {
    for (int i = 0; i < m; ++i) {
      query.push_back({g.vertex(i), {}});
    }
  } else if (model.mode == AdjacencyMode::evolving) {
    const GraphSnapshot rebuilt =
        build_graph(g.vertices(), model.connectivity, g.mandatory_edges(),
                    g.time_index());
    for (int i = 0; i < m; ++i) {
      query.push_back(extract_subtree(rebuilt, i));
    }
  } else {
    for (int i = 0; i < m; ++i) {
      query.push_back(extract_subtree(g, i));
    }
  }

  SubtreeDesign qd =
      make_design(query, model.attr_mask, model.method == Method::eggp);
  standardize_design(qd, model.input_std);

  const Eigen::MatrixXd ks = cross_gram(qd, model.design, model.kernel);
  const Eigen::VectorXd kss = self_kernel_diag(qd, model.kernel);
  const PosteriorResult post =
      posterior_from({model.chol, model.alpha}, ks, kss);

  Prediction pred;
  pred.mean.resize(m, model.output_dim());
  pred.variance.resize(m, model.output_dim());
  for (Eigen::Index f = 0; f < model.output_dim(); ++f) {
    const double mu = model.target_std.mean(f);
    const double sd = model.target_std.stddev(f);
    pred.mean.col(f) = post.mean.col(f).array() * sd + mu;
    pred.variance.col(f) = post.variance.col(f).array() * sd * sd;
  }
  return pred;
}

Rollout rollout(const FittedModel& model, const GraphSnapshot& g0, int steps) {
  if (steps < 1) {
    throw InvalidInputError("rollout: steps must be >= 1");
  }
  const Eigen::Index p = model.position_dim();
  std::vector<int> sorted = model.target_dims;
  std::sort(sorted.begin(), sorted.end());
  for (Eigen::Index dd = 0; dd < p; ++dd) {
    if (dd >= static_cast<Eigen::Index>(sorted.size()) ||
        sorted[static_cast<std::size_t>(dd)] != dd) {
      throw MismatchError("rollout: model must cover every position dim");
    }
  }

  Rollout out;
  out.snapshots.push_back(g0);
  out.variances.reserve(static_cast<std::size_t>(steps));

  for (int step = 1; step <= steps; ++step) {
    const GraphSnapshot& cur = out.snapshots.back();
    const Prediction pred = predict_step(model, cur);
    if (!pred.mean.allFinite()) {
      throw NumericalError("rollout: non-finite prediction at step " +
                           std::to_string(step));
    }

    const int m = cur.num_vertices();
    std::vector<VertexState> verts(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      Eigen::VectorXd dv = Eigen::VectorXd::Zero(p);
      for (Eigen::Index f = 0; f < model.output_dim(); ++f) {
        dv(model.target_dims[static_cast<std::size_t>(f)]) = pred.mean(i, f);
      }
      verts[static_cast<std::size_t>(i)].position =
          cur.vertex(i).position + dv;
      verts[static_cast<std::size_t>(i)].prev_velocity = dv;
      verts[static_cast<std::size_t>(i)].static_attrs =
          cur.vertex(i).static_attrs;
    }

    if (model.method == Method::eggp && model.mode == AdjacencyMode::fixed) {
      out.snapshots.emplace_back(cur.time_index() + 1, std::move(verts),
                                 cur.edges(), cur.mandatory_edges());
    } else {
      out.snapshots.push_back(build_graph(std::move(verts),
                                          model.connectivity,
                                          cur.mandatory_edges(),
                                          cur.time_index() + 1));
    }
    out.variances.push_back(pred.variance);
  }
  return out;
}

}  // namespace eggp
