#include "eggp/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "eggp/errors.hpp"

namespace eggp {

namespace {

void check_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) {
    throw InvalidInputError(std::string("non-finite entry in vertex ") + what);
  }
}

Edge normalized(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

EdgeList normalize_edges(const EdgeList& edges, int m, const char* what) {
  EdgeList out;
  out.reserve(edges.size());
  for (const auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= m || b >= m) {
      throw InvalidInputError(std::string(what) + ": edge index out of range");
    }
    if (a == b) {
      throw InvalidInputError(std::string(what) + ": self-loop");
    }
    out.push_back(normalized(a, b));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

Eigen::VectorXd VertexState::attributes() const {
  Eigen::VectorXd out(attribute_dim());
  out << position, prev_velocity, static_attrs;
  return out;
}

void ConnectivityConfig::validate() const {
  if (!(r_nn > 0.0) || !std::isfinite(r_nn)) {
    throw InvalidInputError("connectivity: r_nn must be positive and finite");
  }
  if (k_nn < 1) {
    throw InvalidInputError("connectivity: k_nn must be >= 1");
  }
}

GraphSnapshot::GraphSnapshot(int time_index, std::vector<VertexState> vertices,
                             EdgeList edges, EdgeList mandatory_edges)
    : time_index_(time_index), vertices_(std::move(vertices)) {
  if (vertices_.empty()) {
    throw InvalidInputError("snapshot: empty vertex list");
  }
  const int m = static_cast<int>(vertices_.size());
  const Eigen::Index p = vertices_.front().position.size();
  const Eigen::Index s = vertices_.front().static_attrs.size();
  for (const auto& v : vertices_) {
    if (v.position.size() != p || v.prev_velocity.size() != p ||
        v.static_attrs.size() != s) {
      throw InvalidInputError("snapshot: inconsistent vertex layout");
    }
    check_finite(v.position, "position");
    check_finite(v.prev_velocity, "prev_velocity");
    check_finite(v.static_attrs, "static_attrs");
  }

  mandatory_edges_ = normalize_edges(mandatory_edges, m, "mandatory_edges");
  edges_ = normalize_edges(edges, m, "edges");
  if (!mandatory_edges_.empty()) {
    edges_.insert(edges_.end(), mandatory_edges_.begin(),
                  mandatory_edges_.end());
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  }

  adjacency_.assign(m, {});
  for (const auto& [a, b] : edges_) {
    adjacency_[a].push_back(b);
    adjacency_[b].push_back(a);
  }
  for (auto& nbrs : adjacency_) {
    std::sort(nbrs.begin(), nbrs.end());
  }
}

GraphSnapshot build_graph(std::vector<VertexState> vertices,
                          const ConnectivityConfig& cfg,
                          const EdgeList& mandatory_edges, int time_index) {
  cfg.validate();
  if (vertices.empty()) {
    throw InvalidInputError("build_graph: empty vertex list");
  }
  const int m = static_cast<int>(vertices.size());
  const EdgeList mandatory =
      [&] {  // validated + normalized before the distance scan
        EdgeList tmp;
        for (const auto& [a, b] : mandatory_edges) {
          if (a < 0 || b < 0 || a >= m || b >= m || a == b) {
            throw InvalidInputError("build_graph: bad mandatory edge");
          }
          tmp.emplace_back(std::min(a, b), std::max(a, b));
        }
        std::sort(tmp.begin(), tmp.end());
        tmp.erase(std::unique(tmp.begin(), tmp.end()), tmp.end());
        return tmp;
      }();
  std::set<Edge> mandatory_set(mandatory.begin(), mandatory.end());

  const double r2 = cfg.r_nn * cfg.r_nn;
  std::set<Edge> selected;
  std::vector<std::pair<double, int>> cands;
  for (int i = 0; i < m; ++i) {
    cands.clear();
    for (int j = 0; j < m; ++j) {
      if (j == i) continue;
      if (mandatory_set.count(normalized(i, j))) continue;  // already linked
      const double d2 =
          (vertices[i].position - vertices[j].position).squaredNorm();
      if (d2 <= r2) {
        cands.emplace_back(d2, j);
      }
    }
    // Nearest first, ties by ascending index.
    std::sort(cands.begin(), cands.end());
    const int take = std::min<int>(cfg.k_nn, static_cast<int>(cands.size()));
    for (int t = 0; t < take; ++t) {
      selected.insert(normalized(i, cands[t].second));
    }
  }

  EdgeList edges(selected.begin(), selected.end());
  return GraphSnapshot(time_index, std::move(vertices), std::move(edges),
                       mandatory);
}

SubTree extract_subtree(const GraphSnapshot& g, int node_index) {
  if (node_index < 0 || node_index >= g.num_vertices()) {
    throw InvalidInputError("extract_subtree: node index out of range");
  }
  SubTree st;
  st.root = g.vertex(node_index);
  const auto& nbrs = g.neighbors(node_index);
  st.leaves.reserve(nbrs.size());
  for (int j : nbrs) {
    st.leaves.push_back(g.vertex(j));
  }
  return st;
}

namespace {

GraphSeries series_impl(const std::vector<Eigen::MatrixXd>& positions,
                        const std::vector<Eigen::MatrixXd>* attrs_per_time,
                        const Eigen::MatrixXd* attrs_shared,
                        const ConnectivityConfig& cfg,
                        const EdgeList& mandatory_edges) {
  if (positions.empty()) {
    throw InvalidInputError("series: empty position list");
  }
  const Eigen::Index m = positions.front().rows();
  const Eigen::Index p = positions.front().cols();
  if (m == 0 || p == 0) {
    throw InvalidInputError("series: empty position block");
  }
  for (const auto& x : positions) {
    if (x.rows() != m || x.cols() != p) {
      throw InvalidInputError("series: inconsistent position shape");
    }
  }
  if (attrs_per_time && attrs_per_time->size() != positions.size()) {
    throw InvalidInputError("series: attrs/time length mismatch");
  }

  GraphSeries out;
  out.reserve(positions.size());
  for (std::size_t t = 0; t < positions.size(); ++t) {
    const Eigen::MatrixXd& attrs =
        attrs_per_time ? (*attrs_per_time)[t] : *attrs_shared;
    if (attrs.rows() != m) {
      throw InvalidInputError("series: attrs row count mismatch");
    }
    std::vector<VertexState> verts(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      verts[i].position = positions[t].row(i).transpose();
      verts[i].prev_velocity =
          t == 0 ? Eigen::VectorXd::Zero(p).eval()
                 : (positions[t].row(i) - positions[t - 1].row(i))
                       .transpose()
                       .eval();
      verts[i].static_attrs = attrs.row(i).transpose();
    }
    out.push_back(build_graph(std::move(verts), cfg, mandatory_edges,
                              static_cast<int>(t)));
  }
  return out;
}

}  // namespace

GraphSeries graph_series_from_positions(
    const std::vector<Eigen::MatrixXd>& positions,
    const Eigen::MatrixXd& static_attrs, const ConnectivityConfig& cfg,
    const EdgeList& mandatory_edges) {
  return series_impl(positions, nullptr, &static_attrs, cfg, mandatory_edges);
}

GraphSeries graph_series_from_positions(
    const std::vector<Eigen::MatrixXd>& positions,
    const std::vector<Eigen::MatrixXd>& static_attrs_per_time,
    const ConnectivityConfig& cfg, const EdgeList& mandatory_edges) {
  return series_impl(positions, &static_attrs_per_time, nullptr, cfg,
                     mandatory_edges);
}

}  // namespace eggp
