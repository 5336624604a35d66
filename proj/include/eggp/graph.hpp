#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

namespace eggp {

// One attributed node at one timepoint: Cartesian position, previous-step
// displacement, and per-node descriptor attributes.
struct VertexState {
  Eigen::VectorXd position;
  Eigen::VectorXd prev_velocity;
  Eigen::VectorXd static_attrs;

  Eigen::Index position_dim() const { return position.size(); }
  Eigen::Index attribute_dim() const {
    return 2 * position.size() + static_attrs.size();
  }
  // Concatenated (position, prev_velocity, static_attrs).
  Eigen::VectorXd attributes() const;
};

// Neighbourhood construction parameters: connect to at most k_nn of the
// nearest nodes within Euclidean radius r_nn.
struct ConnectivityConfig {
  double r_nn = 0.0;
  int k_nn = 1;

  void validate() const;  // throws InvalidInputError
};

using Edge = std::pair<int, int>;
using EdgeList = std::vector<Edge>;  // normalized (i < j), sorted, unique

// Vertices plus the undirected edge set at one timepoint. Immutable after
// construction; neighbour lists are precomputed in ascending index order.
class GraphSnapshot {
 public:
  GraphSnapshot(int time_index, std::vector<VertexState> vertices,
                EdgeList edges, EdgeList mandatory_edges = {});

  int time_index() const { return time_index_; }
  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  const std::vector<VertexState>& vertices() const { return vertices_; }
  const VertexState& vertex(int i) const { return vertices_.at(i); }
  // Full edge set; always a superset of mandatory_edges().
  const EdgeList& edges() const { return edges_; }
  const EdgeList& mandatory_edges() const { return mandatory_edges_; }
  const std::vector<int>& neighbors(int i) const { return adjacency_.at(i); }

 private:
  int time_index_ = 0;
  std::vector<VertexState> vertices_;
  EdgeList edges_;
  EdgeList mandatory_edges_;
  std::vector<std::vector<int>> adjacency_;
};

using GraphSeries = std::vector<GraphSnapshot>;

// A one-level rooted neighbourhood: the root vertex plus its adjacent
// vertices (leaves) at the same timepoint.
struct SubTree {
  VertexState root;
  std::vector<VertexState> leaves;
};

// Threshold graph construction. Each node selects up to k_nn nearest others
// within r_nn (ties broken by ascending index); selections are unioned into
// an undirected edge set. Mandatory edges are always included and their
// partners do not count against the k_nn cap.
GraphSnapshot build_graph(std::vector<VertexState> vertices,
                          const ConnectivityConfig& cfg,
                          const EdgeList& mandatory_edges = {},
                          int time_index = 0);

// Root = node_index, leaves = its neighbours in ascending index order.
SubTree extract_subtree(const GraphSnapshot& g, int node_index);

// Build a snapshot series from a position tensor [T][M][P]. Snapshot t >= 1
// carries prev_velocity x_t - x_{t-1}; snapshot 0 carries zeros. static_attrs
// is either one [M][S] block shared across time or a per-time [T][M][S] stack.
GraphSeries graph_series_from_positions(
    const std::vector<Eigen::MatrixXd>& positions,
    const Eigen::MatrixXd& static_attrs, const ConnectivityConfig& cfg,
    const EdgeList& mandatory_edges = {});
GraphSeries graph_series_from_positions(
    const std::vector<Eigen::MatrixXd>& positions,
    const std::vector<Eigen::MatrixXd>& static_attrs_per_time,
    const ConnectivityConfig& cfg, const EdgeList& mandatory_edges = {});

}  // namespace eggp
