#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <vector>

#include "eggp/graph.hpp"

namespace eggp {

// Rope-on-ball generator: a 2-D spring chain falls under gravity onto an
// impenetrable static circle.
struct GiConfig {
  int n_rope_nodes = 30;
  int n_ball_nodes = 1;
  double link_length = 0.03;
  double stiffness = 2000.0;
  double damping = 0.02;
  double gravity = 9.81;
  std::array<double, 2> ball_center{0.0, 0.0};
  double ball_radius = 0.04;
  // Horizontal shift of the whole rope relative to the ball.
  double rope_offset = 0.0;
  double rope_start_height = 0.3;
  double node_mass = 0.01;
  double contact_restitution = 0.3;
  int steps = 500;
  double dt = 1e-3;

  void validate() const;  // throws ConfigError
};

// Particle-blocks generator: seeded blocks of particles fall inside a box
// under gravity with short-range pairwise repulsion and wall bounces.
struct EisConfig {
  int n_blocks = 4;
  int particles_per_block = 11;
  // x_min, x_max, y_min, y_max.
  std::array<double, 4> box_bounds{0.0, 1.0, 0.0, 1.0};
  double gravity = 9.81;
  double restitution = 0.5;
  double repulsion_stiffness = 4000.0;
  double repulsion_range = 0.03;
  double damping = 0.05;
  double block_spacing = 0.03;
  double max_init_speed = 0.3;
  int steps = 200;
  double dt = 0.005;
  std::uint64_t seed = 0;

  void validate() const;  // throws ConfigError
};

struct SimSeries {
  std::vector<Eigen::MatrixXd> positions;  // [T] blocks of [M][2]
  // Either one shared block (rope/ball flag) or a per-time stack (wall
  // distances); exactly one of the two is populated.
  Eigen::MatrixXd static_attrs;
  std::vector<Eigen::MatrixXd> per_time_attrs;
  EdgeList mandatory_edges;
  int last_contact_step = -1;
};

SimSeries simulate_gi(const GiConfig& cfg);
SimSeries simulate_eis(const EisConfig& cfg);

ConnectivityConfig gi_default_connectivity();   // r_nn 0.043, k_nn 2
ConnectivityConfig eis_default_connectivity();  // r_nn 0.08, k_nn 20

// Attributed snapshots from raw trajectories. The rope scene is padded with a
// constant zero third coordinate so each vertex carries 7 attributes; the
// particle scene keeps 2-D positions plus 4 wall distances for 8.
GraphSeries gi_graph_series(const SimSeries& sim, const ConnectivityConfig& cfg);
GraphSeries eis_graph_series(const SimSeries& sim, const ConnectivityConfig& cfg);

}  // namespace eggp
