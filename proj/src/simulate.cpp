#include "eggp/simulate.hpp"

#include <cmath>
#include <string>

#include "eggp/errors.hpp"
#include "eggp/rng.hpp"

namespace eggp {
namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

// Contraction bound for the spring solves; also a sane explicit CFL.
void check_spring_dt(double dt, double stiffness, double mass,
                     const char* what) {
  if (dt * std::sqrt(stiffness / mass) >= 0.5)
    throw ConfigError(std::string(what) +
                      ": dt too large for stiffness (dt*sqrt(k/m) must stay below 0.5)");
}

// Discrete gradient for V(d) = k/2 (|d| - L)^2 in the Gonzalez form:
// grad.(d' - d) = V(d') - V(d) holds to rounding with no cancellation,
// so the velocity update dissipates energy by construction.
Eigen::Vector2d discrete_spring_grad(const Eigen::Vector2d& d,
                                     const Eigen::Vector2d& d_next,
                                     double stiffness, double rest_length) {
  const double s = d.norm() + d_next.norm();
  if (s < 1e-12) return Eigen::Vector2d::Zero();
  return 0.5 * stiffness * (s - 2.0 * rest_length) / s * (d + d_next);
}

}  // namespace

void GiConfig::validate() const {
  require(n_rope_nodes >= 1, "gi: n_rope_nodes must be >= 1");
  require(n_ball_nodes >= 0, "gi: n_ball_nodes must be >= 0");
  require(link_length > 0, "gi: link_length must be positive");
  require(stiffness > 0, "gi: stiffness must be positive");
  require(damping >= 0, "gi: damping must be non-negative");
  require(gravity >= 0, "gi: gravity must be non-negative");
  require(ball_radius > 0, "gi: ball_radius must be positive");
  require(node_mass > 0, "gi: node_mass must be positive");
  require(contact_restitution >= 0 && contact_restitution <= 1,
          "gi: contact_restitution must lie in [0, 1]");
  require(steps >= 2, "gi: steps must be >= 2");
  require(dt > 0, "gi: dt must be positive");
  for (double c : ball_center)
    require(std::isfinite(c), "gi: ball_center must be finite");
  require(std::isfinite(rope_offset) && std::isfinite(rope_start_height),
          "gi: rope placement must be finite");
  check_spring_dt(dt, stiffness, node_mass, "gi");
}

SimSeries simulate_gi(const GiConfig& cfg) {
  cfg.validate();
  const int nr = cfg.n_rope_nodes;
  const int m = nr + cfg.n_ball_nodes;
  const double h = cfg.dt;
  const double inv_mass = 1.0 / cfg.node_mass;
  const double damp_factor = 1.0 / (1.0 + h * (cfg.damping / cfg.node_mass));

  Eigen::MatrixXd pos(m, 2);
  for (int i = 0; i < nr; ++i) {
    pos(i, 0) = cfg.ball_center[0] + cfg.rope_offset +
                (i - 0.5 * (nr - 1)) * cfg.link_length;
    pos(i, 1) = cfg.ball_center[1] + cfg.rope_start_height;
  }
  for (int b = 0; b < cfg.n_ball_nodes; ++b) {
    if (b == 0) {
      pos(nr, 0) = cfg.ball_center[0];
      pos(nr, 1) = cfg.ball_center[1];
    } else {
      const double ang = 2.0 * M_PI * b / cfg.n_ball_nodes;
      pos(nr + b, 0) = cfg.ball_center[0] + cfg.ball_radius * std::cos(ang);
      pos(nr + b, 1) = cfg.ball_center[1] + cfg.ball_radius * std::sin(ang);
    }
  }

  SimSeries out;
  out.positions.reserve(static_cast<std::size_t>(cfg.steps));
  out.positions.push_back(pos);
  out.static_attrs = Eigen::MatrixXd::Ones(m, 1);
  for (int b = 0; b < cfg.n_ball_nodes; ++b) out.static_attrs(nr + b, 0) = 0.0;
  for (int i = 0; i + 1 < nr; ++i) out.mandatory_edges.emplace_back(i, i + 1);

  const bool has_ball = cfg.n_ball_nodes > 0;
  Eigen::MatrixXd vel = Eigen::MatrixXd::Zero(nr, 2);
  Eigen::MatrixXd vel_hat(nr, 2), vel_next(nr, 2), accel(nr, 2);

  for (int step = 1; step < cfg.steps; ++step) {
    vel_hat = vel * damp_factor;
    // Solve v' = v_hat + h*a(x, x + h*v') by fixed-point iteration; the
    // discrete-gradient force makes the step dissipative independent of dt.
    Eigen::MatrixXd guess = vel_hat;
    bool converged = false;
    double last_delta = 0.0;
    for (int it = 0; it < 500; ++it) {
      accel.setZero();
      for (int i = 0; i + 1 < nr; ++i) {
        const Eigen::Vector2d d =
            pos.row(i).transpose() - pos.row(i + 1).transpose();
        const Eigen::Vector2d d_next =
            d + h * (guess.row(i).transpose() - guess.row(i + 1).transpose());
        const Eigen::Vector2d grad =
            discrete_spring_grad(d, d_next, cfg.stiffness, cfg.link_length);
        accel.row(i) -= grad.transpose() * inv_mass;
        accel.row(i + 1) += grad.transpose() * inv_mass;
      }
      accel.col(1).array() += -cfg.gravity;
      vel_next = vel_hat + h * accel;
      last_delta = (vel_next - guess).cwiseAbs().maxCoeff();
      guess = vel_next;
      // Rounding noise in the force sums leaves a bit-level limit cycle
      // around 1e-15; the gate must sit above it.
      if (last_delta <= 1e-13 * (1.0 + guess.cwiseAbs().maxCoeff())) {
        converged = true;
        break;
      }
    }
    if (!converged)
      throw NumericalError("gi: velocity solve did not converge at step " +
                           std::to_string(step) + " (residual " +
                           std::to_string(last_delta) + ")");
    vel = guess;
    pos.topRows(nr) += h * vel;

    if (has_ball) {
      const Eigen::Vector2d center(cfg.ball_center[0], cfg.ball_center[1]);
      for (int i = 0; i < nr; ++i) {
        const Eigen::Vector2d rel = pos.row(i).transpose() - center;
        const double dist = rel.norm();
        if (dist < cfg.ball_radius && dist > 1e-12) {
          const Eigen::Vector2d n = rel / dist;
          pos.row(i) = (center + cfg.ball_radius * n).transpose();
          const double vn = vel.row(i).dot(n.transpose());
          if (vn < 0)
            vel.row(i) -= (1.0 + cfg.contact_restitution) * vn * n.transpose();
          out.last_contact_step = step;
        }
      }
    }
    out.positions.push_back(pos);
  }
  return out;
}

void EisConfig::validate() const {
  require(n_blocks >= 1, "eis: n_blocks must be >= 1");
  require(particles_per_block >= 1, "eis: particles_per_block must be >= 1");
  require(box_bounds[1] > box_bounds[0] && box_bounds[3] > box_bounds[2],
          "eis: box bounds must satisfy max > min");
  require(gravity >= 0, "eis: gravity must be non-negative");
  require(restitution >= 0 && restitution <= 1,
          "eis: restitution must lie in [0, 1]");
  require(repulsion_stiffness >= 0, "eis: repulsion_stiffness must be non-negative");
  require(repulsion_range > 0, "eis: repulsion_range must be positive");
  require(damping >= 0, "eis: damping must be non-negative");
  require(block_spacing > 0, "eis: block_spacing must be positive");
  require(max_init_speed >= 0, "eis: max_init_speed must be non-negative");
  require(steps >= 2, "eis: steps must be >= 2");
  require(dt > 0, "eis: dt must be positive");
  if (repulsion_stiffness > 0)
    check_spring_dt(dt, repulsion_stiffness, 1.0, "eis");
}

SimSeries simulate_eis(const EisConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const int ppb = cfg.particles_per_block;
  const int m = cfg.n_blocks * ppb;
  const double x_min = cfg.box_bounds[0], x_max = cfg.box_bounds[1];
  const double y_min = cfg.box_bounds[2], y_max = cfg.box_bounds[3];

  // Row-major grid per block, ~square.
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(ppb))));
  const int rows = (ppb + cols - 1) / cols;
  const double w = (cols - 1) * cfg.block_spacing;
  const double hgt = (rows - 1) * cfg.block_spacing;
  // Keep freshly placed blocks disconnected under the default neighbourhood
  // radius so the component count starts at n_blocks.
  const double gap = 0.1;
  const double margin = 0.05;

  std::vector<std::array<double, 4>> boxes;  // x0,x1,y0,y1 per placed block
  Eigen::MatrixXd pos(m, 2);
  Eigen::MatrixXd vel(m, 2);
  for (int b = 0; b < cfg.n_blocks; ++b) {
    double ox = 0, oy = 0;
    bool placed = false;
    for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
      ox = rng.uniform(x_min + margin, x_max - margin - w);
      oy = rng.uniform(y_min + margin, y_max - margin - hgt);
      placed = true;
      for (const auto& bx : boxes)
        if (ox < bx[1] + gap && ox + w > bx[0] - gap && oy < bx[3] + gap &&
            oy + hgt > bx[2] - gap) {
          placed = false;
          break;
        }
    }
    if (!placed)
      throw ConfigError("eis: could not place blocks without overlap; "
                        "reduce n_blocks or block size");
    boxes.push_back({ox, ox + w, oy, oy + hgt});
    const double vx = rng.uniform(-cfg.max_init_speed, cfg.max_init_speed);
    const double vy = rng.uniform(-cfg.max_init_speed, cfg.max_init_speed);
    for (int p = 0; p < ppb; ++p) {
      const int r = p / cols, c = p % cols;
      pos(b * ppb + p, 0) = ox + c * cfg.block_spacing;
      pos(b * ppb + p, 1) = oy + r * cfg.block_spacing;
      vel(b * ppb + p, 0) = vx;
      vel(b * ppb + p, 1) = vy;
    }
  }

  SimSeries out;
  out.positions.reserve(static_cast<std::size_t>(cfg.steps));
  out.per_time_attrs.reserve(static_cast<std::size_t>(cfg.steps));
  // Wall distances in the order (x_max, y_max, x_min, y_min).
  auto wall_attrs = [&](const Eigen::MatrixXd& p) {
    Eigen::MatrixXd a(p.rows(), 4);
    a.col(0) = x_max - p.col(0).array();
    a.col(1) = y_max - p.col(1).array();
    a.col(2) = p.col(0).array() - x_min;
    a.col(3) = p.col(1).array() - y_min;
    return a;
  };
  out.positions.push_back(pos);
  out.per_time_attrs.push_back(wall_attrs(pos));

  Eigen::MatrixXd accel(m, 2);
  for (int step = 1; step < cfg.steps; ++step) {
    accel.setZero();
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) {
        const Eigen::Vector2d d = pos.row(i).transpose() - pos.row(j).transpose();
        const double dist = d.norm();
        if (dist < cfg.repulsion_range && dist > 1e-12) {
          const Eigen::Vector2d f =
              cfg.repulsion_stiffness * (cfg.repulsion_range - dist) / dist * d;
          accel.row(i) += f.transpose();
          accel.row(j) -= f.transpose();
        }
      }
    accel.col(1).array() += -cfg.gravity;
    accel -= cfg.damping * vel;
    vel += cfg.dt * accel;
    pos += cfg.dt * vel;
    // A floor bounce too weak to outrun one step of gravity would chatter
    // forever; treat it as resting contact instead.
    const double sleep_speed = 2.0 * cfg.gravity * cfg.dt;
    for (int i = 0; i < m; ++i) {
      for (int axis = 0; axis < 2; ++axis) {
        const double lo = axis == 0 ? x_min : y_min;
        const double hi = axis == 0 ? x_max : y_max;
        for (int bounce = 0; bounce < 4; ++bounce) {
          if (pos(i, axis) < lo) {
            pos(i, axis) = 2.0 * lo - pos(i, axis);
            vel(i, axis) = -cfg.restitution * vel(i, axis);
            if (axis == 1 && vel(i, axis) <= sleep_speed) {
              pos(i, axis) = lo;
              vel(i, axis) = 0.0;
            }
          } else if (pos(i, axis) > hi) {
            pos(i, axis) = 2.0 * hi - pos(i, axis);
            vel(i, axis) = -cfg.restitution * vel(i, axis);
          } else {
            break;
          }
        }
        if (pos(i, axis) < lo) pos(i, axis) = lo;
        if (pos(i, axis) > hi) pos(i, axis) = hi;
      }
    }
    out.positions.push_back(pos);
    out.per_time_attrs.push_back(wall_attrs(pos));
  }
  return out;
}

ConnectivityConfig gi_default_connectivity() { return {0.043, 2}; }
ConnectivityConfig eis_default_connectivity() { return {0.08, 20}; }

GraphSeries gi_graph_series(const SimSeries& sim, const ConnectivityConfig& cfg) {
  if (sim.positions.empty()) throw InvalidInputError("gi series: empty");
  std::vector<Eigen::MatrixXd> padded;
  padded.reserve(sim.positions.size());
  for (const auto& p : sim.positions) {
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(p.rows(), 3);
    q.leftCols(2) = p;
    padded.push_back(std::move(q));
  }
  return graph_series_from_positions(padded, sim.static_attrs, cfg,
                                     sim.mandatory_edges);
}

GraphSeries eis_graph_series(const SimSeries& sim, const ConnectivityConfig& cfg) {
  if (sim.positions.empty()) throw InvalidInputError("eis series: empty");
  if (sim.per_time_attrs.size() != sim.positions.size())
    throw InvalidInputError("eis series: per-time attributes missing");
  return graph_series_from_positions(sim.positions, sim.per_time_attrs, cfg,
                                     sim.mandatory_edges);
}

}  // namespace eggp
