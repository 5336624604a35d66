#pragma once

// Shared test fixtures: deterministic random builders and a self-cleaning
// scratch directory.

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "eggp/graph.hpp"
#include "eggp/kernels.hpp"

namespace fixtures {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    const auto base = std::filesystem::temp_directory_path();
    std::random_device rd;
    std::ostringstream name;
    name << "eggp-test-" << rd() << "-" << counter++;
    path_ = base / name.str();
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline void spit(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

// Exact elementwise equality; Eigen has no whole-object operator==.
inline bool veq(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) != b(i)) return false;
  }
  return true;
}

inline bool meq(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (a(i, j) != b(i, j)) return false;
    }
  }
  return true;
}

inline Eigen::VectorXd random_vector(std::mt19937& rng, Eigen::Index n,
                                     double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = dist(rng);
  return v;
}

inline eggp::VertexState random_vertex(std::mt19937& rng, Eigen::Index p,
                                       Eigen::Index s) {
  return {random_vector(rng, p), random_vector(rng, p, -0.1, 0.1),
          random_vector(rng, s)};
}

inline eggp::SubTree random_subtree(std::mt19937& rng, Eigen::Index p,
                                    Eigen::Index s, int n_leaves) {
  eggp::SubTree t;
  t.root = random_vertex(rng, p, s);
  for (int i = 0; i < n_leaves; ++i) {
    t.leaves.push_back(random_vertex(rng, p, s));
  }
  return t;
}

inline std::vector<eggp::VertexState> random_vertices(std::mt19937& rng, int m,
                                                      Eigen::Index p,
                                                      Eigen::Index s) {
  std::vector<eggp::VertexState> out;
  for (int i = 0; i < m; ++i) out.push_back(random_vertex(rng, p, s));
  return out;
}

inline eggp::SubTreeKernelParams random_params(std::mt19937& rng,
                                               const std::vector<bool>& mask) {
  Eigen::Index mapped = 0;
  for (bool b : mask) mapped += b ? 1 : 0;
  eggp::SubTreeKernelParams p;
  p.attr_mask = mask;
  p.root.log_lengthscales = random_vector(rng, mapped);
  p.root.log_variance = random_vector(rng, 1)(0);
  p.leaf.log_lengthscales = random_vector(rng, mapped);
  p.leaf.log_variance = random_vector(rng, 1)(0);
  return p;
}

// Smooth multi-node trajectories: node i orbits a staggered anchor. Rich
// enough that second differences vary, smooth enough for interpolation.
inline std::vector<Eigen::MatrixXd> sinusoid_positions(int t_len, int m,
                                                       int p,
                                                       double spread = 0.5,
                                                       double amp = 0.15,
                                                       double omega = 0.35) {
  std::vector<Eigen::MatrixXd> out;
  for (int t = 0; t < t_len; ++t) {
    Eigen::MatrixXd x(m, p);
    for (int i = 0; i < m; ++i) {
      for (int d = 0; d < p; ++d) {
        const double phase = 0.9 * i + 1.7 * d;
        x(i, d) = spread * i + amp * std::sin(omega * t + phase);
      }
    }
    out.push_back(x);
  }
  return out;
}

}  // namespace fixtures
