#include <Eigen/Dense>
#include <algorithm>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"
#include "eggp/errors.hpp"
#include "eggp/graph.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace eggp;

namespace {

VertexState at(double x, double y) {
  VertexState v;
  v.position = Eigen::Vector2d(x, y);
  v.prev_velocity = Eigen::Vector2d::Zero();
  v.static_attrs = Eigen::VectorXd::Zero(1);
  return v;
}

}  // namespace

TEST_CASE("vertex attributes concatenate position, velocity, statics") {
  VertexState v;
  v.position = Eigen::Vector2d(1.0, 2.0);
  v.prev_velocity = Eigen::Vector2d(3.0, 4.0);
  v.static_attrs = Eigen::Vector3d(5.0, 6.0, 7.0);
  CHECK(v.attribute_dim() == 7);
  const Eigen::VectorXd a = v.attributes();
  REQUIRE(a.size() == 7);
  for (int i = 0; i < 7; ++i) CHECK(a(i) == static_cast<double>(i + 1));
}

TEST_CASE("connectivity validation") {
  CHECK_THROWS_AS((ConnectivityConfig{0.0, 1}.validate()), InvalidInputError);
  CHECK_THROWS_AS((ConnectivityConfig{-0.1, 1}.validate()), InvalidInputError);
  CHECK_THROWS_AS((ConnectivityConfig{0.1, 0}.validate()), InvalidInputError);
  CHECK_NOTHROW((ConnectivityConfig{0.043, 2}.validate()));
}

TEST_CASE("snapshot construction rejects malformed input") {
  std::vector<VertexState> verts{at(0.0, 0.0), at(1.0, 0.0)};
  CHECK_THROWS_AS(GraphSnapshot(0, {}, {}), InvalidInputError);
  CHECK_THROWS_AS(GraphSnapshot(0, verts, {{0, 2}}), InvalidInputError);
  CHECK_THROWS_AS(GraphSnapshot(0, verts, {{1, 1}}), InvalidInputError);
  std::vector<VertexState> ragged = verts;
  ragged[1].static_attrs = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(GraphSnapshot(0, ragged, {}), InvalidInputError);
  std::vector<VertexState> bad = verts;
  bad[0].position(0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(GraphSnapshot(0, bad, {}), InvalidInputError);
}

TEST_CASE("neighbour lists are ascending") {
  std::vector<VertexState> verts{at(0, 0), at(1, 0), at(2, 0), at(3, 0)};
  GraphSnapshot g(0, verts, {{2, 3}, {0, 2}, {1, 2}});
  CHECK(g.neighbors(2) == std::vector<int>{0, 1, 3});
  CHECK(g.neighbors(0) == std::vector<int>{2});
}

TEST_CASE("radius threshold is inclusive and strict") {
  ConnectivityConfig cfg{0.043, 2};
  SUBCASE("just outside") {
    GraphSnapshot g = build_graph({at(0, 0), at(0.05, 0)}, cfg);
    CHECK(g.edges().empty());
  }
  SUBCASE("inside") {
    GraphSnapshot g = build_graph({at(0, 0), at(0.04, 0)}, cfg);
    CHECK(g.edges() == EdgeList{{0, 1}});
  }
  SUBCASE("exactly on the radius") {
    GraphSnapshot g = build_graph({at(0, 0), at(0.043, 0)}, cfg);
    CHECK(g.edges() == EdgeList{{0, 1}});
  }
}

TEST_CASE("k_nn caps per-node selections before symmetrization") {
  // Node 0 sits amid four others, all within radius. With k_nn = 2 it keeps
  // only the two nearest, but the farther nodes still select node 0, so the
  // union re-adds those edges. Giving the far nodes closer partners of their
  // own isolates the cap.
  ConnectivityConfig cfg{0.1, 1};
  std::vector<VertexState> verts{
      at(0.0, 0.0),     // 0: picks 1
      at(0.01, 0.0),    // 1: picks 0
      at(0.05, 0.0),    // 2: picks 3
      at(0.055, 0.0),   // 3: picks 2
  };
  GraphSnapshot g = build_graph(verts, cfg);
  CHECK(g.edges() == EdgeList{{0, 1}, {2, 3}});
}

TEST_CASE("mandatory edges are always present and do not consume slots") {
  // A-B is mandatory. With B excluded from A's candidate list, A's single
  // slot goes to C; C and D pair up among themselves.
  ConnectivityConfig cfg{0.02, 1};
  std::vector<VertexState> verts{
      at(0.0, 0.0),      // A
      at(0.001, 0.0),    // B
      at(0.01, 0.0),     // C
      at(0.0105, 0.0),   // D
      at(0.011, 0.0),    // E
  };
  EdgeList mandatory{{0, 1}};
  GraphSnapshot g = build_graph(verts, cfg, mandatory);
  CHECK(g.mandatory_edges() == mandatory);
  CHECK(std::count(g.edges().begin(), g.edges().end(), Edge{0, 1}) == 1);
  CHECK(std::count(g.edges().begin(), g.edges().end(), Edge{0, 2}) == 1);
}

TEST_CASE("mandatory edges survive any distance") {
  ConnectivityConfig cfg{0.01, 1};
  GraphSnapshot g = build_graph({at(0, 0), at(5, 0)}, cfg, {{0, 1}});
  CHECK(g.edges() == EdgeList{{0, 1}});
}

TEST_CASE("every non-mandatory edge respects the radius") {
  std::mt19937 rng(7);
  ConnectivityConfig cfg{0.35, 3};
  for (int rep = 0; rep < 20; ++rep) {
    auto verts = fixtures::random_vertices(rng, 30, 2, 1);
    GraphSnapshot g = build_graph(verts, cfg);
    for (const auto& [a, b] : g.edges()) {
      CHECK((verts[static_cast<std::size_t>(a)].position -
             verts[static_cast<std::size_t>(b)].position)
                .norm() <= cfg.r_nn);
    }
  }
}

TEST_CASE("construction is deterministic") {
  std::mt19937 rng(11);
  auto verts = fixtures::random_vertices(rng, 25, 2, 1);
  ConnectivityConfig cfg{0.4, 2};
  GraphSnapshot a = build_graph(verts, cfg);
  GraphSnapshot b = build_graph(verts, cfg);
  CHECK(a.edges() == b.edges());
}

TEST_CASE("matches the brute-force reference on random instances") {
  std::mt19937 rng(13);
  std::uniform_int_distribution<int> m_dist(2, 50);
  std::uniform_real_distribution<double> r_dist(0.05, 0.9);
  std::uniform_int_distribution<int> k_dist(1, 6);
  for (int rep = 0; rep < 100; ++rep) {
    const int m = m_dist(rng);
    auto verts = fixtures::random_vertices(rng, m, 2, 1);
    ConnectivityConfig cfg{r_dist(rng), k_dist(rng)};
    EdgeList mandatory;
    if (rep % 3 == 0 && m >= 3) {
      for (int i = 0; i + 1 < m / 2; ++i) mandatory.push_back({i, i + 1});
    }
    GraphSnapshot g = build_graph(verts, cfg, mandatory);
    CHECK(g.edges() == oracle::brute_force_edges(verts, cfg, mandatory));
  }
}

TEST_CASE("edge list is normalized, sorted, unique") {
  std::mt19937 rng(17);
  auto verts = fixtures::random_vertices(rng, 40, 2, 1);
  GraphSnapshot g = build_graph(verts, ConnectivityConfig{0.5, 4});
  const EdgeList& e = g.edges();
  CHECK(std::is_sorted(e.begin(), e.end()));
  CHECK(std::adjacent_find(e.begin(), e.end()) == e.end());
  for (const auto& [a, b] : e) CHECK(a < b);
}

TEST_CASE("build_graph rejects bad mandatory edges") {
  ConnectivityConfig cfg{0.1, 1};
  CHECK_THROWS_AS(build_graph({at(0, 0), at(1, 0)}, cfg, {{0, 5}}),
                  InvalidInputError);
  CHECK_THROWS_AS(build_graph({}, cfg), InvalidInputError);
}

TEST_CASE("extract_subtree returns neighbours in ascending order") {
  std::vector<VertexState> verts{at(0, 0), at(1, 0), at(2, 0), at(3, 0)};
  GraphSnapshot g(0, verts, {{1, 3}, {0, 1}});
  SubTree t = extract_subtree(g, 1);
  REQUIRE(t.leaves.size() == 2);
  CHECK(fixtures::veq(t.root.position, verts[1].position));
  CHECK(fixtures::veq(t.leaves[0].position, verts[0].position));
  CHECK(fixtures::veq(t.leaves[1].position, verts[3].position));
  SubTree lone = extract_subtree(g, 2);
  CHECK(lone.leaves.empty());
  CHECK_THROWS_AS(extract_subtree(g, 4), InvalidInputError);
  CHECK_THROWS_AS(extract_subtree(g, -1), InvalidInputError);
}

TEST_CASE("series carries first differences as previous velocity") {
  auto pos = fixtures::sinusoid_positions(6, 4, 2);
  Eigen::MatrixXd attrs = Eigen::MatrixXd::Constant(4, 1, 0.5);
  GraphSeries s =
      graph_series_from_positions(pos, attrs, ConnectivityConfig{0.6, 2});
  REQUIRE(s.size() == 6);
  for (int i = 0; i < 4; ++i) {
    CHECK(fixtures::veq(s[0].vertex(i).prev_velocity, Eigen::Vector2d::Zero()));
  }
  for (std::size_t t = 1; t < s.size(); ++t) {
    CHECK(s[t].time_index() == static_cast<int>(t));
    for (int i = 0; i < 4; ++i) {
      const Eigen::VectorXd expected =
          pos[t].row(i).transpose() - pos[t - 1].row(i).transpose();
      CHECK(fixtures::veq(s[t].vertex(i).prev_velocity, expected));
      CHECK(s[t].vertex(i).static_attrs(0) == 0.5);
    }
  }
}

TEST_CASE("per-time attributes land on their snapshot") {
  auto pos = fixtures::sinusoid_positions(3, 2, 2);
  std::vector<Eigen::MatrixXd> attrs;
  for (int t = 0; t < 3; ++t) {
    attrs.push_back(Eigen::MatrixXd::Constant(2, 1, static_cast<double>(t)));
  }
  GraphSeries s =
      graph_series_from_positions(pos, attrs, ConnectivityConfig{0.6, 2});
  for (std::size_t t = 0; t < s.size(); ++t) {
    CHECK(s[t].vertex(0).static_attrs(0) == static_cast<double>(t));
  }
}

TEST_CASE("series construction rejects inconsistent shapes") {
  auto pos = fixtures::sinusoid_positions(3, 2, 2);
  ConnectivityConfig cfg{0.6, 2};
  CHECK_THROWS_AS(
      graph_series_from_positions({}, Eigen::MatrixXd::Zero(2, 1), cfg),
      InvalidInputError);
  auto ragged = pos;
  ragged[1] = Eigen::MatrixXd::Zero(3, 2);
  CHECK_THROWS_AS(
      graph_series_from_positions(ragged, Eigen::MatrixXd::Zero(2, 1), cfg),
      InvalidInputError);
  CHECK_THROWS_AS(
      graph_series_from_positions(pos, Eigen::MatrixXd::Zero(5, 1), cfg),
      InvalidInputError);
  std::vector<Eigen::MatrixXd> short_attrs{Eigen::MatrixXd::Zero(2, 1)};
  CHECK_THROWS_AS(graph_series_from_positions(pos, short_attrs, cfg),
                  InvalidInputError);
}

TEST_CASE("mandatory edges propagate to every snapshot") {
  auto pos = fixtures::sinusoid_positions(4, 3, 2);
  EdgeList chain{{0, 1}, {1, 2}};
  GraphSeries s = graph_series_from_positions(
      pos, Eigen::MatrixXd::Zero(3, 1), ConnectivityConfig{0.01, 1}, chain);
  for (const auto& g : s) {
    CHECK(g.mandatory_edges() == chain);
    for (const auto& e : chain) {
      CHECK(std::count(g.edges().begin(), g.edges().end(), e) == 1);
    }
  }
}
