#include <cstdint>
#include <string>
#include <vector>

#include "doctest.h"
#include "eggp/config.hpp"
#include "eggp/errors.hpp"
#include "support/fixtures.hpp"

using namespace eggp;
using config::Table;

namespace {

Table parse(const std::string& text) { return Table::parse(text, "test"); }

}  // namespace

TEST_CASE("scalar parsing covers the value kinds") {
  const Table t = parse(
      "flag = true\n"
      "off = false\n"
      "count = 42\n"
      "negative = -7\n"
      "rate = 0.043\n"
      "huge = 1e3\n"
      "name = \"hello world\"\n");
  const auto& root = t.section("");
  CHECK(root.get_bool("flag", false) == true);
  CHECK(root.get_bool("off", true) == false);
  CHECK(root.get_int("count", 0) == 42);
  CHECK(root.get_int("negative", 0) == -7);
  CHECK(root.get_double("rate", 0.0) == 0.043);
  CHECK(root.get_double("huge", 0.0) == 1000.0);
  CHECK(root.get_string("name", "") == "hello world");
  CHECK_NOTHROW(t.finish());
}

TEST_CASE("comments and blank lines are ignored") {
  const Table t = parse(
      "# full line comment\n"
      "\n"
      "a = 1  # trailing comment\n"
      "b = \"has # inside\"\n");
  CHECK(t.section("").get_int("a", 0) == 1);
  CHECK(t.section("").get_string("b", "") == "has # inside");
  CHECK_NOTHROW(t.finish());
}

TEST_CASE("arrays parse homogeneously") {
  const Table t = parse(
      "ints = [1, 2, 3]\n"
      "reals = [0.5, 1.5]\n"
      "promoted = [1, 2.5]\n"
      "names = [\"a\", \"b\"]\n"
      "empty = []\n");
  const auto& root = t.section("");
  CHECK(root.get_int_array("ints") == std::vector<std::int64_t>{1, 2, 3});
  CHECK(root.get_double_array("reals") == std::vector<double>{0.5, 1.5});
  CHECK(root.get_double_array("promoted") == std::vector<double>{1.0, 2.5});
  CHECK(root.get_string_array("names") == std::vector<std::string>{"a", "b"});
  CHECK(root.get_int_array("empty").empty());
  CHECK(root.get_double_array("missing").empty());
  // Integer arrays coerce upward when read as doubles.
  CHECK(root.get_double_array("ints") == std::vector<double>{1.0, 2.0, 3.0});
  CHECK_NOTHROW(t.finish());
}

TEST_CASE("malformed input is rejected") {
  CHECK_THROWS_AS(parse("a = 1\na = 2\n"), ConfigError);      // duplicate
  CHECK_THROWS_AS(parse("just a line\n"), ConfigError);       // no '='
  CHECK_THROWS_AS(parse("= 3\n"), ConfigError);               // empty key
  CHECK_THROWS_AS(parse("a =\n"), ConfigError);               // empty value
  CHECK_THROWS_AS(parse("a = \"oops\n"), ConfigError);        // open string
  CHECK_THROWS_AS(parse("a = [1, 2\n"), ConfigError);         // open array
  CHECK_THROWS_AS(parse("[broken\n"), ConfigError);           // open header
  CHECK_THROWS_AS(parse("[]\n"), ConfigError);                // nameless
  CHECK_THROWS_AS(parse("a = [true]\n"), ConfigError);        // bool array
  CHECK_THROWS_AS(parse("a = [1, \"x\"]\n"), ConfigError);    // mixed array
  CHECK_THROWS_AS(parse("a = what\n"), ConfigError);          // bare word
}

TEST_CASE("typed getters reject wrong kinds") {
  const Table t = parse("a = 1.5\nb = \"txt\"\nc = 3\n");
  const auto& root = t.section("");
  CHECK_THROWS_AS(root.get_int("a", 0), ConfigError);
  CHECK_THROWS_AS(root.get_bool("b", false), ConfigError);
  CHECK_THROWS_AS(root.get_string("c", ""), ConfigError);
  CHECK_THROWS_AS(root.get_double_array("b"), ConfigError);
  CHECK(root.get_double("c", 0.0) == 3.0);  // int promotes to double
}

TEST_CASE("required keys throw when absent") {
  const Table t = parse("present = 5\n");
  const auto& root = t.section("");
  CHECK(root.require_int("present") == 5);
  CHECK_THROWS_AS(root.require_int("absent"), ConfigError);
  CHECK_THROWS_AS(root.require_double("absent"), ConfigError);
  CHECK_THROWS_AS(root.require_string("absent"), ConfigError);
}

TEST_CASE("finish rejects unread keys and unrequested sections") {
  {
    const Table t = parse("a = 1\nb = 2\n");
    (void)t.section("").get_int("a", 0);
    CHECK_THROWS_AS(t.finish(), ConfigError);  // b never read
  }
  {
    const Table t = parse("[left]\nx = 1\n[right]\ny = 2\n");
    (void)t.section("left").get_int("x", 0);
    CHECK_THROWS_AS(t.finish(), ConfigError);  // [right] never requested
  }
  {
    const Table t = parse("[left]\nx = 1\n");
    (void)t.section("left").get_int("x", 0);
    CHECK_NOTHROW(t.finish());
  }
}

TEST_CASE("sections partition keys and missing sections yield defaults") {
  const Table t = parse("[one]\nv = 1\n[two]\nv = 2\n");
  CHECK(t.section("one").get_int("v", 0) == 1);
  CHECK(t.section("two").get_int("v", 0) == 2);
  CHECK(t.has_section("one"));
  CHECK(!t.has_section("three"));
  CHECK(t.section("three").get_int("v", 99) == 99);
  CHECK(t.section_names() == std::vector<std::string>{"one", "two"});
}

TEST_CASE("reopening a section merges its keys") {
  const Table t = parse("[s]\na = 1\n[other]\nz = 0\n[s]\nb = 2\n");
  CHECK(t.section("s").get_int("a", 0) == 1);
  CHECK(t.section("s").get_int("b", 0) == 2);
  CHECK_THROWS_AS(parse("[s]\na = 1\n[s]\na = 2\n"), ConfigError);
}

TEST_CASE("parse_file wraps io failures") {
  fixtures::TempDir dir;
  CHECK_THROWS_AS(Table::parse_file(dir.file("absent.toml")), ConfigError);
  const std::string path = dir.file("ok.toml");
  fixtures::spit(path, "[sim]\nsteps = 7\n");
  const Table t = Table::parse_file(path);
  CHECK(t.section("sim").get_int("steps", 0) == 7);
}

TEST_CASE("rope config section round-trip") {
  const Table t = parse(
      "[gi_sim]\n"
      "n_rope_nodes = 12\n"
      "stiffness = 1500\n"
      "ball_center = [0.1, -0.2]\n"
      "rope_offset = 0.05\n"
      "steps = 123\n");
  const GiConfig cfg = config::gi_config_from(t.section("gi_sim"));
  CHECK(cfg.n_rope_nodes == 12);
  CHECK(cfg.stiffness == 1500.0);
  CHECK(cfg.ball_center[0] == 0.1);
  CHECK(cfg.ball_center[1] == -0.2);
  CHECK(cfg.rope_offset == 0.05);
  CHECK(cfg.steps == 123);
  // Untouched keys keep their defaults.
  CHECK(cfg.n_ball_nodes == 1);
  CHECK(cfg.dt == 1e-3);
  CHECK_NOTHROW(t.finish());
}

TEST_CASE("rope config surfaces validation failures") {
  CHECK_THROWS_AS(
      config::gi_config_from(parse("ball_center = [1, 2, 3]\n").section("")),
      ConfigError);
  CHECK_THROWS_AS(
      config::gi_config_from(parse("dt = 0.01\n").section("")),
      ConfigError);  // unstable for the default stiffness
  CHECK_THROWS_AS(
      config::gi_config_from(parse("n_rope_nodes = 0\n").section("")),
      ConfigError);
}

TEST_CASE("particle config section round-trip") {
  const Table t = parse(
      "[eis_sim]\n"
      "n_blocks = 6\n"
      "particles_per_block = 5\n"
      "box_bounds = [0, 2, 0, 1]\n"
      "seed = 77\n"
      "max_init_speed = 0.1\n");
  const EisConfig cfg = config::eis_config_from(t.section("eis_sim"));
  CHECK(cfg.n_blocks == 6);
  CHECK(cfg.particles_per_block == 5);
  CHECK(cfg.box_bounds[1] == 2.0);
  CHECK(cfg.seed == 77);
  CHECK(cfg.max_init_speed == 0.1);
  CHECK(cfg.restitution == 0.5);  // default
  CHECK_NOTHROW(t.finish());
}

TEST_CASE("particle config surfaces validation failures") {
  CHECK_THROWS_AS(
      config::eis_config_from(parse("box_bounds = [0, 1]\n").section("")),
      ConfigError);
  CHECK_THROWS_AS(
      config::eis_config_from(parse("restitution = 1.5\n").section("")),
      ConfigError);
  CHECK_THROWS_AS(
      config::eis_config_from(parse("dt = 0.01\n").section("")),
      ConfigError);
}
