#include <doctest.h>

#include <synthcity/errors.hpp>
#include <synthcity/roadnet.hpp>

#include <sstream>

using namespace synthcity;

namespace {

RoadGraph square_loop(double side, double width = 0.0) {
  RoadGraph g;
  g.nodes = {{0, 0}, {side, 0}, {side, side}, {0, side}};
  for (int i = 0; i < 4; ++i)
    g.edges.push_back({i, (i + 1) % 4, width, RoadClass::local});
  g.extent_x = g.extent_y = side;
  return g;
}

}  // namespace

TEST_SUITE("roadnet") {

TEST_CASE("zero-jitter raster is an exact grid") {
  RoadConfig cfg;
  cfg.spacing_m = 250.0;  // 4x4 cells over the default 1000 m extent
  RoadGraph g = generate_roads(cfg);
  CHECK(g.nodes.size() == 25);
  CHECK(g.edges.size() == 40);

  ValidationReport rep = validate_graph(g);
  CHECK(rep.all_pass());
  CHECK(rep.interior_face_count == 16);
  CHECK(extract_blocks(g).size() == 16);
}

TEST_CASE("rectangular raster yields n*m blocks") {
  RoadConfig cfg;
  cfg.extent_x = 1000.0;
  cfg.extent_y = 750.0;
  cfg.spacing_m = 250.0;  // 4x3 cells
  RoadGraph g = generate_roads(cfg);
  CHECK(g.nodes.size() == 20);
  CHECK(g.edges.size() == 31);  // 2nm + n + m
  auto blocks = extract_blocks(g);
  CHECK(blocks.size() == 12);
  for (const CityBlock& b : blocks) {
    CHECK(b.area_m2 > 0.0);
    CHECK(is_ccw(b.boundary));
    CHECK(is_simple(b.boundary));
  }
  ValidationReport rep = validate_graph(g);
  CHECK(rep.euler_ok);  // V - E + (faces + 1) = 2
  CHECK(rep.node_count - rep.edge_count + rep.interior_face_count + 1 == 2);
}

TEST_CASE("jittered raster keeps the grid topology") {
  RoadConfig cfg;
  cfg.spacing_m = 200.0;
  cfg.jitter = 0.3;
  cfg.seed = 99;
  RoadGraph g = generate_roads(cfg);
  ValidationReport rep = validate_graph(g);
  CHECK(rep.all_pass());
  CHECK(extract_blocks(g).size() == 25);
  // Interior nodes move off the lattice but stay inside the extent.
  bool moved = false;
  for (const Vec2& n : g.nodes)
    if (std::fmod(n.x, 200.0) > 1.0 && std::fmod(n.x, 200.0) < 199.0)
      moved = true;
  CHECK(moved);
}

TEST_CASE("jitter bound is enforced") {
  RoadConfig cfg;
  cfg.jitter = 0.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.jitter = -0.1;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.jitter = 0.49;
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("radial web node and edge counts") {
  RoadConfig cfg;
  cfg.topology = {{Topology::radial, 1.0}};
  cfg.rings = 3;
  cfg.spokes = 8;
  cfg.spacing_m = 120.0;
  RoadGraph g = generate_roads(cfg);
  CHECK(g.nodes.size() == 1 + 3 * 8);
  CHECK(g.edges.size() == 2 * 3 * 8);
  ValidationReport rep = validate_graph(g);
  CHECK(rep.all_pass());
  CHECK(extract_blocks(g).size() == 3 * 8);
}

TEST_CASE("organic growth stays planar and connected") {
  RoadConfig cfg;
  cfg.topology = {{Topology::organic, 1.0}};
  cfg.seed = 12;
  RoadGraph g = generate_roads(cfg);
  ValidationReport rep = validate_graph(g);
  CHECK(rep.planar);
  CHECK(rep.connected);
  CHECK(rep.nodes_in_extent);
  CHECK(rep.euler_ok);
  CHECK(!extract_blocks(g).empty());
}

TEST_CASE("district mix spans the extent") {
  RoadConfig cfg;
  cfg.topology = {{Topology::raster, 1.0}, {Topology::radial, 1.0}};
  cfg.seed = 5;
  cfg.boundary_loop = true;
  RoadGraph g = generate_roads(cfg);
  ValidationReport rep = validate_graph(g);
  CHECK(rep.planar);
  CHECK(rep.connected);
  CHECK(rep.euler_ok);
  CHECK(!extract_blocks(g).empty());
}

TEST_CASE("generation is deterministic") {
  RoadConfig cfg;
  cfg.topology = {{Topology::organic, 1.0}};
  cfg.jitter = 0.2;
  cfg.seed = 31;
  RoadGraph a = generate_roads(cfg);
  RoadGraph b = generate_roads(cfg);
  REQUIRE(a.nodes.size() == b.nodes.size());
  REQUIRE(a.edges.size() == b.edges.size());
  for (size_t i = 0; i < a.nodes.size(); ++i) CHECK(a.nodes[i] == b.nodes[i]);
  for (size_t i = 0; i < a.edges.size(); ++i) {
    CHECK(a.edges[i].a == b.edges[i].a);
    CHECK(a.edges[i].b == b.edges[i].b);
  }
}

TEST_CASE("tree graph has no blocks") {
  RoadGraph g;
  g.nodes = {{0, 0}, {100, 0}, {200, 50}};
  g.edges = {{0, 1, 6.0, RoadClass::local}, {1, 2, 6.0, RoadClass::local}};
  g.extent_x = g.extent_y = 250;
  CHECK(extract_blocks(g).empty());
  CHECK(validate_graph(g).euler_ok);
}

TEST_CASE("zero-width square loop keeps its full area") {
  auto blocks = extract_blocks(square_loop(100.0));
  REQUIRE(blocks.size() == 1);
  CHECK(blocks[0].area_m2 == doctest::Approx(10000.0).epsilon(1e-12));
}

TEST_CASE("road width shrinks the block") {
  auto blocks = extract_blocks(square_loop(100.0, 10.0));
  REQUIRE(blocks.size() == 1);
  // Half of the 10 m corridor is carved from each side of the loop.
  CHECK(blocks[0].area_m2 == doctest::Approx(90.0 * 90.0).epsilon(1e-9));
}

TEST_CASE("crossing edges are reported and rejected") {
  RoadGraph g;
  g.nodes = {{0, 0}, {10, 10}, {0, 10}, {10, 0}};
  g.edges = {{0, 1, 6.0, RoadClass::local}, {2, 3, 6.0, RoadClass::local}};
  g.extent_x = g.extent_y = 10;
  ValidationReport rep = validate_graph(g);
  CHECK(!rep.planar);
  REQUIRE(rep.crossing_edges.has_value());
  try {
    extract_blocks(g);
    FAIL("expected a planarity error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::planarity_violation);
    CHECK(std::string(e.what()).find("PlanarityViolation") !=
          std::string::npos);
  }
}

TEST_CASE("duplicate and zero-length edges are flagged") {
  RoadGraph g = square_loop(50.0);
  g.edges.push_back({0, 1, 6.0, RoadClass::local});
  g.edges.push_back({2, 2, 6.0, RoadClass::local});
  ValidationReport rep = validate_graph(g);
  CHECK(rep.duplicate_edges.size() == 1);
  CHECK(rep.zero_length_edges.size() == 1);
  CHECK(!rep.all_pass());
}

TEST_CASE("debug export writes one line per edge") {
  RoadGraph g = generate_roads(RoadConfig{});
  std::ostringstream os;
  write_debug_edges(os, g);
  size_t lines = 0;
  for (char c : os.str()) lines += c == '\n';
  CHECK(lines == g.edges.size());
}

TEST_CASE("config validation rejects bad values") {
  RoadConfig cfg;
  cfg.spacing_m = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = RoadConfig{};
  cfg.extent_x = -5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = RoadConfig{};
  cfg.topology.clear();
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = RoadConfig{};
  cfg.topology = {{Topology::raster, -1.0}};
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("topology names round trip") {
  for (Topology t : {Topology::raster, Topology::radial, Topology::organic})
    CHECK(topology_from_name(topology_name(t)) == t);
  CHECK(!topology_from_name("hexagonal").has_value());
}

}  // TEST_SUITE
