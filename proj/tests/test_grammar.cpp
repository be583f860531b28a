#include <doctest.h>

#include <synthcity/errors.hpp>
#include <synthcity/grammar.hpp>
#include <synthcity/rng.hpp>

#include <cmath>
#include <string>

using namespace synthcity;

namespace {

Polygon rect(double w, double d) {
  return {{0, 0}, {w, 0}, {w, d}, {0, d}};
}

double max_z(const LabeledMesh& mesh) {
  double top = 0.0;
  for (size_t t = 0; t < mesh.triangle_count(); ++t)
    for (int c = 0; c < 3; ++c) top = std::max(top, mesh.vertex(t, c).z);
  return top;
}

// Signed volume by the divergence theorem; exact for a closed surface and
// unaffected by an open bottom lying in the z = 0 plane.
double mesh_volume(const LabeledMesh& mesh) {
  double v = 0.0;
  for (size_t t = 0; t < mesh.triangle_count(); ++t) {
    const Vec3& a = mesh.vertex(t, 0);
    const Vec3& b = mesh.vertex(t, 1);
    const Vec3& c = mesh.vertex(t, 2);
    v += a.dot(b.cross(c)) / 6.0;
  }
  return std::abs(v);
}

double projected_class_area(const LabeledMesh& mesh, SemanticClass cls) {
  double area = 0.0;
  for (size_t t = 0; t < mesh.triangle_count(); ++t) {
    if (mesh.triangle_class(t) != cls) continue;
    const Vec3& a = mesh.vertex(t, 0);
    const Vec3& b = mesh.vertex(t, 1);
    const Vec3& c = mesh.vertex(t, 2);
    double cross = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    if (cross > 0) area += 0.5 * cross;
  }
  return area;
}

bool meshes_identical(const LabeledMesh& a, const LabeledMesh& b) {
  if (a.triangle_count() != b.triangle_count()) return false;
  for (size_t t = 0; t < a.triangle_count(); ++t) {
    for (int c = 0; c < 3; ++c)
      if (!(a.vertex(t, c) == b.vertex(t, c))) return false;
    if (a.triangle_class(t) != b.triangle_class(t)) return false;
    if (a.triangle_instance(t) != b.triangle_instance(t)) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("grammar") {

TEST_CASE("parser reads attrs, terminals, and rules") {
  GrammarProgram p = parse_grammar(R"(
# a comment
attr height = rand(9, 24)
attr pitch = 30
terminal Lawn : Vegetation
Lot --> extrude(height) Mass
Mass --> comp(faces) { top: Top side: Wall bottom: NIL }
Top --> 40%: roof(gable, pitch) 60%: roof(flat)
Wall --> color(0.8, 0.7, 0.6) Skin
terminal Skin : Building
)");
  CHECK(p.attrs.size() == 2);
  CHECK(p.attrs[0].name == "height");
  CHECK(p.attrs[0].value.kind == Expr::Kind::random_range);
  CHECK(p.terminals.size() == 2);
  CHECK(p.terminals.at("Lawn") == SemanticClass::Vegetation);
  CHECK(p.rules.size() == 4);
  const Rule& top = p.rules.at("Top");
  REQUIRE(top.successors.size() == 2);
  CHECK(top.successors[0].weight == doctest::Approx(0.4));
  CHECK(top.successors[1].weight == doctest::Approx(0.6));
  CHECK_NOTHROW(p.link_check());
}

TEST_CASE("parse errors carry their kind") {
  CHECK_THROWS_AS(parse_grammar("Lot --> hover(3) X"), Error);
  try {
    parse_grammar("Lot --> hover(3) X");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::unknown_operation);
  }
  try {
    parse_grammar("Lot --> 0%: extrude(1) A 100%: extrude(2) B");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::non_positive_weight);
  }
  try {
    parse_grammar("Lot -> extrude(1) A");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::syntax_error);
  }
  GrammarProgram dangling = parse_grammar("Lot --> extrude(4) Missing");
  CHECK_THROWS_AS(dangling.link_check(), Error);
}

TEST_CASE("pretty print reaches a fixed point") {
  std::string src = R"(
attr h = rand(5, 9)
terminal T : Building
Lot --> 30%: extrude(h) T 70%: extrude(2.5) T
)";
  GrammarProgram once = parse_grammar(src);
  std::string printed = pretty_print(once);
  GrammarProgram twice = parse_grammar(printed);
  CHECK(pretty_print(twice) == printed);
  CHECK(twice.rules.at("Lot").successors[0].raw_percent ==
        doctest::Approx(30.0));
}

TEST_CASE("split arithmetic is exact") {
  SizeSpec spec[] = {{false, 10.0}, {true, 1.0}, {true, 2.0}};
  auto lens = apply_split(30.0, spec);
  REQUIRE(lens.size() == 3);
  CHECK(lens[0] == 10.0);
  CHECK(lens[1] == doctest::Approx(20.0 / 3.0).epsilon(1e-15));
  CHECK(lens[0] + lens[1] + lens[2] == 30.0);

  SizeSpec over[] = {{false, 40.0}};
  CHECK_THROWS_AS(apply_split(30.0, over), Error);
  try {
    apply_split(30.0, over);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::split_overflow);
  }

  SizeSpec under[] = {{false, 10.0}};
  try {
    apply_split(30.0, under);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::split_underflow);
  }

  SizeSpec exact[] = {{false, 10.0}, {false, 20.0}};
  auto fit = apply_split(30.0, exact);
  CHECK(fit[0] + fit[1] == 30.0);

  Rng rng(8);
  for (int trial = 0; trial < 500; ++trial) {
    double len = rng.uniform(1.0, 500.0);
    std::vector<SizeSpec> parts;
    size_t n = 1 + rng.below(6);
    bool any_rel = false;
    for (size_t i = 0; i < n; ++i) {
      bool rel = rng.uniform() < 0.5;
      any_rel |= rel;
      parts.push_back({rel, rng.uniform(0.1, len / double(n))});
    }
    if (!any_rel) parts.push_back({true, 1.0});
    auto out = apply_split(len, parts);
    double sum = 0.0;
    for (double v : out) sum += v;
    CHECK(sum == len);
  }
}

TEST_CASE("derivation is deterministic in lot, program, and seed") {
  GrammarProgram p = parse_grammar(R"(
attr h = rand(6, 18)
terminal W : Building
terminal R : Roof
Lot --> 50%: extrude(h) M 50%: extrude(4) M
M --> comp(faces) { top: Cap side: W }
Cap --> 60%: roof(gable, rand(20, 40)) 40%: roof(hip, 30)
)");
  Rng rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    Polygon lot = rect(rng.uniform(6, 30), rng.uniform(6, 30));
    uint64_t seed = rng.next();
    LabeledMesh a = derive(lot, p, seed);
    LabeledMesh b = derive(lot, p, seed);
    CHECK(meshes_identical(a, b));
  }
  bool seed_matters = false;
  for (uint64_t s = 0; s < 10 && !seed_matters; ++s)
    seed_matters = !meshes_identical(derive(rect(10, 10), p, s),
                                     derive(rect(10, 10), p, s + 100));
  CHECK(seed_matters);
}

TEST_CASE("stochastic weights are calibrated") {
  GrammarProgram p = parse_grammar(R"(
terminal T : Building
Lot --> 30%: extrude(1) T 70%: extrude(2) T
)");
  int tall = 0;
  const int kTrials = 10000;
  for (int i = 0; i < kTrials; ++i)
    tall += max_z(derive(rect(5, 5), p, 1000 + i)) > 1.5;
  double frac = double(tall) / kTrials;
  CHECK(std::abs(frac - 0.7) < 0.02);
}

TEST_CASE("extrude volume equals footprint area times height") {
  GrammarProgram p = parse_grammar(R"(
terminal T : Building
Lot --> extrude(7.5) T
)");
  Polygon lot = {{0, 0}, {12, 0}, {12, 8}, {6, 14}, {0, 8}};
  LabeledMesh m = derive(lot, p, 3);
  double area = polygon_area(lot);
  CHECK(mesh_volume(m) == doctest::Approx(area * 7.5).epsilon(1e-6));
  CHECK(max_z(m) == doctest::Approx(7.5));
}

TEST_CASE("comp splits a prism into labeled faces") {
  GrammarProgram p = parse_grammar(R"(
terminal Top : Roof
terminal Side : Building
terminal Bottom : Ground
Lot --> extrude(6) M
M --> comp(faces) { top: Top side: Side bottom: Bottom }
)");
  LabeledMesh m = derive(rect(10, 4), p, 1);
  CHECK(projected_class_area(m, SemanticClass::Roof) ==
        doctest::Approx(40.0).epsilon(1e-9));
  CHECK(m.count_class(SemanticClass::Building) > 0);
  CHECK(m.count_class(SemanticClass::Ground) > 0);
  // Walls are vertical: no projected area.
  CHECK(projected_class_area(m, SemanticClass::Building) ==
        doctest::Approx(0.0));
}

TEST_CASE("setback shrinks the footprint") {
  GrammarProgram p = parse_grammar(R"(
terminal T : Building
Lot --> setback(1) Inner
Inner --> extrude(3) T
)");
  LabeledMesh m = derive(rect(10, 10), p, 1);
  CHECK(mesh_volume(m) == doctest::Approx(8.0 * 8.0 * 3.0).epsilon(1e-9));
}

TEST_CASE("roofs cover the footprint in plan view") {
  for (const char* kind : {"flat", "gable", "hip"}) {
    std::string src = "terminal W : Building\n"
                      "Lot --> extrude(5) M\n"
                      "M --> comp(faces) { top: Cap side: W }\n"
                      "Cap --> roof(" +
                      std::string(kind) + ", 30)\n";
    GrammarProgram p = parse_grammar(src);
    LabeledMesh m = derive(rect(10, 6), p, 2);
    CHECK(projected_class_area(m, SemanticClass::Roof) ==
          doctest::Approx(60.0).epsilon(1e-9));
    if (std::string(kind) == "flat")
      CHECK(max_z(m) == doctest::Approx(5.0));
    else
      CHECK(max_z(m) > 5.0 + 1.0);
  }
  // Pitch bounds: [0, 85).
  CHECK_THROWS_AS(
      derive(rect(10, 6),
             parse_grammar("terminal W : Building\nLot --> extrude(5) M\n"
                           "M --> comp(faces) { top: C side: W }\n"
                           "C --> roof(gable, 85)\n"),
             1),
      Error);
}

TEST_CASE("split partitions the footprint") {
  GrammarProgram p = parse_grammar(R"(
terminal A : Building
terminal B : Roof
Lot --> split(x) { 4: PartA ~1: PartB }
PartA --> extrude(2) A
PartB --> extrude(2) B
)");
  LabeledMesh m = derive(rect(10, 5), p, 1);
  // 4 m slab then the 6 m remainder, both 5 m deep and 2 m tall.
  CHECK(mesh_volume(m) == doctest::Approx(10.0 * 5.0 * 2.0).epsilon(1e-9));
  double vol_a = 0.0;
  GrammarProgram only_a = parse_grammar(R"(
terminal A : Building
Lot --> split(x) { 4: PartA ~1: NIL }
PartA --> extrude(2) A
)");
  vol_a = mesh_volume(derive(rect(10, 5), only_a, 1));
  CHECK(vol_a == doctest::Approx(4.0 * 5.0 * 2.0).epsilon(1e-9));
}

TEST_CASE("attrs evaluate once per derivation") {
  GrammarProgram p = parse_grammar(R"(
attr h = rand(5, 40)
terminal A : Building
terminal B : Roof
Lot --> split(x) { ~1: Left ~1: Right }
Left --> extrude(h) A
Right --> extrude(h) B
)");
  for (uint64_t seed = 0; seed < 20; ++seed) {
    LabeledMesh m = derive(rect(20, 10), p, seed);
    double za = 0, zb = 0;
    for (size_t t = 0; t < m.triangle_count(); ++t)
      for (int c = 0; c < 3; ++c) {
        double z = m.vertex(t, c).z;
        if (m.triangle_class(t) == SemanticClass::Building)
          za = std::max(za, z);
        else
          zb = std::max(zb, z);
      }
    CHECK(za == doctest::Approx(zb).epsilon(1e-12));
  }
}

TEST_CASE("rand arguments redraw per application") {
  GrammarProgram p = parse_grammar(R"(
terminal A : Building
terminal B : Roof
Lot --> split(x) { ~1: Left ~1: Right }
Left --> extrude(rand(5, 40)) A
Right --> extrude(rand(5, 40)) B
)");
  bool differ = false;
  for (uint64_t seed = 0; seed < 10 && !differ; ++seed) {
    LabeledMesh m = derive(rect(20, 10), p, seed);
    double za = 0, zb = 0;
    for (size_t t = 0; t < m.triangle_count(); ++t)
      for (int c = 0; c < 3; ++c) {
        double z = m.vertex(t, c).z;
        if (m.triangle_class(t) == SemanticClass::Building)
          za = std::max(za, z);
        else
          zb = std::max(zb, z);
      }
    differ = std::abs(za - zb) > 0.5;
  }
  CHECK(differ);
}

TEST_CASE("NIL discards and derivation guards fire") {
  GrammarProgram nil = parse_grammar("Lot --> NIL");
  CHECK(derive(rect(5, 5), nil, 1).empty());

  GrammarProgram no_lot = parse_grammar("Other --> NIL");
  CHECK_THROWS_AS(derive(rect(5, 5), no_lot, 1), Error);
  try {
    derive(rect(5, 5), no_lot, 1);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::empty_derivation);
  }

  GrammarProgram loop = parse_grammar("Lot --> Lot");
  try {
    derive(rect(5, 5), loop, 1);
    FAIL("expected recursion limit");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::recursion_limit);
  }
}

TEST_CASE("color and texture pick materials") {
  GrammarProgram p = parse_grammar(R"(
terminal T : Building
Lot --> color(1, 0, 0) extrude(2) T
)");
  LabeledMesh m = derive(rect(4, 4), p, 1);
  REQUIRE(!m.empty());
  const Material& mat = m.palette().at(m.triangle_material(0));
  CHECK(mat.rgb[0] == doctest::Approx(1.0f));
  CHECK(mat.rgb[1] == doctest::Approx(0.0f));

  Palette pal;
  Material brick;
  brick.name = "brick";
  brick.rgb = {0.6f, 0.3f, 0.2f};
  pal.intern(brick);
  GrammarProgram tex = parse_grammar(R"(
terminal T : Building
Lot --> texture(brick) extrude(2) T
)");
  LabeledMesh n = derive(rect(4, 4), tex, 1, &pal);
  CHECK(m.palette().at(0).name == "default");
  CHECK(n.palette().at(n.triangle_material(0)).name == "brick");

  // Unknown texture names fall back to a neutral gray placeholder.
  LabeledMesh fallback = derive(rect(4, 4), tex, 1);
  const Material& ph = fallback.palette().at(fallback.triangle_material(0));
  CHECK(ph.name == "brick");
  CHECK(ph.rgb[0] == doctest::Approx(0.6f));
  CHECK(ph.rgb[1] == doctest::Approx(0.6f));
}

TEST_CASE("terminals map to their declared class") {
  GrammarProgram p = parse_grammar(R"(
terminal Shrub : Vegetation
Lot --> extrude(1) Shrub
)");
  LabeledMesh m = derive(rect(3, 3), p, 1);
  REQUIRE(!m.empty());
  for (size_t t = 0; t < m.triangle_count(); ++t)
    CHECK(m.triangle_class(t) == SemanticClass::Vegetation);
}

TEST_CASE("instances tag every triangle") {
  GrammarProgram p = parse_grammar(R"(
terminal T : Building
Lot --> extrude(2) T
)");
  LabeledMesh m = derive(rect(4, 4), p, 9, nullptr, 42);
  for (size_t t = 0; t < m.triangle_count(); ++t)
    CHECK(m.triangle_instance(t) == 42);
}

}  // TEST_SUITE
