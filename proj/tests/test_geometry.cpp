#include <doctest.h>

#include <synthcity/geometry.hpp>
#include <synthcity/rng.hpp>

#include <cmath>

using namespace synthcity;

namespace {

Polygon square(double side, Vec2 origin = {0, 0}) {
  return {origin,
          {origin.x + side, origin.y},
          {origin.x + side, origin.y + side},
          {origin.x, origin.y + side}};
}

Polygon random_convex(Rng& rng, int n, double radius) {
  // Points on a circle with jittered radii stay convex in angular order.
  Polygon poly;
  for (int i = 0; i < n; ++i) {
    double ang = 2.0 * M_PI * i / n;
    double r = radius * rng.uniform(0.6, 1.0);
    poly.push_back({r * std::cos(ang), r * std::sin(ang)});
  }
  return poly;
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("signed area and orientation") {
  Polygon ccw = square(1.0);
  CHECK(signed_area(ccw) == doctest::Approx(1.0));
  CHECK(is_ccw(ccw));
  Polygon cw(ccw.rbegin(), ccw.rend());
  CHECK(signed_area(cw) == doctest::Approx(-1.0));
  CHECK(!is_ccw(cw));
  CHECK(polygon_area(cw) == doctest::Approx(1.0));
  CHECK(polygon_area(square(100.0)) == doctest::Approx(10000.0));
}

TEST_CASE("centroid and bounds") {
  Polygon sq = square(10.0, {5, 5});
  Vec2 c = polygon_centroid(sq);
  CHECK(c.x == doctest::Approx(10.0));
  CHECK(c.y == doctest::Approx(10.0));
  auto [lo, hi] = polygon_bounds(sq);
  CHECK(lo == Vec2{5, 5});
  CHECK(hi == Vec2{15, 15});
}

TEST_CASE("point in polygon") {
  Polygon sq = square(10.0);
  CHECK(point_in_polygon(sq, {5, 5}));
  CHECK(!point_in_polygon(sq, {15, 5}));
  CHECK(!point_in_polygon(sq, {-1, -1}));
  Polygon ell = {{0, 0}, {4, 0}, {4, 1}, {1, 1}, {1, 4}, {0, 4}};
  CHECK(point_in_polygon(ell, {0.5, 3.5}));
  CHECK(!point_in_polygon(ell, {3, 3}));
}

TEST_CASE("simplicity") {
  CHECK(is_simple(square(1.0)));
  Polygon bowtie = {{0, 0}, {2, 2}, {2, 0}, {0, 2}};
  CHECK(!is_simple(bowtie));
}

TEST_CASE("segment intersection") {
  auto hit = segment_intersection({0, 0}, {1, 1}, {0, 1}, {1, 0});
  REQUIRE(hit.has_value());
  CHECK(hit->x == doctest::Approx(0.5));
  CHECK(hit->y == doctest::Approx(0.5));
  CHECK(!segment_intersection({0, 0}, {1, 0}, {0, 1}, {1, 1}).has_value());
  // Touching at a shared endpoint counts for segment_intersection but is
  // not a proper crossing.
  CHECK(segment_intersection({0, 0}, {1, 0}, {1, 0}, {1, 1}).has_value());
  CHECK(!segments_properly_cross({0, 0}, {1, 0}, {1, 0}, {1, 1}));
  CHECK(segments_properly_cross({0, 0}, {2, 2}, {0, 2}, {2, 0}));
}

TEST_CASE("convex hull drops interior points") {
  std::vector<Vec2> pts = {{0, 0}, {4, 0}, {4, 4}, {0, 4}, {2, 2}, {1, 1}};
  auto hull = convex_hull(pts);
  CHECK(hull.size() == 4);
  CHECK(polygon_area(hull) == doctest::Approx(16.0));
}

TEST_CASE("oriented bbox of a rotated rectangle") {
  // 8 x 3 rectangle rotated by 30 degrees.
  double c = std::cos(M_PI / 6), s = std::sin(M_PI / 6);
  auto rot = [&](Vec2 p) { return Vec2{c * p.x - s * p.y, s * p.x + c * p.y}; };
  Polygon rect = {rot({0, 0}), rot({8, 0}), rot({8, 3}), rot({0, 3})};
  Obb obb = oriented_bbox(rect);
  CHECK(obb.len_u * obb.len_v == doctest::Approx(24.0).epsilon(1e-9));
  CHECK(std::min(obb.len_u, obb.len_v) == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(std::abs(obb.axis_u.dot(obb.axis_v)) < 1e-12);
}

TEST_CASE("triangulation preserves area") {
  auto tris = triangulate(square(2.0));
  CHECK(tris.size() == 2);
  Polygon ell = {{0, 0}, {4, 0}, {4, 1}, {1, 1}, {1, 4}, {0, 4}};
  double want = polygon_area(ell);
  double got = 0.0;
  for (auto& t : triangulate(ell))
    got += polygon_area({t[0], t[1], t[2]});
  CHECK(got == doctest::Approx(want).epsilon(1e-12));

  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    Polygon poly = random_convex(rng, 3 + static_cast<int>(rng.below(8)), 20);
    double area = 0.0;
    for (auto& t : triangulate(poly)) area += polygon_area({t[0], t[1], t[2]});
    CHECK(area == doctest::Approx(polygon_area(poly)).epsilon(1e-9));
  }
}

TEST_CASE("ring triangulation equals outer minus hole") {
  Polygon outer = square(10.0);
  Polygon hole = square(4.0, {3, 3});
  double area = 0.0;
  for (auto& t : triangulate_ring(outer, hole))
    area += polygon_area({t[0], t[1], t[2]});
  CHECK(area == doctest::Approx(100.0 - 16.0).epsilon(1e-9));
}

TEST_CASE("inward offset") {
  auto small = offset_inward(square(10.0), 1.0);
  REQUIRE(small.has_value());
  CHECK(polygon_area(*small) == doctest::Approx(64.0).epsilon(1e-9));
  CHECK(is_ccw(*small));

  CHECK(!offset_inward(square(10.0), 5.0).has_value());  // collapses

  double per_edge[] = {1.0, 2.0, 3.0, 2.0};
  auto uneven = offset_inward(square(10.0), per_edge);
  REQUIRE(uneven.has_value());
  // Bottom edge moves up 1, right edge left 2, top down 3, left right 2.
  CHECK(polygon_area(*uneven) == doctest::Approx(6.0 * 6.0).epsilon(1e-9));
}

TEST_CASE("polygon split conserves area") {
  SplitPieces mid = split_polygon(square(10.0), {5, 0}, {0, 1});
  REQUIRE(mid.left.size() == 1);
  REQUIRE(mid.right.size() == 1);
  CHECK(polygon_area(mid.left[0]) == doctest::Approx(50.0));
  CHECK(polygon_area(mid.right[0]) == doctest::Approx(50.0));

  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    Polygon poly = random_convex(rng, 5 + static_cast<int>(rng.below(5)), 15);
    double ang = rng.uniform(0, 2 * M_PI);
    Vec2 dir{std::cos(ang), std::sin(ang)};
    Vec2 at{rng.uniform(-5, 5), rng.uniform(-5, 5)};
    SplitPieces pieces = split_polygon(poly, at, dir);
    double total = 0.0;
    for (auto& p : pieces.left) total += polygon_area(p);
    for (auto& p : pieces.right) total += polygon_area(p);
    CHECK(total == doctest::Approx(polygon_area(poly)).epsilon(1e-9));
  }
}

TEST_CASE("vector helpers") {
  CHECK(Vec2{3, 4}.norm() == doctest::Approx(5.0));
  CHECK(Vec2{1, 0}.perp() == Vec2{0, 1});
  CHECK(Vec2{2, 3}.cross({4, 5}) == doctest::Approx(-2.0));
  Vec3 n = Vec3{1, 0, 0}.cross({0, 1, 0});
  CHECK(n == Vec3{0, 0, 1});
}

}  // TEST_SUITE
