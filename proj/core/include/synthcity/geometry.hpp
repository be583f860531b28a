#ifndef SYNTHCITY_GEOMETRY_HPP
#define SYNTHCITY_GEOMETRY_HPP

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace synthcity {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  bool operator==(const Vec2&) const = default;

  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  double norm2() const { return x * x + y * y; }
  Vec2 normalized() const {
    double n = norm();
    return n > 0 ? Vec2{x / n, y / n} : Vec2{0, 0};
  }
  Vec2 perp() const { return {-y, x}; }  // 90 degrees counter-clockwise
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  bool operator==(const Vec3&) const = default;

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  Vec3 normalized() const {
    double n = norm();
    return n > 0 ? Vec3{x / n, y / n, z / n} : Vec3{0, 0, 0};
  }
};

/// Simple polygon as an open vertex ring (last vertex implicitly connects
/// back to the first). Counter-clockwise order is the positive orientation.
using Polygon = std::vector<Vec2>;

double signed_area(const Polygon& poly);
double polygon_area(const Polygon& poly);  // |signed_area|
Vec2 polygon_centroid(const Polygon& poly);
bool is_ccw(const Polygon& poly);
bool point_in_polygon(const Polygon& poly, Vec2 p);

/// True when no two non-adjacent edges intersect and no adjacent edges
/// overlap. O(n^2); polygons here are small.
bool is_simple(const Polygon& poly);

/// Proper or endpoint intersection point of segments [a,b] and [c,d].
/// Touching at shared endpoints counts. Collinear overlap reports the first
/// contained endpoint.
std::optional<Vec2> segment_intersection(Vec2 a, Vec2 b, Vec2 c, Vec2 d,
                                         double eps = 1e-12);

/// True when the open interiors of [a,b] and [c,d] cross, i.e. the segments
/// intersect somewhere other than a shared endpoint.
bool segments_properly_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d, double eps = 1e-9);

/// Squared distance from point p to segment [a,b], plus the closest point.
double point_segment_dist2(Vec2 p, Vec2 a, Vec2 b, Vec2* closest = nullptr);

struct Obb {
  Vec2 origin;          // corner of the box
  Vec2 axis_u, axis_v;  // unit axes, axis_v = axis_u rotated +90 degrees
  double len_u = 0, len_v = 0;
};

/// Minimum-area oriented bounding box via rotating calipers on the hull.
Obb oriented_bbox(const Polygon& poly);

std::vector<Vec2> convex_hull(std::vector<Vec2> points);

/// Ear-clipping triangulation of a simple polygon (any orientation).
/// Holes are not supported. Returns empty for degenerate input.
std::vector<std::array<Vec2, 3>> triangulate(const Polygon& poly);

/// Triangulate the ring between an outer polygon and one hole strictly
/// inside it (the hole is bridged to the outer boundary, then ear-clipped).
/// Triangle areas sum to outer minus hole; empty result if no bridge works.
std::vector<std::array<Vec2, 3>> triangulate_ring(const Polygon& outer,
                                                  const Polygon& hole);

/// Inward offset of a CCW simple polygon with one offset distance per edge
/// (edge i runs from vertex i to vertex i+1). Mitered corners; a corner whose
/// miter would exceed miter_limit times the local offset is beveled.
/// Returns nullopt when the polygon collapses (result not simple/CCW or has
/// area below min_area).
std::optional<Polygon> offset_inward(const Polygon& poly,
                                     std::span<const double> per_edge,
                                     double miter_limit = 4.0,
                                     double min_area = 1e-6);
std::optional<Polygon> offset_inward(const Polygon& poly, double distance,
                                     double miter_limit = 4.0,
                                     double min_area = 1e-6);

/// Cut a simple polygon by the infinite line through `point` along `dir`.
/// Pieces on the left of the line (positive side of dir's normal) and on the
/// right are returned separately. Piece areas sum to the input area.
struct SplitPieces {
  std::vector<Polygon> left;
  std::vector<Polygon> right;
};
SplitPieces split_polygon(const Polygon& poly, Vec2 point, Vec2 dir);

/// Axis-aligned bounds of a polygon as {min, max}.
std::pair<Vec2, Vec2> polygon_bounds(const Polygon& poly);

}  // namespace synthcity

#endif  // SYNTHCITY_GEOMETRY_HPP
