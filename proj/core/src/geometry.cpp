#include "synthcity/geometry.hpp"

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <limits>

namespace synthcity {

double signed_area(const Polygon& poly) {
  double acc = 0.0;
  size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    Vec2 a = poly[i], b = poly[(i + 1) % n];
    acc += a.cross(b);
  }
  return 0.5 * acc;
}

double polygon_area(const Polygon& poly) { return std::abs(signed_area(poly)); }

bool is_ccw(const Polygon& poly) { return signed_area(poly) > 0.0; }

Vec2 polygon_centroid(const Polygon& poly) {
  double a = signed_area(poly);
  size_t n = poly.size();
  if (std::abs(a) < 1e-12) {
    Vec2 sum{0, 0};
    for (const Vec2& v : poly) sum += v;
    return n ? sum / static_cast<double>(n) : Vec2{0, 0};
  }
  double cx = 0, cy = 0;
  for (size_t i = 0; i < n; ++i) {
    Vec2 p = poly[i], q = poly[(i + 1) % n];
    double w = p.cross(q);
    cx += (p.x + q.x) * w;
    cy += (p.y + q.y) * w;
  }
  return {cx / (6.0 * a), cy / (6.0 * a)};
}

bool point_in_polygon(const Polygon& poly, Vec2 p) {
  // Crossing number with half-open edges.
  bool inside = false;
  size_t n = poly.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    Vec2 a = poly[i], b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      double x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

std::optional<Vec2> segment_intersection(Vec2 a, Vec2 b, Vec2 c, Vec2 d,
                                         double eps) {
  Vec2 r = b - a, s = d - c;
  double denom = r.cross(s);
  Vec2 ca = c - a;
  if (std::abs(denom) > eps) {
    double t = ca.cross(s) / denom;
    double u = ca.cross(r) / denom;
    if (t >= -eps && t <= 1 + eps && u >= -eps && u <= 1 + eps)
      return a + r * t;
    return std::nullopt;
  }
  // Parallel. Overlapping collinear segments report a contained endpoint.
  if (std::abs(ca.cross(r)) > eps * std::max(1.0, r.norm())) return std::nullopt;
  double rlen2 = r.norm2();
  if (rlen2 < eps) return std::nullopt;
  double t0 = (c - a).dot(r) / rlen2;
  double t1 = (d - a).dot(r) / rlen2;
  if (t0 > t1) std::swap(t0, t1);
  if (t1 < -eps || t0 > 1 + eps) return std::nullopt;
  double t = std::clamp(t0, 0.0, 1.0);
  return a + r * t;
}

bool segments_properly_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d, double eps) {
  auto hit = segment_intersection(a, b, c, d, 1e-12);
  if (!hit) return false;
  Vec2 p = *hit;
  auto near = [eps](Vec2 u, Vec2 v) { return (u - v).norm2() < eps * eps; };
  // A touch at a shared endpoint is not a crossing.
  if ((near(p, a) || near(p, b)) && (near(p, c) || near(p, d))) return false;
  return true;
}

double point_segment_dist2(Vec2 p, Vec2 a, Vec2 b, Vec2* closest) {
  Vec2 ab = b - a;
  double len2 = ab.norm2();
  double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  Vec2 q = a + ab * t;
  if (closest) *closest = q;
  return (p - q).norm2();
}

bool is_simple(const Polygon& poly) {
  size_t n = poly.size();
  if (n < 3) return false;
  for (size_t i = 0; i < n; ++i) {
    if ((poly[i] - poly[(i + 1) % n]).norm2() < 1e-18) return false;
  }
  for (size_t i = 0; i < n; ++i) {
    Vec2 a = poly[i], b = poly[(i + 1) % n];
    for (size_t j = i + 1; j < n; ++j) {
      bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      Vec2 c = poly[j], d = poly[(j + 1) % n];
      if (adjacent) {
        // Adjacent edges may only share the common vertex.
        Vec2 shared = (j == i + 1) ? b : a;
        Vec2 e1 = (j == i + 1) ? a : c;  // far end of first edge
        Vec2 e2 = (j == i + 1) ? d : b;  // far end of second edge
        Vec2 u = e1 - shared, v = e2 - shared;
        if (std::abs(u.cross(v)) < 1e-12 && u.dot(v) > 0) return false;
        continue;
      }
      if (segment_intersection(a, b, c, d, 1e-12)) return false;
    }
  }
  return true;
}

std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  size_t n = pts.size();
  if (n < 3) return pts;
  std::vector<Vec2> hull(2 * n);
  size_t k = 0;
  for (size_t i = 0; i < n; ++i) {  // lower
    while (k >= 2 &&
           (hull[k - 1] - hull[k - 2]).cross(pts[i] - hull[k - 2]) <= 0)
      --k;
    hull[k++] = pts[i];
  }
  for (size_t i = n - 1, t = k + 1; i-- > 0;) {  // upper
    while (k >= t &&
           (hull[k - 1] - hull[k - 2]).cross(pts[i] - hull[k - 2]) <= 0)
      --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

Obb oriented_bbox(const Polygon& poly) {
  std::vector<Vec2> hull = convex_hull(poly);
  Obb best;
  if (hull.size() < 2) {
    best.origin = hull.empty() ? Vec2{0, 0} : hull[0];
    best.axis_u = {1, 0};
    best.axis_v = {0, 1};
    return best;
  }
  double best_area = std::numeric_limits<double>::max();
  size_t n = hull.size();
  for (size_t i = 0; i < n; ++i) {
    Vec2 dir = (hull[(i + 1) % n] - hull[i]).normalized();
    if (dir.norm2() < 1e-18) continue;
    Vec2 nrm = dir.perp();
    double umin = std::numeric_limits<double>::max(), umax = -umin;
    double vmin = umin, vmax = -umin;
    for (const Vec2& p : hull) {
      double u = p.dot(dir), v = p.dot(nrm);
      umin = std::min(umin, u);
      umax = std::max(umax, u);
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
    }
    double area = (umax - umin) * (vmax - vmin);
    if (area < best_area) {
      best_area = area;
      best.axis_u = dir;
      best.axis_v = nrm;
      best.len_u = umax - umin;
      best.len_v = vmax - vmin;
      best.origin = dir * umin + nrm * vmin;
    }
  }
  // Keep axis_u as the longer axis.
  if (best.len_v > best.len_u) {
    Vec2 u = best.axis_u;
    best.axis_u = best.axis_v;
    best.axis_v = u * -1.0;
    std::swap(best.len_u, best.len_v);
    best.origin = best.origin + u * -0.0;
    // Recompute origin corner for the swapped frame.
    double umin = std::numeric_limits<double>::max(), vmin = umin;
    for (const Vec2& p : poly) {
      umin = std::min(umin, p.dot(best.axis_u));
      vmin = std::min(vmin, p.dot(best.axis_v));
    }
    best.origin = best.axis_u * umin + best.axis_v * vmin;
  }
  return best;
}

std::vector<std::array<Vec2, 3>> triangulate(const Polygon& input) {
  std::vector<std::array<Vec2, 3>> out;
  Polygon poly = input;
  if (poly.size() < 3) return out;
  if (!is_ccw(poly)) std::reverse(poly.begin(), poly.end());
  // Drop repeated points.
  Polygon clean;
  for (const Vec2& v : poly) {
    if (clean.empty() || (v - clean.back()).norm2() > 1e-18) clean.push_back(v);
  }
  while (clean.size() > 1 && (clean.front() - clean.back()).norm2() < 1e-18)
    clean.pop_back();
  if (clean.size() < 3) return out;

  std::vector<uint32_t> idx(clean.size());
  for (uint32_t i = 0; i < idx.size(); ++i) idx[i] = i;

  auto tri_contains = [](Vec2 a, Vec2 b, Vec2 c, Vec2 p) {
    double d1 = (b - a).cross(p - a);
    double d2 = (c - b).cross(p - b);
    double d3 = (a - c).cross(p - c);
    double eps = 1e-12;
    return d1 > eps && d2 > eps && d3 > eps;
  };

  size_t guard = 0;
  while (idx.size() > 3 && guard++ < 10000) {
    bool clipped = false;
    size_t m = idx.size();
    for (size_t i = 0; i < m; ++i) {
      Vec2 a = clean[idx[(i + m - 1) % m]];
      Vec2 b = clean[idx[i]];
      Vec2 c = clean[idx[(i + 1) % m]];
      double cr = (b - a).cross(c - b);
      if (cr <= 1e-15) continue;  // reflex or collinear
      bool ear = true;
      for (size_t j = 0; j < m; ++j) {
        if (j == i || j == (i + m - 1) % m || j == (i + 1) % m) continue;
        if (tri_contains(a, b, c, clean[idx[j]])) {
          ear = false;
          break;
        }
      }
      if (!ear) continue;
      out.push_back({a, b, c});
      idx.erase(idx.begin() + static_cast<long>(i));
      clipped = true;
      break;
    }
    if (!clipped) {
      // Numerical stalemate. Clip the most convex corner to make progress.
      size_t best = 0;
      double best_cr = -std::numeric_limits<double>::max();
      for (size_t i = 0; i < m; ++i) {
        Vec2 a = clean[idx[(i + m - 1) % m]];
        Vec2 b = clean[idx[i]];
        Vec2 c = clean[idx[(i + 1) % m]];
        double cr = (b - a).cross(c - b);
        if (cr > best_cr) {
          best_cr = cr;
          best = i;
        }
      }
      size_t i = best;
      out.push_back({clean[idx[(i + m - 1) % m]], clean[idx[i]],
                     clean[idx[(i + 1) % m]]});
      idx.erase(idx.begin() + static_cast<long>(i));
    }
  }
  if (idx.size() == 3) out.push_back({clean[idx[0]], clean[idx[1]], clean[idx[2]]});
  return out;
}

std::vector<std::array<Vec2, 3>> triangulate_ring(const Polygon& outer,
                                                  const Polygon& hole) {
  std::vector<std::array<Vec2, 3>> out;
  if (outer.size() < 3) return out;
  if (hole.size() < 3) return triangulate(outer);

  Polygon ccw_outer = outer;
  if (!is_ccw(ccw_outer)) std::reverse(ccw_outer.begin(), ccw_outer.end());
  Polygon cw_hole = hole;
  if (is_ccw(cw_hole)) std::reverse(cw_hole.begin(), cw_hole.end());

  double want = polygon_area(ccw_outer) - polygon_area(cw_hole);
  if (want <= 0) return out;

  // A bridge from hole vertex ih to outer vertex io is usable when it stays
  // clear of both boundaries; the merged ring is then weakly simple and ear
  // clipping applies. The area certificate rejects bad merges.
  auto bridge_clear = [&](size_t ih, size_t io) {
    Vec2 a = cw_hole[ih];
    Vec2 b = ccw_outer[io];
    if ((a - b).norm2() < 1e-18) return false;
    for (size_t e = 0; e < ccw_outer.size(); ++e) {
      size_t f = (e + 1) % ccw_outer.size();
      if (e == io || f == io) continue;
      if (segments_properly_cross(a, b, ccw_outer[e], ccw_outer[f]))
        return false;
    }
    for (size_t e = 0; e < cw_hole.size(); ++e) {
      size_t f = (e + 1) % cw_hole.size();
      if (e == ih || f == ih) continue;
      if (segments_properly_cross(a, b, cw_hole[e], cw_hole[f])) return false;
    }
    return true;
  };

  // Candidate bridges, closest pairs first.
  struct Cand {
    double d2;
    size_t ih, io;
  };
  std::vector<Cand> cands;
  cands.reserve(cw_hole.size() * ccw_outer.size());
  for (size_t ih = 0; ih < cw_hole.size(); ++ih)
    for (size_t io = 0; io < ccw_outer.size(); ++io)
      cands.push_back({(cw_hole[ih] - ccw_outer[io]).norm2(), ih, io});
  std::sort(cands.begin(), cands.end(),
            [](const Cand& l, const Cand& r) { return l.d2 < r.d2; });

  int attempts = 0;
  for (const Cand& c : cands) {
    if (attempts >= 24) break;
    if (!bridge_clear(c.ih, c.io)) continue;
    ++attempts;
    Polygon merged;
    merged.reserve(ccw_outer.size() + cw_hole.size() + 2);
    for (size_t k = 0; k <= c.io; ++k) merged.push_back(ccw_outer[k]);
    for (size_t k = 0; k <= cw_hole.size(); ++k)
      merged.push_back(cw_hole[(c.ih + k) % cw_hole.size()]);
    for (size_t k = c.io; k < ccw_outer.size(); ++k)
      merged.push_back(ccw_outer[k]);

    auto tris = triangulate(merged);
    double got = 0.0;
    for (const auto& t : tris)
      got += 0.5 * std::abs((t[1] - t[0]).cross(t[2] - t[0]));
    if (std::abs(got - want) <= 1e-6 * std::max(want, 1.0)) return tris;
  }
  return out;
}

std::optional<Polygon> offset_inward(const Polygon& poly,
                                     std::span<const double> per_edge,
                                     double miter_limit, double min_area) {
  size_t n = poly.size();
  if (n < 3 || per_edge.size() != n) return std::nullopt;
  Polygon out;
  out.reserve(n + 4);
  for (size_t i = 0; i < n; ++i) {
    size_t h = (i + n - 1) % n;  // edge h ends at vertex i, edge i starts there
    Vec2 dir_h = (poly[i] - poly[h]).normalized();
    Vec2 dir_i = (poly[(i + 1) % n] - poly[i]).normalized();
    Vec2 n_h = dir_h.perp();  // inward for CCW
    Vec2 n_i = dir_i.perp();
    Vec2 p_h = poly[i] + n_h * per_edge[h];  // corner moved by each offset line
    Vec2 p_i = poly[i] + n_i * per_edge[i];
    double denom = dir_h.cross(dir_i);
    double local = std::max(per_edge[h], per_edge[i]);
    if (std::abs(denom) < 1e-9) {
      // Nearly parallel edges: single offset point.
      out.push_back(poly[i] + (n_h + n_i).normalized() * local);
      continue;
    }
    // Intersect line(p_h, dir_h) with line(p_i, dir_i).
    double t = (p_i - p_h).cross(dir_i) / denom;
    Vec2 miter = p_h + dir_h * t;
    if (local > 0 && (miter - poly[i]).norm() > miter_limit * local) {
      out.push_back(p_h);
      out.push_back(p_i);
    } else {
      out.push_back(miter);
    }
  }
  // Collapse coincident vertices produced by zero-length miters.
  Polygon clean;
  for (const Vec2& v : out) {
    if (clean.empty() || (v - clean.back()).norm2() > 1e-16) clean.push_back(v);
  }
  while (clean.size() > 1 && (clean.front() - clean.back()).norm2() < 1e-16)
    clean.pop_back();
  if (clean.size() < 3) return std::nullopt;
  if (!is_ccw(clean) || polygon_area(clean) < min_area || !is_simple(clean))
    return std::nullopt;
  return clean;
}

std::optional<Polygon> offset_inward(const Polygon& poly, double distance,
                                     double miter_limit, double min_area) {
  if (distance == 0.0) return poly;
  std::vector<double> d(poly.size(), distance);
  return offset_inward(poly, d, miter_limit, min_area);
}

std::pair<Vec2, Vec2> polygon_bounds(const Polygon& poly) {
  Vec2 mn{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
  Vec2 mx{-mn.x, -mn.y};
  for (const Vec2& p : poly) {
    mn.x = std::min(mn.x, p.x);
    mn.y = std::min(mn.y, p.y);
    mx.x = std::max(mx.x, p.x);
    mx.y = std::max(mx.y, p.y);
  }
  return {mn, mx};
}

namespace {

struct RingVertex {
  Vec2 p;
  double d;  // signed distance to the cut line (positive = left)
  double t;  // parameter along the line, meaningful when d == 0
  bool on_line;
};

// One attempt at cutting. Fails (nullopt) when the configuration is too
// degenerate to pair the crossings consistently; the caller then nudges the
// line and retries.
std::optional<SplitPieces> try_split(const Polygon& poly, Vec2 point, Vec2 dir,
                                     double eps) {
  Vec2 n = dir.perp();
  size_t npts = poly.size();

  std::vector<RingVertex> ring;
  ring.reserve(npts + 8);
  auto classify = [&](Vec2 v) {
    RingVertex rv;
    rv.p = v;
    rv.d = n.dot(v - point);
    rv.t = dir.dot(v - point);
    if (std::abs(rv.d) <= eps) {
      rv.d = 0.0;
      rv.on_line = true;
    } else {
      rv.on_line = false;
    }
    return rv;
  };
  for (size_t i = 0; i < npts; ++i) {
    RingVertex a = classify(poly[i]);
    RingVertex b = classify(poly[(i + 1) % npts]);
    ring.push_back(a);
    if (!a.on_line && !b.on_line && (a.d > 0) != (b.d > 0)) {
      double s = a.d / (a.d - b.d);
      RingVertex x = classify(poly[i] + (poly[(i + 1) % npts] - poly[i]) * s);
      x.d = 0.0;
      x.on_line = true;
      ring.push_back(x);
    }
  }
  size_t m = ring.size();

  // After augmentation no edge crosses the line strictly, so an edge's side
  // is the side of whichever endpoint is off the line. Two consecutive
  // on-line vertices mean an edge lies along the cut: degenerate.
  auto edge_side = [&](size_t i) -> int {
    const RingVertex& a = ring[i];
    const RingVertex& b = ring[(i + 1) % m];
    if (!a.on_line) return a.d > 0 ? 1 : -1;
    if (!b.on_line) return b.d > 0 ? 1 : -1;
    return 0;
  };
  for (size_t i = 0; i < m; ++i)
    if (edge_side(i) == 0) return std::nullopt;

  // Events: on-line vertices where the boundary switches sides.
  struct Event {
    size_t ring_idx;
    double t;
    int out_side;
  };
  std::vector<Event> events;
  for (size_t i = 0; i < m; ++i) {
    if (!ring[i].on_line) continue;
    int in_side = edge_side((i + m - 1) % m);
    int out_side = edge_side(i);
    if (in_side == out_side) continue;  // tangential touch
    events.push_back({i, ring[i].t, out_side});
  }
  if (events.empty()) {
    SplitPieces pieces;
    int side = 0;
    for (const RingVertex& rv : ring)
      if (!rv.on_line) {
        side = rv.d > 0 ? 1 : -1;
        break;
      }
    (side >= 0 ? pieces.left : pieces.right).push_back(poly);
    return pieces;
  }
  if (events.size() % 2 != 0) return std::nullopt;
  std::sort(events.begin(), events.end(),
            [](const Event& a, const Event& b) { return a.t < b.t; });

  // Interior intervals along the line are [e0,e1], [e2,e3], ... Each one
  // bridges a left piece in one direction and a right piece in the other:
  // the walk leaves a side at the event whose outgoing edge is on the other
  // side, and re-enters at the pair partner.
  std::vector<long> bridge_left(m, -1), bridge_right(m, -1);
  for (size_t k = 0; k + 1 < events.size(); k += 2) {
    const Event& lo = events[k];
    const Event& hi = events[k + 1];
    if (lo.out_side == hi.out_side) return std::nullopt;
    const Event& left_from = lo.out_side < 0 ? lo : hi;
    const Event& left_to = lo.out_side < 0 ? hi : lo;
    bridge_left[left_from.ring_idx] = static_cast<long>(left_to.ring_idx);
    bridge_right[left_to.ring_idx] = static_cast<long>(left_from.ring_idx);
  }

  // Per-side successor: follow the ring while its edges stay on the side,
  // take the bridge at a departing event.
  auto successor = [&](int side, const std::vector<long>& bridge,
                       size_t i) -> long {
    if (edge_side(i) == side) return static_cast<long>((i + 1) % m);
    if (ring[i].on_line) return bridge[i];
    return -1;
  };

  auto extract = [&](int side, const std::vector<long>& bridge,
                     std::vector<Polygon>& out_pieces) -> bool {
    std::vector<bool> used(m, false);
    for (size_t start = 0; start < m; ++start) {
      if (used[start] || successor(side, bridge, start) < 0) continue;
      Polygon piece;
      size_t cur = start;
      size_t guard = 0;
      do {
        if (guard++ > 2 * m) return false;
        used[cur] = true;
        piece.push_back(ring[cur].p);
        long nxt = successor(side, bridge, cur);
        if (nxt < 0) return false;
        cur = static_cast<size_t>(nxt);
      } while (cur != start);
      Polygon clean;
      for (const Vec2& v : piece)
        if (clean.empty() || (v - clean.back()).norm2() > 1e-18)
          clean.push_back(v);
      while (clean.size() > 1 && (clean.front() - clean.back()).norm2() < 1e-18)
        clean.pop_back();
      if (clean.size() >= 3 && polygon_area(clean) > 1e-9)
        out_pieces.push_back(std::move(clean));
    }
    return true;
  };

  SplitPieces pieces;
  if (!extract(+1, bridge_left, pieces.left)) return std::nullopt;
  if (!extract(-1, bridge_right, pieces.right)) return std::nullopt;

  // Area conservation is the correctness certificate for the walk.
  double total = 0;
  for (const Polygon& p : pieces.left) total += polygon_area(p);
  for (const Polygon& p : pieces.right) total += polygon_area(p);
  double want = polygon_area(poly);
  if (want > 1e-9 && std::abs(total - want) > 1e-6 * want + 1e-9)
    return std::nullopt;
  return pieces;
}

}  // namespace

SplitPieces split_polygon(const Polygon& poly, Vec2 point, Vec2 dir) {
  SplitPieces fallback;
  if (poly.size() < 3) return fallback;
  Polygon work = poly;
  if (!is_ccw(work)) std::reverse(work.begin(), work.end());
  Vec2 d = dir.normalized();
  if (d.norm2() < 0.5) {
    fallback.left.push_back(work);
    return fallback;
  }
  auto [mn, mx] = polygon_bounds(work);
  double scale = std::max(mx.x - mn.x, mx.y - mn.y);
  double eps = 1e-9 * std::max(scale, 1.0);
  for (int attempt = 0; attempt < 6; ++attempt) {
    Vec2 p = point + d.perp() * (eps * 7.0 * attempt);
    if (auto res = try_split(work, p, d, eps)) return *res;
  }
  // Unsplittable without losing area: report the whole polygon unsplit.
  fallback.left.push_back(work);
  return fallback;
}

}  // namespace synthcity
