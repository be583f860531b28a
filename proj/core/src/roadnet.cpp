#include "synthcity/roadnet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <span>
#include <utility>

#include "faces.hpp"
#include "synthcity/errors.hpp"
#include "synthcity/rng.hpp"

namespace synthcity {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double a) {
  while (a > std::numbers::pi) a -= kTwoPi;
  while (a < -std::numbers::pi) a += kTwoPi;
  return a;
}

struct GenParams {
  double w = 0.0;
  double h = 0.0;
  double spacing = 0.0;
  double jitter = 0.0;
  int rings = 0;
  int spokes = 8;
  bool boundary_loop = false;
  double arterial_w = 12.0;
  double local_w = 6.0;
};

void add_edge_unique(RoadGraph& g, std::set<std::pair<int, int>>& seen, int a,
                     int b, double width, RoadClass cls) {
  if (a == b) return;
  auto key = std::minmax(a, b);
  if (!seen.insert(key).second) return;
  g.edges.push_back({a, b, width, cls});
}

// ---------------------------------------------------------------------------
// Raster lattice: (nx+1) x (ny+1) nodes. Boundary nodes jitter only along
// their boundary so the lattice keeps tiling the extent exactly.
RoadGraph gen_raster(const GenParams& p, Rng& rng) {
  if (std::min(p.w, p.h) < p.spacing)
    throw Error(Errc::empty_network,
                "EmptyNetwork: extent smaller than one spacing interval");
  int nx = std::max(1, static_cast<int>(std::llround(p.w / p.spacing)));
  int ny = std::max(1, static_cast<int>(std::llround(p.h / p.spacing)));
  double cw = p.w / nx;
  double ch = p.h / ny;

  RoadGraph g;
  g.extent_x = p.w;
  g.extent_y = p.h;
  g.nodes.reserve(static_cast<size_t>((nx + 1) * (ny + 1)));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      // Two draws per node regardless of position, so the stream does not
      // depend on which jitter components apply.
      double dx = rng.uniform(-p.jitter, p.jitter) * cw;
      double dy = rng.uniform(-p.jitter, p.jitter) * ch;
      bool edge_x = (i == 0 || i == nx);
      bool edge_y = (j == 0 || j == ny);
      if (edge_x) dx = 0.0;
      if (edge_y) dy = 0.0;
      g.nodes.push_back({i * cw + dx, j * ch + dy});
    }
  }

  auto idx = [nx](int i, int j) { return j * (nx + 1) + i; };
  auto line_arterial = [](int k, int n) { return k % 3 == 0 || k == n; };
  std::set<std::pair<int, int>> seen;
  for (int j = 0; j <= ny; ++j) {
    bool art = line_arterial(j, ny);
    for (int i = 0; i < nx; ++i)
      add_edge_unique(g, seen, idx(i, j), idx(i + 1, j),
                      art ? p.arterial_w : p.local_w,
                      art ? RoadClass::arterial : RoadClass::local);
  }
  for (int i = 0; i <= nx; ++i) {
    bool art = line_arterial(i, nx);
    for (int j = 0; j < ny; ++j)
      add_edge_unique(g, seen, idx(i, j), idx(i, j + 1),
                      art ? p.arterial_w : p.local_w,
                      art ? RoadClass::arterial : RoadClass::local);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Boundary ring road helpers (shared by radial and organic).

double perimeter_t(const GenParams& p, Vec2 q) {
  // Arc length along the extent rectangle, starting at (0,0) and walking
  // counter-clockwise.
  const double eps = 1e-6;
  if (std::abs(q.y) < eps) return q.x;
  if (std::abs(q.x - p.w) < eps) return p.w + q.y;
  if (std::abs(q.y - p.h) < eps) return p.w + p.h + (p.w - q.x);
  return 2.0 * p.w + p.h + (p.h - q.y);
}

// Connect the given on-boundary nodes plus the four extent corners into a
// ring of arterial edges.
void close_boundary_loop(RoadGraph& g, const GenParams& p,
                         std::vector<int> border_nodes,
                         std::set<std::pair<int, int>>& seen) {
  auto find_corner = [&](Vec2 c) {
    for (int n : border_nodes)
      if ((g.nodes[static_cast<size_t>(n)] - c).norm() < 1e-6) return n;
    g.nodes.push_back(c);
    int id = static_cast<int>(g.nodes.size()) - 1;
    border_nodes.push_back(id);
    return id;
  };
  find_corner({0.0, 0.0});
  find_corner({p.w, 0.0});
  find_corner({p.w, p.h});
  find_corner({0.0, p.h});

  std::sort(border_nodes.begin(), border_nodes.end(), [&](int a, int b) {
    return perimeter_t(p, g.nodes[static_cast<size_t>(a)]) <
           perimeter_t(p, g.nodes[static_cast<size_t>(b)]);
  });
  for (size_t k = 0; k < border_nodes.size(); ++k) {
    int a = border_nodes[k];
    int b = border_nodes[(k + 1) % border_nodes.size()];
    if ((g.nodes[static_cast<size_t>(a)] - g.nodes[static_cast<size_t>(b)])
            .norm() < 1e-9)
      continue;
    add_edge_unique(g, seen, a, b, p.arterial_w, RoadClass::arterial);
  }
}

// Intersection of the ray origin + t*dir (t > 0) with the extent rectangle.
Vec2 ray_to_border(const GenParams& p, Vec2 origin, Vec2 dir) {
  double best = std::numeric_limits<double>::infinity();
  if (dir.x > 1e-12) best = std::min(best, (p.w - origin.x) / dir.x);
  if (dir.x < -1e-12) best = std::min(best, (0.0 - origin.x) / dir.x);
  if (dir.y > 1e-12) best = std::min(best, (p.h - origin.y) / dir.y);
  if (dir.y < -1e-12) best = std::min(best, (0.0 - origin.y) / dir.y);
  Vec2 q = origin + dir * best;
  q.x = std::clamp(q.x, 0.0, p.w);
  q.y = std::clamp(q.y, 0.0, p.h);
  return q;
}

// ---------------------------------------------------------------------------
// Radial web: concentric ring roads crossed by straight spokes.
RoadGraph gen_radial(const GenParams& p, Rng& rng) {
  if (std::min(p.w, p.h) < p.spacing)
    throw Error(Errc::empty_network,
                "EmptyNetwork: extent smaller than one spacing interval");
  double half = std::min(p.w, p.h) / 2.0;
  int rings = p.rings;
  if (rings <= 0) rings = static_cast<int>(std::floor(half / p.spacing));
  if (rings < 1)
    throw Error(Errc::empty_network,
                "EmptyNetwork: no ring fits inside the extent");
  if (rings * p.spacing > half + 1e-9)
    throw Error(Errc::invalid_argument,
                "radial rings exceed the extent half-width");
  int spokes = p.spokes;

  RoadGraph g;
  g.extent_x = p.w;
  g.extent_y = p.h;
  Vec2 center{p.w / 2.0, p.h / 2.0};
  g.nodes.push_back(center);
  auto node_id = [spokes](int k, int s) { return 1 + (k - 1) * spokes + s; };

  for (int k = 1; k <= rings; ++k) {
    for (int s = 0; s < spokes; ++s) {
      double da = rng.uniform(-0.4, 0.4) * p.jitter * (kTwoPi / spokes);
      double dr = rng.uniform(-0.5, 0.5) * p.jitter * p.spacing;
      double ang = kTwoPi * s / spokes + da;
      double rad = std::min(k * p.spacing + dr, half);
      g.nodes.push_back(center + Vec2{std::cos(ang), std::sin(ang)} * rad);
    }
  }

  std::set<std::pair<int, int>> seen;
  for (int s = 0; s < spokes; ++s)
    add_edge_unique(g, seen, 0, node_id(1, s), p.arterial_w,
                    RoadClass::arterial);
  for (int k = 1; k < rings; ++k)
    for (int s = 0; s < spokes; ++s)
      add_edge_unique(g, seen, node_id(k, s), node_id(k + 1, s), p.arterial_w,
                      RoadClass::arterial);
  for (int k = 1; k <= rings; ++k) {
    bool outer = (k == rings);
    for (int s = 0; s < spokes; ++s)
      add_edge_unique(g, seen, node_id(k, s), node_id(k, (s + 1) % spokes),
                      outer ? p.arterial_w : p.local_w,
                      outer ? RoadClass::arterial : RoadClass::local);
  }

  if (p.boundary_loop) {
    std::vector<int> border;
    for (int s = 0; s < spokes; ++s) {
      int outer_node = node_id(rings, s);
      Vec2 q = g.nodes[static_cast<size_t>(outer_node)];
      Vec2 dir = (q - center).normalized();
      Vec2 hit = ray_to_border(p, q, dir);
      if ((hit - q).norm() < 1e-9) {
        border.push_back(outer_node);
        continue;
      }
      g.nodes.push_back(hit);
      int hit_id = static_cast<int>(g.nodes.size()) - 1;
      add_edge_unique(g, seen, outer_node, hit_id, p.arterial_w,
                      RoadClass::arterial);
      border.push_back(hit_id);
    }
    close_boundary_loop(g, p, std::move(border), seen);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Organic growth: streets advance step by step through a smooth direction
// field, snapping to whatever they run into. Everything is checked against
// the existing edges, so the result is planar by construction.

struct OrganicState {
  RoadGraph g;
  std::set<std::pair<int, int>> seen;
  const GenParams& p;
  uint64_t field_seed;

  explicit OrganicState(const GenParams& params, uint64_t fs)
      : p(params), field_seed(fs) {}

  double lattice_angle(int64_t ix, int64_t iy) const {
    uint64_t h = hash_combine(field_seed, static_cast<uint64_t>(ix) * 0x9e3779b97f4a7c15ull ^
                                              static_cast<uint64_t>(iy));
    return kTwoPi * ((h >> 11) * 0x1.0p-53);
  }

  // Direction field: bilinear blend of unit vectors on a coarse lattice.
  double field(Vec2 q) const {
    double cell = 4.0 * p.spacing;
    double fx = q.x / cell, fy = q.y / cell;
    auto ix = static_cast<int64_t>(std::floor(fx));
    auto iy = static_cast<int64_t>(std::floor(fy));
    double tx = fx - ix, ty = fy - iy;
    Vec2 acc{0, 0};
    for (int dy = 0; dy <= 1; ++dy) {
      for (int dx = 0; dx <= 1; ++dx) {
        double a = lattice_angle(ix + dx, iy + dy);
        double wgt = (dx ? tx : 1 - tx) * (dy ? ty : 1 - ty);
        acc += Vec2{std::cos(a), std::sin(a)} * wgt;
      }
    }
    if (acc.norm() < 1e-9) return 0.0;
    return std::atan2(acc.y, acc.x);
  }

  int nearest_node(Vec2 q, double radius, int exclude) const {
    int best = -1;
    double best_d2 = radius * radius;
    for (int i = 0; i < static_cast<int>(g.nodes.size()); ++i) {
      if (i == exclude) continue;
      double d2 = (g.nodes[static_cast<size_t>(i)] - q).norm2();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = i;
      }
    }
    return best;
  }

  // Nearest edge whose projection of q falls well inside the segment.
  struct EdgeHit {
    int edge = -1;
    Vec2 point;
  };
  EdgeHit nearest_edge(Vec2 q, double radius, int exclude_node) const {
    EdgeHit hit;
    double best_d2 = radius * radius;
    for (int e = 0; e < static_cast<int>(g.edges.size()); ++e) {
      const RoadEdge& ed = g.edges[static_cast<size_t>(e)];
      if (ed.a == exclude_node || ed.b == exclude_node) continue;
      Vec2 a = g.nodes[static_cast<size_t>(ed.a)];
      Vec2 b = g.nodes[static_cast<size_t>(ed.b)];
      Vec2 closest;
      double d2 = point_segment_dist2(q, a, b, &closest);
      if (d2 >= best_d2) continue;
      double len = (b - a).norm();
      double t = len > 0 ? (closest - a).dot((b - a).normalized()) / len : 0.0;
      if (t < 0.08 || t > 0.92) continue;
      best_d2 = d2;
      hit = {e, closest};
    }
    return hit;
  }

  // Earliest crossing of segment (a, b) with an edge not incident to
  // from_node or to_node; returns edge index and the crossing point.
  // Excluding to_node matters when b is an existing node: the segment ends
  // exactly on that node's edges, which is a touch, not a crossing.
  EdgeHit first_crossing(Vec2 a, Vec2 b, int from_node,
                         int to_node = -1) const {
    EdgeHit hit;
    double best_t = std::numeric_limits<double>::infinity();
    for (int e = 0; e < static_cast<int>(g.edges.size()); ++e) {
      const RoadEdge& ed = g.edges[static_cast<size_t>(e)];
      if (ed.a == from_node || ed.b == from_node) continue;
      if (ed.a == to_node || ed.b == to_node) continue;
      Vec2 c = g.nodes[static_cast<size_t>(ed.a)];
      Vec2 d = g.nodes[static_cast<size_t>(ed.b)];
      auto x = segment_intersection(a, b, c, d);
      if (!x) continue;
      double t = (b - a).norm2() > 0 ? (*x - a).dot(b - a) / (b - a).norm2()
                                     : 0.0;
      if (t < 1e-9 || t >= best_t) continue;
      best_t = t;
      hit = {e, *x};
    }
    return hit;
  }

  // A new segment leaving `node` must keep a minimum angle to the segments
  // already attached there, otherwise faces degenerate into slivers.
  bool direction_clear(int node, Vec2 toward) const {
    Vec2 p0 = g.nodes[static_cast<size_t>(node)];
    Vec2 d = (toward - p0).normalized();
    for (const RoadEdge& ed : g.edges) {
      int other = -1;
      if (ed.a == node) other = ed.b;
      if (ed.b == node) other = ed.a;
      if (other < 0) continue;
      Vec2 nd = (g.nodes[static_cast<size_t>(other)] - p0).normalized();
      if (d.dot(nd) > std::cos(0.30)) return false;
    }
    return true;
  }

  int add_node(Vec2 q) {
    g.nodes.push_back(q);
    return static_cast<int>(g.nodes.size()) - 1;
  }

  // Split edge e at point q: e keeps (a, q), a new edge carries (q, b).
  int split_edge(int e, Vec2 q) {
    RoadEdge& ed = g.edges[static_cast<size_t>(e)];
    Vec2 a = g.nodes[static_cast<size_t>(ed.a)];
    Vec2 b = g.nodes[static_cast<size_t>(ed.b)];
    if ((q - a).norm() < 1e-9) return ed.a;
    if ((q - b).norm() < 1e-9) return ed.b;
    int mid = add_node(q);
    int old_b = ed.b;
    seen.erase(std::minmax(ed.a, ed.b));
    ed.b = mid;
    seen.insert(std::minmax(ed.a, mid));
    add_edge_unique(g, seen, mid, old_b, ed.width_m, ed.cls);
    return mid;
  }

  bool connect(int a, int b, bool arterial) {
    if (a == b) return false;
    Vec2 pa = g.nodes[static_cast<size_t>(a)];
    Vec2 pb = g.nodes[static_cast<size_t>(b)];
    if ((pa - pb).norm() < 1e-9) return false;
    if (!direction_clear(a, pb) || !direction_clear(b, pa)) return false;
    if (first_crossing(pa, pb, a, b).edge >= 0) return false;
    add_edge_unique(g, seen, a, b, arterial ? p.arterial_w : p.local_w,
                    arterial ? RoadClass::arterial : RoadClass::local);
    return true;
  }
};

RoadGraph gen_organic(const GenParams& p, Rng& rng) {
  if (std::min(p.w, p.h) < p.spacing)
    throw Error(Errc::empty_network,
                "EmptyNetwork: extent smaller than one spacing interval");

  OrganicState st(p, rng.next());
  st.g.extent_x = p.w;
  st.g.extent_y = p.h;

  if (p.boundary_loop) {
    st.add_node({0.0, 0.0});
    st.add_node({p.w, 0.0});
    st.add_node({p.w, p.h});
    st.add_node({0.0, p.h});
    for (int k = 0; k < 4; ++k)
      add_edge_unique(st.g, st.seen, k, (k + 1) % 4, p.arterial_w,
                      RoadClass::arterial);
  }

  struct Item {
    int node;
    double dir;
    int depth;
  };
  std::deque<Item> queue;
  Vec2 center{p.w / 2.0, p.h / 2.0};
  int root = st.add_node(center);
  double base = st.field(center);
  for (int k = 0; k < 3; ++k)
    queue.push_back({root, base + k * kTwoPi / 3.0, 0});

  const double snap_r = 0.25 * p.spacing;
  const int max_edges =
      static_cast<int>(std::ceil(2.5 * p.w * p.h / (p.spacing * p.spacing))) +
      16;
  int safety = max_edges * 12;

  while (!queue.empty() && static_cast<int>(st.g.edges.size()) < max_edges &&
         --safety > 0) {
    Item it = queue.front();
    queue.pop_front();
    Vec2 pos = st.g.nodes[static_cast<size_t>(it.node)];

    // Fixed number of draws per step keeps the stream stable across the
    // different outcomes below.
    double u_ang = rng.uniform(-0.25, 0.25);
    double u_len = rng.uniform(0.85, 1.15);
    double u_b1 = rng.uniform();
    double u_b2 = rng.uniform();

    double steer = wrap_angle(st.field(pos) - it.dir);
    double heading =
        it.dir + std::clamp(steer, -0.6, 0.6) * 0.35 + u_ang * (0.3 + p.jitter);
    double len = p.spacing * u_len;
    Vec2 target = pos + Vec2{std::cos(heading), std::sin(heading)} * len;
    bool arterial = it.depth <= 1;

    if (target.x < 0.0 || target.x > p.w || target.y < 0.0 ||
        target.y > p.h) {
      if (!p.boundary_loop) continue;
      Vec2 hit = ray_to_border(p, pos, {std::cos(heading), std::sin(heading)});
      if ((hit - pos).norm() < 0.25 * p.spacing) continue;
      int near = st.nearest_node(hit, snap_r, it.node);
      if (near >= 0) {
        st.connect(it.node, near, arterial);
        continue;
      }
      auto eh = st.nearest_edge(hit, snap_r, it.node);
      if (eh.edge >= 0) {
        int mid = st.split_edge(eh.edge, eh.point);
        st.connect(it.node, mid, arterial);
      }
      continue;
    }

    int near = st.nearest_node(target, snap_r, it.node);
    if (near >= 0) {
      st.connect(it.node, near, arterial);
      continue;
    }
    auto eh = st.nearest_edge(target, snap_r, it.node);
    if (eh.edge >= 0) {
      int mid = st.split_edge(eh.edge, eh.point);
      st.connect(it.node, mid, arterial);
      continue;
    }
    auto cross_hit = st.first_crossing(pos, target, it.node);
    if (cross_hit.edge >= 0) {
      int mid = st.split_edge(cross_hit.edge, cross_hit.point);
      st.connect(it.node, mid, arterial);
      continue;
    }

    if (!st.direction_clear(it.node, target)) continue;
    int next = st.add_node(target);
    add_edge_unique(st.g, st.seen, it.node, next,
                    arterial ? p.arterial_w : p.local_w,
                    arterial ? RoadClass::arterial : RoadClass::local);
    queue.push_back({next, heading, it.depth + 1});
    if (u_b1 < 0.38)
      queue.push_back({next, heading + kTwoPi / 4.0, it.depth + 1});
    if (u_b2 < 0.38)
      queue.push_back({next, heading - kTwoPi / 4.0, it.depth + 1});
  }
  return st.g;
}

RoadGraph gen_single(Topology topo, const GenParams& p, Rng& rng) {
  switch (topo) {
    case Topology::raster:
      return gen_raster(p, rng);
    case Topology::radial:
      return gen_radial(p, rng);
    case Topology::organic:
      return gen_organic(p, rng);
  }
  throw Error(Errc::invalid_argument, "unknown topology");
}

// ---------------------------------------------------------------------------
// District strips for topology combinations: the extent is divided along its
// longer axis, each strip generated independently, and the strips stitched
// back together along shared seam chains.

void drop_unused_nodes(RoadGraph& g) {
  std::vector<int> remap(g.nodes.size(), -1);
  for (const RoadEdge& e : g.edges) {
    remap[static_cast<size_t>(e.a)] = 0;
    remap[static_cast<size_t>(e.b)] = 0;
  }
  std::vector<Vec2> kept;
  kept.reserve(g.nodes.size());
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    if (remap[i] == 0) {
      remap[i] = static_cast<int>(kept.size());
      kept.push_back(g.nodes[i]);
    }
  }
  for (RoadEdge& e : g.edges) {
    e.a = remap[static_cast<size_t>(e.a)];
    e.b = remap[static_cast<size_t>(e.b)];
  }
  g.nodes = std::move(kept);
}

RoadGraph gen_combined(const RoadConfig& cfg, const GenParams& base) {
  const bool along_x = cfg.extent_x >= cfg.extent_y;
  const double axis_len = along_x ? cfg.extent_x : cfg.extent_y;
  double total_w = 0.0;
  for (const auto& [topo, wgt] : cfg.topology) total_w += wgt;

  std::vector<double> cuts{0.0};
  double acc = 0.0;
  for (size_t i = 0; i < cfg.topology.size(); ++i) {
    acc += cfg.topology[i].second;
    cuts.push_back(axis_len * (acc / total_w));
  }
  cuts.back() = axis_len;  // absorb rounding

  RoadGraph out;
  out.extent_x = cfg.extent_x;
  out.extent_y = cfg.extent_y;
  std::set<std::pair<int, int>> seen;

  for (size_t i = 0; i < cfg.topology.size(); ++i) {
    double span = cuts[i + 1] - cuts[i];
    if (span < cfg.spacing_m)
      throw Error(Errc::empty_network,
                  "EmptyNetwork: district strip narrower than the spacing");
    GenParams p = base;
    p.w = along_x ? span : cfg.extent_x;
    p.h = along_x ? cfg.extent_y : span;
    Rng rng(hash_combine(cfg.seed, static_cast<uint64_t>(i) + 1));
    RoadGraph part = gen_single(cfg.topology[i].first, p, rng);
    int off = static_cast<int>(out.nodes.size());
    Vec2 shift = along_x ? Vec2{cuts[i], 0.0} : Vec2{0.0, cuts[i]};
    for (Vec2 n : part.nodes) out.nodes.push_back(n + shift);
    for (const RoadEdge& e : part.edges)
      add_edge_unique(out, seen, e.a + off, e.b + off, e.width_m, e.cls);
  }

  auto coord = [&](int n) {
    const Vec2& q = out.nodes[static_cast<size_t>(n)];
    return along_x ? q.x : q.y;
  };
  auto other_coord = [&](int n) {
    const Vec2& q = out.nodes[static_cast<size_t>(n)];
    return along_x ? q.y : q.x;
  };

  const double tol = 1e-6;
  for (size_t s = 1; s + 1 < cuts.size(); ++s) {
    double seam = cuts[s];
    // Drop edges running along the seam; the merged chain replaces them.
    std::erase_if(out.edges, [&](const RoadEdge& e) {
      bool on = std::abs(coord(e.a) - seam) < tol &&
                std::abs(coord(e.b) - seam) < tol;
      if (on) seen.erase(std::minmax(e.a, e.b));
      return on;
    });

    std::vector<int> chain;
    for (int n = 0; n < static_cast<int>(out.nodes.size()); ++n)
      if (std::abs(coord(n) - seam) < tol) chain.push_back(n);
    std::sort(chain.begin(), chain.end(),
              [&](int a, int b) { return other_coord(a) < other_coord(b); });

    // Merge coincident nodes contributed by both sides of the seam.
    std::vector<int> remap(out.nodes.size());
    std::iota(remap.begin(), remap.end(), 0);
    std::vector<int> merged;
    for (int n : chain) {
      if (!merged.empty() &&
          std::abs(other_coord(merged.back()) - other_coord(n)) < 1e-6) {
        remap[static_cast<size_t>(n)] = merged.back();
        continue;
      }
      merged.push_back(n);
    }
    std::vector<RoadEdge> rewritten;
    rewritten.reserve(out.edges.size());
    seen.clear();
    for (RoadEdge e : out.edges) {
      e.a = remap[static_cast<size_t>(e.a)];
      e.b = remap[static_cast<size_t>(e.b)];
      if (e.a == e.b) continue;
      if (!seen.insert(std::minmax(e.a, e.b)).second) continue;
      rewritten.push_back(e);
    }
    out.edges = std::move(rewritten);

    for (size_t k = 0; k + 1 < merged.size(); ++k)
      add_edge_unique(out, seen, merged[k], merged[k + 1],
                      base.arterial_w, RoadClass::arterial);
  }

  drop_unused_nodes(out);
  return out;
}

}  // namespace

const char* topology_name(Topology t) {
  switch (t) {
    case Topology::raster:
      return "raster";
    case Topology::radial:
      return "radial";
    case Topology::organic:
      return "organic";
  }
  return "unknown";
}

std::optional<Topology> topology_from_name(std::string_view name) {
  if (name == "raster") return Topology::raster;
  if (name == "radial") return Topology::radial;
  if (name == "organic") return Topology::organic;
  return std::nullopt;
}

void RoadConfig::validate() const {
  if (extent_x <= 0.0 || extent_y <= 0.0)
    throw Error(Errc::invalid_argument, "extent must be positive");
  if (spacing_m <= 0.0)
    throw Error(Errc::invalid_argument, "spacing must be positive");
  if (!(jitter >= 0.0) || jitter >= 0.5)
    throw Error(Errc::invalid_argument, "jitter must lie in [0, 0.5)");
  if (topology.empty())
    throw Error(Errc::invalid_argument, "at least one topology is required");
  for (const auto& [topo, wgt] : topology) {
    (void)topo;
    if (!(wgt > 0.0))
      throw Error(Errc::non_positive_weight,
                  "topology weights must be positive");
  }
  if (spokes < 3) throw Error(Errc::invalid_argument, "spokes must be >= 3");
  if (rings < 0) throw Error(Errc::invalid_argument, "rings must be >= 0");
  if (arterial_width_m <= 0.0 || local_width_m <= 0.0)
    throw Error(Errc::invalid_argument, "road widths must be positive");
}

RoadGraph generate_roads(const RoadConfig& config) {
  config.validate();
  GenParams p;
  p.w = config.extent_x;
  p.h = config.extent_y;
  p.spacing = config.spacing_m;
  p.jitter = config.jitter;
  p.rings = config.rings;
  p.spokes = config.spokes;
  p.boundary_loop = config.boundary_loop;
  p.arterial_w = config.arterial_width_m;
  p.local_w = config.local_width_m;

  if (config.topology.size() == 1) {
    Rng rng(config.seed);
    return gen_single(config.topology.front().first, p, rng);
  }
  return gen_combined(config, p);
}

std::vector<CityBlock> extract_blocks(const RoadGraph& graph) {
  if (graph.nodes.empty() || graph.edges.empty()) return {};
  if (auto crossing = detail::find_crossing(graph)) {
    char buf[96];
    std::snprintf(buf, sizeof(buf),
                  "PlanarityViolation: edges %d and %d intersect",
                  crossing->first, crossing->second);
    throw Error(Errc::planarity_violation, buf);
  }

  std::vector<CityBlock> blocks;
  for (detail::FaceBlock& fb : detail::face_blocks(graph)) {
    if (!fb.inset) continue;
    blocks.push_back({std::move(*fb.inset), 0.0});
    blocks.back().area_m2 = polygon_area(blocks.back().boundary);
  }
  return blocks;
}

ValidationReport validate_graph(const RoadGraph& graph) {
  ValidationReport rep;
  rep.node_count = static_cast<int>(graph.nodes.size());
  rep.edge_count = static_cast<int>(graph.edges.size());

  std::set<std::pair<int, int>> seen;
  for (int i = 0; i < static_cast<int>(graph.edges.size()); ++i) {
    const RoadEdge& e = graph.edges[static_cast<size_t>(i)];
    auto key = std::minmax(e.a, e.b);
    if (!seen.insert(key).second) rep.duplicate_edges.push_back(key);
    if (e.a == e.b ||
        (graph.nodes[static_cast<size_t>(e.a)] -
         graph.nodes[static_cast<size_t>(e.b)])
                .norm() < 1e-9)
      rep.zero_length_edges.push_back(i);
  }

  const double tol = 1e-6;
  for (const Vec2& n : graph.nodes) {
    if (n.x < -tol || n.x > graph.extent_x + tol || n.y < -tol ||
        n.y > graph.extent_y + tol) {
      rep.nodes_in_extent = false;
      break;
    }
  }

  rep.crossing_edges = detail::find_crossing(graph);
  rep.planar = !rep.crossing_edges.has_value();

  // Connected components over all nodes (isolated nodes count).
  std::vector<int> parent(graph.nodes.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<size_t>(x)] != x) {
      parent[static_cast<size_t>(x)] =
          parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
      x = parent[static_cast<size_t>(x)];
    }
    return x;
  };
  for (const RoadEdge& e : graph.edges) {
    int ra = find(e.a), rb = find(e.b);
    if (ra != rb) parent[static_cast<size_t>(ra)] = rb;
  }
  std::map<int, std::pair<int, int>> comp;  // root -> (V, E)
  for (int n = 0; n < static_cast<int>(graph.nodes.size()); ++n)
    comp[find(n)].first++;
  for (const RoadEdge& e : graph.edges) comp[find(e.a)].second++;
  rep.component_count = static_cast<int>(comp.size());
  rep.connected = rep.component_count <= 1;

  if (rep.planar && !graph.nodes.empty()) {
    std::map<int, int> interior;  // root -> interior face count
    for (const detail::FaceLoop& f : detail::extract_faces(graph)) {
      rep.interior_face_count += f.signed_area > 1e-7 ? 1 : 0;
      if (f.signed_area > 1e-7) interior[find(f.nodes.front())]++;
    }
    // Euler characteristic per component: V - E + F = 2, counting interior
    // faces plus the one unbounded face.
    for (const auto& [root, ve] : comp) {
      int faces = 1 + (interior.count(root) ? interior.at(root) : 0);
      if (ve.first - ve.second + faces != 2) {
        rep.euler_ok = false;
        break;
      }
    }
  } else {
    rep.euler_ok = rep.planar;
  }
  return rep;
}

void write_debug_edges(std::ostream& os, const RoadGraph& graph) {
  char line[160];
  for (const RoadEdge& e : graph.edges) {
    const Vec2& a = graph.nodes[static_cast<size_t>(e.a)];
    const Vec2& b = graph.nodes[static_cast<size_t>(e.b)];
    std::snprintf(line, sizeof(line), "%.6f %.6f %.6f %.6f %.3f %s\n", a.x,
                  a.y, b.x, b.y, e.width_m,
                  e.cls == RoadClass::arterial ? "arterial" : "local");
    os << line;
  }
}

}  // namespace synthcity
