#include "faces.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>

namespace synthcity::detail {

namespace {

// Half-edge 2i runs a->b of edge i, half-edge 2i+1 runs b->a.
int he_origin(const RoadGraph& g, int h) {
  const RoadEdge& e = g.edges[static_cast<size_t>(h) / 2];
  return (h & 1) == 0 ? e.a : e.b;
}

int he_head(const RoadGraph& g, int h) { return he_origin(g, h ^ 1); }

bool edge_degenerate(const RoadGraph& g, const RoadEdge& e) {
  if (e.a == e.b) return true;
  return (g.nodes[static_cast<size_t>(e.a)] -
          g.nodes[static_cast<size_t>(e.b)])
             .norm() < 1e-9;
}

}  // namespace

std::vector<FaceLoop> extract_faces(const RoadGraph& graph) {
  const int he_count = static_cast<int>(graph.edges.size()) * 2;
  std::vector<std::vector<int>> ring(graph.nodes.size());
  std::vector<char> active(static_cast<size_t>(he_count), 0);
  for (int h = 0; h < he_count; ++h) {
    if (edge_degenerate(graph, graph.edges[static_cast<size_t>(h) / 2]))
      continue;
    active[static_cast<size_t>(h)] = 1;
    ring[static_cast<size_t>(he_origin(graph, h))].push_back(h);
  }

  // Sort the outgoing half-edges of every node counter-clockwise. The id
  // tie-break keeps duplicate edges in a stable (if arbitrary) order.
  std::vector<double> angle(static_cast<size_t>(he_count), 0.0);
  for (int h = 0; h < he_count; ++h) {
    if (!active[static_cast<size_t>(h)]) continue;
    Vec2 d = graph.nodes[static_cast<size_t>(he_head(graph, h))] -
             graph.nodes[static_cast<size_t>(he_origin(graph, h))];
    angle[static_cast<size_t>(h)] = std::atan2(d.y, d.x);
  }
  std::vector<int> pos(static_cast<size_t>(he_count), -1);
  for (auto& r : ring) {
    std::sort(r.begin(), r.end(), [&](int lhs, int rhs) {
      double al = angle[static_cast<size_t>(lhs)];
      double ar = angle[static_cast<size_t>(rhs)];
      if (al != ar) return al < ar;
      return lhs < rhs;
    });
    for (size_t k = 0; k < r.size(); ++k)
      pos[static_cast<size_t>(r[k])] = static_cast<int>(k);
  }

  // next(h): the half-edge clockwise-adjacent to twin(h) around head(h).
  // Walking it keeps the face on the left, so interior faces come out CCW.
  auto next_he = [&](int h) {
    int r = h ^ 1;
    const auto& out = ring[static_cast<size_t>(he_origin(graph, r))];
    int k = pos[static_cast<size_t>(r)];
    int n = static_cast<int>(out.size());
    return out[static_cast<size_t>((k + n - 1) % n)];
  };

  std::vector<FaceLoop> faces;
  std::vector<char> visited(static_cast<size_t>(he_count), 0);
  for (int start = 0; start < he_count; ++start) {
    if (!active[static_cast<size_t>(start)] ||
        visited[static_cast<size_t>(start)])
      continue;
    FaceLoop face;
    int h = start;
    int guard = he_count + 1;
    do {
      visited[static_cast<size_t>(h)] = 1;
      face.nodes.push_back(he_origin(graph, h));
      h = next_he(h);
    } while (h != start && --guard > 0);
    double acc = 0.0;
    for (size_t i = 0; i < face.nodes.size(); ++i) {
      const Vec2& p = graph.nodes[static_cast<size_t>(face.nodes[i])];
      const Vec2& q = graph.nodes[static_cast<size_t>(
          face.nodes[(i + 1) % face.nodes.size()])];
      acc += p.x * q.y - q.x * p.y;
    }
    face.signed_area = 0.5 * acc;
    faces.push_back(std::move(face));
  }
  return faces;
}

std::vector<int> strip_spurs(const std::vector<int>& loop) {
  std::vector<int> out = loop;
  bool changed = true;
  while (changed && out.size() >= 2) {
    changed = false;
    const int n = static_cast<int>(out.size());
    for (int i = 0; i < n; ++i) {
      int prev = out[static_cast<size_t>((i + n - 1) % n)];
      int next = out[static_cast<size_t>((i + 1) % n)];
      if (prev == next || out[static_cast<size_t>(i)] == next) {
        // Spur tip (a b a) or stutter (b b): drop this element and, for a
        // spur, the duplicate neighbour after it.
        int j = (i + 1) % n;
        if (prev == next && out[static_cast<size_t>(i)] != next) {
          if (j > i) {
            out.erase(out.begin() + j);
            out.erase(out.begin() + i);
          } else {
            out.erase(out.begin() + i);
            out.erase(out.begin() + j);
          }
        } else {
          out.erase(out.begin() + i);
        }
        changed = true;
        break;
      }
    }
  }
  if (out.size() < 3) return {};
  return out;
}

std::vector<FaceBlock> face_blocks(const RoadGraph& graph) {
  std::map<std::pair<int, int>, double> half_width;
  for (const RoadEdge& e : graph.edges) {
    auto key = std::minmax(e.a, e.b);
    auto [it, inserted] = half_width.try_emplace(key, e.width_m / 2.0);
    if (!inserted) it->second = std::max(it->second, e.width_m / 2.0);
  }

  std::vector<FaceBlock> out;
  for (const FaceLoop& face : extract_faces(graph)) {
    if (face.signed_area <= 1e-7) continue;
    std::vector<int> cycle = strip_spurs(face.nodes);
    if (cycle.size() < 3) continue;

    Polygon poly;
    poly.reserve(cycle.size());
    std::vector<double> spans;
    spans.reserve(cycle.size());
    for (size_t i = 0; i < cycle.size(); ++i) {
      poly.push_back(graph.nodes[static_cast<size_t>(cycle[i])]);
      auto key = std::minmax(cycle[i], cycle[(i + 1) % cycle.size()]);
      auto it = half_width.find(key);
      spans.push_back(it != half_width.end() ? it->second : 0.0);
    }
    if (signed_area(poly) <= 1e-7 || !is_simple(poly)) continue;

    FaceBlock fb;
    fb.inset = offset_inward(poly, std::span<const double>(spans));
    fb.face = std::move(poly);
    out.push_back(std::move(fb));
  }
  return out;
}

std::optional<std::pair<int, int>> find_crossing(const RoadGraph& graph) {
  struct Span {
    int idx;
    double min_x, max_x;
  };
  std::vector<Span> spans;
  spans.reserve(graph.edges.size());
  for (int i = 0; i < static_cast<int>(graph.edges.size()); ++i) {
    const RoadEdge& e = graph.edges[static_cast<size_t>(i)];
    if (edge_degenerate(graph, e)) continue;
    const Vec2& p = graph.nodes[static_cast<size_t>(e.a)];
    const Vec2& q = graph.nodes[static_cast<size_t>(e.b)];
    spans.push_back({i, std::min(p.x, q.x), std::max(p.x, q.x)});
  }
  std::sort(spans.begin(), spans.end(),
            [](const Span& l, const Span& r) { return l.min_x < r.min_x; });

  auto side = [](const Vec2& a, const Vec2& b, const Vec2& p) {
    double c = (b - a).cross(p - a);
    double scale = (b - a).norm() * ((p - a).norm() + 1e-300);
    if (std::abs(c) <= 1e-9 * std::max(scale, 1e-12)) return 0;
    return c > 0 ? 1 : -1;
  };
  auto on_segment = [](const Vec2& a, const Vec2& b, const Vec2& p) {
    return std::min(a.x, b.x) - 1e-9 <= p.x && p.x <= std::max(a.x, b.x) + 1e-9 &&
           std::min(a.y, b.y) - 1e-9 <= p.y && p.y <= std::max(a.y, b.y) + 1e-9;
  };
  // Any geometric contact between edges that do not share a node index
  // violates the planar-subdivision invariant (crossings, T-touches, and
  // coincident duplicate nodes alike).
  auto touches = [&](const Vec2& a, const Vec2& b, const Vec2& c,
                     const Vec2& d) {
    int d1 = side(c, d, a), d2 = side(c, d, b);
    int d3 = side(a, b, c), d4 = side(a, b, d);
    if (d1 * d2 < 0 && d3 * d4 < 0) return true;
    if (d1 == 0 && on_segment(c, d, a)) return true;
    if (d2 == 0 && on_segment(c, d, b)) return true;
    if (d3 == 0 && on_segment(a, b, c)) return true;
    if (d4 == 0 && on_segment(a, b, d)) return true;
    return false;
  };

  for (size_t i = 0; i < spans.size(); ++i) {
    const RoadEdge& ei = graph.edges[static_cast<size_t>(spans[i].idx)];
    const Vec2& a = graph.nodes[static_cast<size_t>(ei.a)];
    const Vec2& b = graph.nodes[static_cast<size_t>(ei.b)];
    for (size_t j = i + 1;
         j < spans.size() && spans[j].min_x <= spans[i].max_x + 1e-9; ++j) {
      const RoadEdge& ej = graph.edges[static_cast<size_t>(spans[j].idx)];
      const Vec2& c = graph.nodes[static_cast<size_t>(ej.a)];
      const Vec2& d = graph.nodes[static_cast<size_t>(ej.b)];
      int lo = std::min(spans[i].idx, spans[j].idx);
      int hi = std::max(spans[i].idx, spans[j].idx);
      int shared = -1;
      if (ei.a == ej.a || ei.a == ej.b) shared = ei.a;
      if (ei.b == ej.a || ei.b == ej.b) {
        if (shared >= 0) return std::make_pair(lo, hi);  // same node pair
        shared = ei.b;
      }
      if (shared >= 0) {
        // Edges meeting at a node may not overlap along a common direction.
        const Vec2& u = graph.nodes[static_cast<size_t>(shared)];
        Vec2 p = (ei.a == shared) ? b : a;
        Vec2 q = (ej.a == shared) ? d : c;
        double cr = (p - u).cross(q - u);
        double sc = (p - u).norm() * (q - u).norm();
        if (std::abs(cr) <= 1e-9 * std::max(sc, 1e-12) &&
            (p - u).dot(q - u) > 0.0)
          return std::make_pair(lo, hi);
        continue;
      }
      if (touches(a, b, c, d)) return std::make_pair(lo, hi);
    }
  }
  return std::nullopt;
}

}  // namespace synthcity::detail
