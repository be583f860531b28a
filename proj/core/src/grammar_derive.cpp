#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <variant>
#include <vector>

#include "synthcity/errors.hpp"
#include "synthcity/grammar.hpp"
#include "synthcity/rng.hpp"

namespace synthcity {

namespace {

// Scope variants carried by shapes during rewriting: a flat horizontal
// polygon (facing up or down), a vertical prism over a footprint, or an
// oriented rectangle in 3-D (a facade piece).
struct ScopePoly {
  Polygon poly;
  double z = 0.0;
  int facing = 1;  // +1 up, -1 down
};
struct ScopePrism {
  Polygon poly;
  double z0 = 0.0;
  double h = 0.0;
};
struct ScopeFace {
  Vec3 origin;
  Vec3 u;  // unit, along the face width
  Vec3 v;  // unit, along the face height
  double len_u = 0.0;
  double len_v = 0.0;
};
using Scope = std::variant<ScopePoly, ScopePrism, ScopeFace>;

struct ShapeTask {
  std::string symbol;
  Scope scope;
  uint16_t material = 0;
  int depth = 0;
};

Vec3 lift(Vec2 p, double z) { return {p.x, p.y, z}; }

class Deriver {
 public:
  Deriver(const GrammarProgram& program, uint64_t seed, const Palette* palette,
          uint32_t instance)
      : program_(program), seed_(seed), palette_(palette), instance_(instance) {}

  LabeledMesh run(const Polygon& lot) {
    program_.link_check();
    if (!program_.rules.count("Lot"))
      throw Error(Errc::empty_derivation,
                  "EmptyDerivation: the start symbol Lot has no rule");
    if (lot.size() < 3 || polygon_area(lot) <= 0.0 || !is_simple(lot))
      throw Error(Errc::invalid_argument,
                  "derive needs a simple lot polygon with positive area");
    Polygon start = lot;
    if (!is_ccw(start)) std::reverse(start.begin(), start.end());

    Rng attr_rng(hash_combine(seed_, hash_str(0, "attrs")));
    for (const AttrDecl& decl : program_.attrs) {
      if (decl.value.kind == Expr::Kind::attr_ref &&
          !attrs_.count(decl.value.name))
        throw Error(Errc::invalid_argument,
                    "attribute '" + decl.value.name +
                        "' referenced before its declaration");
      attrs_[decl.name] = eval_expr(decl.value, attr_rng);
    }

    std::vector<ShapeTask> stack;
    stack.push_back({"Lot", ScopePoly{std::move(start), 0.0, 1}, 0, 0});
    while (!stack.empty()) {
      ShapeTask task = std::move(stack.back());
      stack.pop_back();
      if (task.symbol == "NIL") continue;
      if (auto it = program_.terminals.find(task.symbol);
          it != program_.terminals.end()) {
        mesh_terminal(task.scope, it->second, task.material);
        continue;
      }
      apply_rule(std::move(task), stack);
    }
    return std::move(mesh_);
  }

 private:
  double eval_expr(const Expr& e, Rng& rng) {
    switch (e.kind) {
      case Expr::Kind::literal:
        return e.value;
      case Expr::Kind::attr_ref: {
        auto it = attrs_.find(e.name);
        if (it == attrs_.end())
          throw Error(Errc::undefined_symbol,
                      "UndefinedSymbol: attribute '" + e.name + "'");
        return it->second;
      }
      case Expr::Kind::random_range:
        return rng.uniform(e.lo, e.hi);
    }
    return 0.0;
  }

  uint16_t intern_color(double r, double g, double b) {
    auto clamp01 = [](double v) {
      return static_cast<float>(std::clamp(v, 0.0, 1.0));
    };
    Material m;
    char name[48];
    std::snprintf(name, sizeof(name), "rgb(%.4f,%.4f,%.4f)", r, g, b);
    m.name = name;
    m.rgb = {clamp01(r), clamp01(g), clamp01(b)};
    return mesh_.palette().intern(m);
  }

  uint16_t intern_texture(const std::string& name) {
    if (palette_) {
      int id = palette_->find(name);
      if (id >= 0)
        return mesh_.palette().intern(palette_->at(static_cast<uint16_t>(id)));
    }
    return mesh_.palette().intern(
        Material{name, {0.6f, 0.6f, 0.6f}, std::nullopt});
  }

  // -- meshing ------------------------------------------------------------

  void emit(const Vec3& a, const Vec3& b, const Vec3& c, SemanticClass cls,
            uint16_t mat) {
    mesh_.add_triangle(a, b, c, cls, mat, instance_);
  }

  void mesh_poly(const ScopePoly& s, SemanticClass cls, uint16_t mat) {
    for (const auto& tri : triangulate(s.poly)) {
      if (s.facing >= 0) {
        emit(lift(tri[0], s.z), lift(tri[1], s.z), lift(tri[2], s.z), cls,
             mat);
      } else {
        emit(lift(tri[2], s.z), lift(tri[1], s.z), lift(tri[0], s.z), cls,
             mat);
      }
    }
  }

  void mesh_wall(Vec2 p, Vec2 q, double z0, double z1, SemanticClass cls,
                 uint16_t mat) {
    Vec3 a = lift(p, z0), b = lift(q, z0), c = lift(q, z1), d = lift(p, z1);
    emit(a, b, c, cls, mat);
    emit(a, c, d, cls, mat);
  }

  void mesh_prism(const ScopePrism& s, std::optional<SemanticClass> override_cls,
                  uint16_t mat) {
    SemanticClass wall = override_cls.value_or(SemanticClass::Building);
    SemanticClass top = override_cls.value_or(SemanticClass::Roof);
    mesh_poly({s.poly, s.z0, -1}, wall, mat);
    mesh_poly({s.poly, s.z0 + s.h, 1}, top, mat);
    for (size_t i = 0; i < s.poly.size(); ++i)
      mesh_wall(s.poly[i], s.poly[(i + 1) % s.poly.size()], s.z0, s.z0 + s.h,
                wall, mat);
  }

  void mesh_face(const ScopeFace& s, SemanticClass cls, uint16_t mat) {
    Vec3 a = s.origin;
    Vec3 b = s.origin + s.u * s.len_u;
    Vec3 c = b + s.v * s.len_v;
    Vec3 d = s.origin + s.v * s.len_v;
    emit(a, b, c, cls, mat);
    emit(a, c, d, cls, mat);
  }

  void mesh_terminal(const Scope& scope, std::optional<SemanticClass> cls,
                     uint16_t mat) {
    if (const auto* p = std::get_if<ScopePoly>(&scope)) {
      mesh_poly(*p, cls.value_or(SemanticClass::Roof), mat);
    } else if (const auto* pr = std::get_if<ScopePrism>(&scope)) {
      mesh_prism(*pr, cls, mat);
    } else {
      mesh_face(std::get<ScopeFace>(scope), cls.value_or(SemanticClass::Building),
                mat);
    }
  }

  void mesh_roof(const ScopePoly& s, RoofKind kind, double pitch_deg,
                 uint16_t mat) {
    if (kind == RoofKind::flat || pitch_deg <= 0.0) {
      mesh_poly(s, SemanticClass::Roof, mat);
      return;
    }
    double slope = std::tan(pitch_deg * std::numbers::pi / 180.0);
    const Polygon& poly = s.poly;

    if (kind == RoofKind::gable && poly.size() == 4) {
      double len[4];
      for (int i = 0; i < 4; ++i)
        len[i] = (poly[(i + 1) % 4] - poly[i]).norm();
      // Ridge across the two shorter opposite edges.
      int first = (len[0] + len[2] <= len[1] + len[3]) ? 0 : 1;
      Vec2 m0 = (poly[first] + poly[(first + 1) % 4]) * 0.5;
      Vec2 m1 = (poly[(first + 2) % 4] + poly[(first + 3) % 4]) * 0.5;
      double rise =
          slope * 0.25 * (len[first] + len[(first + 2) % 4]);
      Vec3 r0 = lift(m0, s.z + rise);
      Vec3 r1 = lift(m1, s.z + rise);
      Vec2 p0 = poly[first], p1 = poly[(first + 1) % 4];
      Vec2 p2 = poly[(first + 2) % 4], p3 = poly[(first + 3) % 4];
      emit(lift(p1, s.z), lift(p2, s.z), r1, SemanticClass::Roof, mat);
      emit(lift(p1, s.z), r1, r0, SemanticClass::Roof, mat);
      emit(lift(p3, s.z), lift(p0, s.z), r0, SemanticClass::Roof, mat);
      emit(lift(p3, s.z), r0, r1, SemanticClass::Roof, mat);
      emit(lift(p0, s.z), lift(p1, s.z), r0, SemanticClass::Roof, mat);
      emit(lift(p2, s.z), lift(p3, s.z), r1, SemanticClass::Roof, mat);
      return;
    }

    // Hip (and the gable fallback for non-quads): pyramid to the centroid.
    Vec2 c = polygon_centroid(poly);
    double r_in = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < poly.size(); ++i) {
      double d2 = point_segment_dist2(c, poly[i], poly[(i + 1) % poly.size()]);
      r_in = std::min(r_in, std::sqrt(d2));
    }
    if (!(r_in > 1e-9)) {
      mesh_poly(s, SemanticClass::Roof, mat);
      return;
    }
    Vec3 apex = lift(c, s.z + slope * r_in);
    for (size_t i = 0; i < poly.size(); ++i)
      emit(lift(poly[i], s.z), lift(poly[(i + 1) % poly.size()], s.z), apex,
           SemanticClass::Roof, mat);
  }

  // -- rewriting ----------------------------------------------------------

  const Successor& choose(const Rule& rule, Rng& rng) {
    if (rule.successors.size() == 1) return rule.successors.front();
    double r = rng.uniform();
    double acc = 0.0;
    for (const Successor& s : rule.successors) {
      acc += s.weight;
      if (r < acc) return s;
    }
    return rule.successors.back();
  }

  static double prism_axis_len(const Scope& scope, SplitAxis axis,
                               const Obb& obb) {
    if (axis == SplitAxis::x) return obb.len_u;
    if (axis == SplitAxis::y) return obb.len_v;
    return std::get<ScopePrism>(scope).h;
  }

  void split_footprint(const Scope& scope, const Op& op,
                       const std::vector<double>& lens, const Obb& obb,
                       uint16_t mat, int depth,
                       std::vector<ShapeTask>& children) {
    Vec2 axis_dir = op.axis == SplitAxis::x ? obb.axis_u : obb.axis_v;
    Vec2 line_dir = op.axis == SplitAxis::x ? obb.axis_v : obb.axis_u;
    // split_polygon reports pieces relative to the cut line's direction;
    // the low-coordinate side is "left" when cutting across u and "right"
    // when cutting across v (perpendicular axis conventions).
    bool before_is_left = op.axis == SplitAxis::x;

    const Polygon& whole = std::holds_alternative<ScopePoly>(scope)
                               ? std::get<ScopePoly>(scope).poly
                               : std::get<ScopePrism>(scope).poly;
    std::vector<Polygon> remaining{whole};
    double acc = 0.0;
    for (size_t k = 0; k < op.parts.size(); ++k) {
      std::vector<Polygon> part_polys;
      if (k + 1 == op.parts.size()) {
        part_polys = std::move(remaining);
        remaining.clear();
      } else {
        acc += lens[k];
        Vec2 point = obb.origin + axis_dir * acc;
        std::vector<Polygon> next;
        for (const Polygon& piece : remaining) {
          SplitPieces sp = split_polygon(piece, point, line_dir);
          auto& before = before_is_left ? sp.left : sp.right;
          auto& after = before_is_left ? sp.right : sp.left;
          for (Polygon& b : before) part_polys.push_back(std::move(b));
          for (Polygon& a : after) next.push_back(std::move(a));
        }
        remaining = std::move(next);
      }
      if (op.parts[k].symbol == "NIL") continue;
      for (Polygon& piece : part_polys) {
        if (polygon_area(piece) < 1e-6) continue;
        Scope child_scope;
        if (const auto* p = std::get_if<ScopePoly>(&scope)) {
          child_scope = ScopePoly{std::move(piece), p->z, p->facing};
        } else {
          const auto& pr = std::get<ScopePrism>(scope);
          child_scope = ScopePrism{std::move(piece), pr.z0, pr.h};
        }
        children.push_back(
            {op.parts[k].symbol, std::move(child_scope), mat, depth + 1});
      }
    }
  }

  void apply_split_op(const Scope& scope, const Op& op, Rng& rng, uint16_t mat,
                      int depth, std::vector<ShapeTask>& children) {
    std::vector<SizeSpec> sizes;
    sizes.reserve(op.parts.size());
    for (const SplitPart& part : op.parts)
      sizes.push_back({part.relative, eval_expr(part.size, rng)});

    if (const auto* face = std::get_if<ScopeFace>(&scope)) {
      if (op.axis == SplitAxis::z)
        throw Error(Errc::invalid_argument,
                    "split(z) does not apply to facade faces");
      bool along_u = op.axis == SplitAxis::x;
      double total = along_u ? face->len_u : face->len_v;
      std::vector<double> lens = apply_split(total, sizes);
      double acc = 0.0;
      for (size_t k = 0; k < lens.size(); ++k) {
        if (op.parts[k].symbol != "NIL" && lens[k] > 1e-9) {
          ScopeFace child = *face;
          child.origin =
              face->origin + (along_u ? face->u : face->v) * acc;
          (along_u ? child.len_u : child.len_v) = lens[k];
          children.push_back(
              {op.parts[k].symbol, child, mat, depth + 1});
        }
        acc += lens[k];
      }
      return;
    }

    if (op.axis == SplitAxis::z) {
      const auto* prism = std::get_if<ScopePrism>(&scope);
      if (!prism)
        throw Error(Errc::invalid_argument,
                    "split(z) needs an extruded scope");
      std::vector<double> lens = apply_split(prism->h, sizes);
      double z = prism->z0;
      for (size_t k = 0; k < lens.size(); ++k) {
        if (op.parts[k].symbol != "NIL" && lens[k] > 1e-9)
          children.push_back({op.parts[k].symbol,
                              ScopePrism{prism->poly, z, lens[k]}, mat,
                              depth + 1});
        z += lens[k];
      }
      return;
    }

    const Polygon& poly = std::holds_alternative<ScopePoly>(scope)
                              ? std::get<ScopePoly>(scope).poly
                              : std::get<ScopePrism>(scope).poly;
    Obb obb = oriented_bbox(poly);
    double total = prism_axis_len(scope, op.axis, obb);
    std::vector<double> lens = apply_split(total, sizes);
    split_footprint(scope, op, lens, obb, mat, depth, children);
  }

  void apply_comp(const Scope& scope, const Op& op, uint16_t mat, int depth,
                  std::vector<ShapeTask>& children) {
    const auto* prism = std::get_if<ScopePrism>(&scope);
    if (!prism)
      throw Error(Errc::invalid_argument,
                  "comp(faces) needs an extruded scope");
    double z1 = prism->z0 + prism->h;

    auto target = [&](CompFace f) -> const std::string* {
      auto it = op.faces.find(f);
      return it == op.faces.end() ? nullptr : &it->second;
    };

    if (const std::string* sym = target(CompFace::top)) {
      if (*sym != "NIL")
        children.push_back(
            {*sym, ScopePoly{prism->poly, z1, 1}, mat, depth + 1});
    } else {
      mesh_poly({prism->poly, z1, 1}, SemanticClass::Roof, mat);
    }
    if (const std::string* sym = target(CompFace::bottom)) {
      if (*sym != "NIL")
        children.push_back(
            {*sym, ScopePoly{prism->poly, prism->z0, -1}, mat, depth + 1});
    } else {
      mesh_poly({prism->poly, prism->z0, -1}, SemanticClass::Building, mat);
    }
    const std::string* side = target(CompFace::side);
    for (size_t i = 0; i < prism->poly.size(); ++i) {
      Vec2 p = prism->poly[i];
      Vec2 q = prism->poly[(i + 1) % prism->poly.size()];
      double len = (q - p).norm();
      if (len < 1e-9) continue;
      if (side && *side != "NIL") {
        Vec2 d = (q - p) / len;
        ScopeFace face{lift(p, prism->z0), {d.x, d.y, 0.0}, {0.0, 0.0, 1.0},
                       len, prism->h};
        children.push_back({*side, face, mat, depth + 1});
      } else if (!side) {
        mesh_wall(p, q, prism->z0, z1, SemanticClass::Building, mat);
      }
    }
  }

  void apply_rule(ShapeTask&& task, std::vector<ShapeTask>& stack) {
    auto rule_it = program_.rules.find(task.symbol);
    if (rule_it == program_.rules.end())
      throw Error(Errc::undefined_symbol,
                  "UndefinedSymbol: '" + task.symbol + "'");
    if (task.depth > program_.recursion_limit)
      throw Error(Errc::recursion_limit,
                  "RecursionLimitExceeded: derivation deeper than " +
                      std::to_string(program_.recursion_limit));

    Rng rng(hash_combine(seed_, counter_++));
    const Successor& succ = choose(rule_it->second, rng);

    Scope scope = std::move(task.scope);
    uint16_t mat = task.material;
    bool consumed = false;
    bool emitted = false;
    bool vanished = false;
    std::vector<ShapeTask> children;

    for (const Item& item : succ.items) {
      if (vanished) break;
      if (!item.is_op) {
        if (item.symbol != "NIL")
          children.push_back({item.symbol, scope, mat, task.depth + 1});
        emitted = true;
        continue;
      }
      const Op& op = item.op;
      switch (op.kind) {
        case Op::Kind::extrude: {
          const auto* p = std::get_if<ScopePoly>(&scope);
          if (!p || p->facing < 0)
            throw Error(Errc::invalid_argument,
                        "extrude needs an upward flat scope");
          double h = eval_expr(op.args[0], rng);
          if (!(h > 0.0))
            throw Error(Errc::invalid_argument,
                        "extrude height must be > 0");
          scope = ScopePrism{p->poly, p->z, h};
          break;
        }
        case Op::Kind::setback: {
          double d = eval_expr(op.args[0], rng);
          if (d < 0.0)
            throw Error(Errc::invalid_argument, "setback must be >= 0");
          Polygon* poly = nullptr;
          if (auto* p = std::get_if<ScopePoly>(&scope)) poly = &p->poly;
          if (auto* pr = std::get_if<ScopePrism>(&scope)) poly = &pr->poly;
          if (!poly)
            throw Error(Errc::invalid_argument,
                        "setback does not apply to facade faces");
          if (d == 0.0) break;
          if (auto inset = offset_inward(*poly, d)) {
            *poly = std::move(*inset);
          } else {
            vanished = true;  // shape shrank away; nothing to produce
          }
          break;
        }
        case Op::Kind::color: {
          double r = eval_expr(op.args[0], rng);
          double g = eval_expr(op.args[1], rng);
          double b = eval_expr(op.args[2], rng);
          mat = intern_color(r, g, b);
          break;
        }
        case Op::Kind::texture:
          mat = intern_texture(op.texture_name);
          break;
        case Op::Kind::roof: {
          const auto* p = std::get_if<ScopePoly>(&scope);
          if (!p || p->facing < 0)
            throw Error(Errc::invalid_argument,
                        "roof needs an upward flat scope");
          double pitch = op.args.empty()
                             ? (op.roof_kind == RoofKind::flat ? 0.0 : 30.0)
                             : eval_expr(op.args[0], rng);
          if (pitch < 0.0 || pitch >= 85.0)
            throw Error(Errc::invalid_argument,
                        "roof pitch must lie in [0, 85) degrees");
          mesh_roof(*p, op.roof_kind, pitch, mat);
          consumed = true;
          break;
        }
        case Op::Kind::split:
          apply_split_op(scope, op, rng, mat, task.depth, children);
          consumed = true;
          break;
        case Op::Kind::comp:
          apply_comp(scope, op, mat, task.depth, children);
          consumed = true;
          break;
      }
      if (consumed) break;  // parser guarantees this was the final item
    }

    if (!consumed && !emitted && !vanished)
      mesh_terminal(scope, std::nullopt, mat);
    for (auto it = children.rbegin(); it != children.rend(); ++it)
      stack.push_back(std::move(*it));
  }

  const GrammarProgram& program_;
  uint64_t seed_;
  const Palette* palette_;
  uint32_t instance_;
  LabeledMesh mesh_;
  std::map<std::string, double> attrs_;
  uint64_t counter_ = 0;
};

}  // namespace

LabeledMesh derive(const Polygon& lot, const GrammarProgram& program,
                   uint64_t seed, const Palette* palette, uint32_t instance) {
  return Deriver(program, seed, palette, instance).run(lot);
}

}  // namespace synthcity
