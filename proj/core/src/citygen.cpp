#include "synthcity/citygen.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <utility>

#include <json.hpp>

#include "faces.hpp"
#include "synthcity/errors.hpp"
#include "synthcity/presets.hpp"
#include "synthcity/rng.hpp"

namespace synthcity {

namespace {

// Flat geometry stacking order: ground slightly above the building bases,
// roads slightly above ground, so the nadir renderer resolves shared
// boundaries deterministically.
constexpr double kGroundZ = 0.01;
constexpr double kRoadZ = 0.02;

double now_s() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch())
      .count();
}

void mesh_flat(LabeledMesh& mesh, const Polygon& poly, double z,
               SemanticClass cls, uint16_t mat, uint32_t instance) {
  for (const auto& tri : triangulate(poly))
    mesh.add_triangle({tri[0].x, tri[0].y, z}, {tri[1].x, tri[1].y, z},
                      {tri[2].x, tri[2].y, z}, cls, mat, instance);
}

void mesh_flat_ring(LabeledMesh& mesh, const Polygon& outer,
                    const Polygon& hole, double z, SemanticClass cls,
                    uint16_t mat, uint32_t instance,
                    std::vector<std::string>* warnings, const char* what) {
  auto tris = triangulate_ring(outer, hole);
  if (tris.empty() && polygon_area(outer) > polygon_area(hole) + 1e-9) {
    if (warnings)
      warnings->push_back(std::string(what) +
                          ": ring triangulation failed, filling whole area");
    mesh_flat(mesh, outer, z, cls, mat, instance);
    return;
  }
  for (const auto& tri : tris)
    mesh.add_triangle({tri[0].x, tri[0].y, z}, {tri[1].x, tri[1].y, z},
                      {tri[2].x, tri[2].y, z}, cls, mat, instance);
}

void mesh_tree(LabeledMesh& mesh, Vec2 at, double trunk_h, double canopy_r,
               double canopy_h, uint16_t trunk_mat, uint16_t leaf_mat,
               uint32_t instance) {
  constexpr int kSides = 8;
  constexpr double kTrunkR = 0.3;
  auto ring_point = [&](double r, int k) {
    double a = 2.0 * std::numbers::pi * k / kSides;
    return Vec2{at.x + r * std::cos(a), at.y + r * std::sin(a)};
  };
  for (int k = 0; k < kSides; ++k) {
    Vec2 p = ring_point(kTrunkR, k);
    Vec2 q = ring_point(kTrunkR, (k + 1) % kSides);
    mesh.add_triangle({p.x, p.y, 0.0}, {q.x, q.y, 0.0}, {q.x, q.y, trunk_h},
                      SemanticClass::Vegetation, trunk_mat, instance);
    mesh.add_triangle({p.x, p.y, 0.0}, {q.x, q.y, trunk_h},
                      {p.x, p.y, trunk_h}, SemanticClass::Vegetation,
                      trunk_mat, instance);
  }
  Vec3 apex{at.x, at.y, trunk_h + canopy_h};
  for (int k = 0; k < kSides; ++k) {
    Vec2 p = ring_point(canopy_r, k);
    Vec2 q = ring_point(canopy_r, (k + 1) % kSides);
    mesh.add_triangle({p.x, p.y, trunk_h}, {q.x, q.y, trunk_h}, apex,
                      SemanticClass::Vegetation, leaf_mat, instance);
    // Underside of the canopy, facing down.
    mesh.add_triangle({q.x, q.y, trunk_h}, {p.x, p.y, trunk_h},
                      {at.x, at.y, trunk_h}, SemanticClass::Vegetation,
                      leaf_mat, instance);
  }
}

uint16_t style_material(LabeledMesh& mesh, const StyleConfig& style,
                        const std::string& key) {
  int id = style.palette.find(key);
  if (id >= 0) return mesh.palette().intern(style.palette.at(
      static_cast<uint16_t>(id)));
  return 0;
}

struct RoadRings {
  const std::vector<detail::FaceBlock>* faces = nullptr;
};

Scene populate_core(const std::vector<CityBlock>& blocks,
                    const StyleConfig& style, uint64_t world_seed,
                    const RoadRings* rings, double extent_x,
                    double extent_y) {
  style.validate();
  Scene scene;
  scene.style_id = style.id;
  scene.world_seed = world_seed;
  scene.extent_x = extent_x;
  scene.extent_y = extent_y;

  uint16_t ground_mat = style_material(scene.mesh, style, style.ground_material);
  uint16_t road_mat = style_material(scene.mesh, style, style.road_material);
  uint16_t leaf_mat = style_material(scene.mesh, style, style.tree_material);
  uint16_t trunk_mat = scene.mesh.palette().intern(
      Material{"trunk", {0.33f, 0.23f, 0.12f}, std::nullopt});

  // Street corridors: each interior face minus its inset block, so road,
  // ground, and building areas tile the extent exactly.
  if (rings && rings->faces) {
    for (const detail::FaceBlock& fb : *rings->faces) {
      if (fb.inset) {
        mesh_flat_ring(scene.mesh, fb.face, *fb.inset, kRoadZ,
                       SemanticClass::Road, road_mat, 0, &scene.warnings,
                       "road ring");
      } else {
        mesh_flat(scene.mesh, fb.face, kRoadZ, SemanticClass::Road, road_mat,
                  0);
      }
    }
  }

  uint64_t lot_counter = 0;
  for (size_t b = 0; b < blocks.size(); ++b) {
    if (polygon_area(blocks[b].boundary) < 1e-6) {
      scene.warnings.push_back("block " + std::to_string(b) +
                               " is degenerate, skipped");
      continue;
    }
    uint64_t block_seed =
        hash_combine(hash_str(world_seed, "subdiv"), static_cast<uint64_t>(b));
    std::vector<Polygon> lots =
        subdivide_block(blocks[b], style.min_lot_area_m2, block_seed);
    for (Polygon& lot : lots) {
      uint64_t lot_id = lot_counter++;
      uint32_t instance = static_cast<uint32_t>(lot_id) + 1;
      Rng lot_rng(hash_combine(hash_str(world_seed, "lot"), lot_id));
      bool wants_building = lot_rng.uniform() < style.building_prob;

      std::optional<Polygon> footprint =
          offset_inward(lot, style.street_setback_m);
      bool built = false;
      if (wants_building && footprint) {
        try {
          LabeledMesh building =
              derive(*footprint, style.grammar,
                     hash_combine(hash_str(world_seed, "bldg"), lot_id),
                     &style.palette, instance);
          if (!building.empty()) {
            scene.mesh.append(building);
            scene.footprints.push_back(*footprint);
            built = true;
            ++scene.building_count;
          }
        } catch (const Error& e) {
          scene.warnings.push_back("lot " + std::to_string(lot_id) +
                                   " degraded to ground: " + e.what());
        }
      }

      if (built) {
        mesh_flat_ring(scene.mesh, lot, *footprint, kGroundZ,
                       SemanticClass::Ground, ground_mat, 0, &scene.warnings,
                       "lot ring");
      } else {
        mesh_flat(scene.mesh, lot, kGroundZ, SemanticClass::Ground,
                  ground_mat, 0);
        // Trees only on unbuilt lots, Poisson by area.
        double hectares = polygon_area(lot) / 10000.0;
        int trees = lot_rng.poisson(style.tree_density * hectares);
        auto [lo, hi] = polygon_bounds(lot);
        for (int t = 0; t < trees; ++t) {
          double canopy_r = lot_rng.uniform(1.5, 4.0);
          double trunk_h = lot_rng.uniform(2.0, 4.0);
          double canopy_h = lot_rng.uniform(3.0, 5.0);
          Vec2 at;
          bool placed = false;
          for (int attempt = 0; attempt < 16; ++attempt) {
            at = {lot_rng.uniform(lo.x, hi.x), lot_rng.uniform(lo.y, hi.y)};
            if (!point_in_polygon(lot, at)) continue;
            if (at.x - canopy_r < 0.0 || at.x + canopy_r > extent_x ||
                at.y - canopy_r < 0.0 || at.y + canopy_r > extent_y)
              continue;
            placed = true;
            break;
          }
          if (placed)
            mesh_tree(scene.mesh, at, trunk_h, canopy_r, canopy_h, trunk_mat,
                      leaf_mat, instance);
        }
      }
      ++scene.lot_count;
    }
  }
  return scene;
}

}  // namespace

void StyleConfig::validate() const {
  if (building_prob < 0.0 || building_prob > 1.0)
    throw Error(Errc::config_error, "building_prob must lie in [0, 1]");
  if (tree_density < 0.0)
    throw Error(Errc::config_error, "tree_density must be >= 0");
  if (!(min_lot_area_m2 > 0.0))
    throw Error(Errc::config_error, "min_lot_area_m2 must be > 0");
  if (street_setback_m < 0.0)
    throw Error(Errc::config_error, "street_setback_m must be >= 0");
  for (const std::string* key :
       {&road_material, &ground_material, &tree_material}) {
    if (palette.find(*key) < 0)
      throw Error(Errc::config_error,
                  "style '" + id + "' references missing palette entry '" +
                      *key + "'");
  }
}

std::vector<Polygon> subdivide_block(const CityBlock& block,
                                     double min_area_m2, uint64_t seed,
                                     double split_lo, double split_hi) {
  if (!(min_area_m2 > 0.0))
    throw Error(Errc::invalid_argument, "min_area_m2 must be > 0");
  if (!(split_lo > 0.0) || !(split_hi < 1.0) || split_lo > split_hi)
    throw Error(Errc::invalid_argument,
                "split positions must satisfy 0 < lo <= hi < 1");
  std::vector<Polygon> out;
  if (polygon_area(block.boundary) < 1e-6) return out;

  Rng rng(seed);
  std::vector<Polygon> work{block.boundary};
  while (!work.empty()) {
    Polygon poly = std::move(work.back());
    work.pop_back();
    double area = polygon_area(poly);
    if (area < 2.0 * min_area_m2) {
      out.push_back(std::move(poly));
      continue;
    }
    Obb obb = oriented_bbox(poly);
    bool along_u = obb.len_u >= obb.len_v;
    Vec2 axis = along_u ? obb.axis_u : obb.axis_v;
    Vec2 line_dir = along_u ? obb.axis_v : obb.axis_u;
    double len = along_u ? obb.len_u : obb.len_v;
    double t = rng.uniform(split_lo, split_hi);
    SplitPieces pieces = split_polygon(poly, obb.origin + axis * (t * len),
                                       line_dir);
    if (pieces.left.empty() || pieces.right.empty()) {
      // The cut failed to separate anything; keep the piece whole rather
      // than loop forever.
      out.push_back(std::move(poly));
      continue;
    }
    for (auto& p : pieces.right)
      if (polygon_area(p) > 1e-9) work.push_back(std::move(p));
    for (auto& p : pieces.left)
      if (polygon_area(p) > 1e-9) work.push_back(std::move(p));
  }
  return out;
}

Scene populate(const std::vector<CityBlock>& blocks, const StyleConfig& style,
               uint64_t world_seed) {
  double ex = 0.0, ey = 0.0;
  for (const CityBlock& b : blocks) {
    auto [lo, hi] = polygon_bounds(b.boundary);
    (void)lo;
    ex = std::max(ex, hi.x);
    ey = std::max(ey, hi.y);
  }
  double t0 = now_s();
  Scene scene = populate_core(blocks, style, world_seed, nullptr, ex, ey);
  scene.timings.populate_s = now_s() - t0;
  scene.timings.total_s = scene.timings.populate_s;
  return scene;
}

Scene build_world(const WorldConfig& config) {
  config.style.validate();
  double t0 = now_s();
  RoadGraph graph = generate_roads(config.roads);
  double t1 = now_s();

  if (auto crossing = detail::find_crossing(graph)) {
    char buf[96];
    std::snprintf(buf, sizeof(buf),
                  "PlanarityViolation: edges %d and %d intersect",
                  crossing->first, crossing->second);
    throw Error(Errc::planarity_violation, buf);
  }
  std::vector<detail::FaceBlock> faces = detail::face_blocks(graph);
  std::vector<CityBlock> blocks;
  for (const detail::FaceBlock& fb : faces) {
    if (!fb.inset) continue;
    blocks.push_back({*fb.inset, polygon_area(*fb.inset)});
  }
  double t2 = now_s();

  RoadRings rings{&faces};
  Scene scene = populate_core(blocks, config.style, config.world_seed, &rings,
                              config.roads.extent_x, config.roads.extent_y);
  double t3 = now_s();

  scene.timings.roads_s = t1 - t0;
  scene.timings.blocks_s = t2 - t1;
  scene.timings.populate_s = t3 - t2;
  scene.timings.total_s = t3 - t0;
  return scene;
}

WorldConfig load_world_config(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::config_error,
                std::string("world config is not valid JSON: ") + e.what());
  }

  WorldConfig cfg;
  try {
    if (doc.contains("world_seed"))
      cfg.world_seed = doc.at("world_seed").get<uint64_t>();

    if (doc.contains("extent")) {
      const auto& e = doc.at("extent");
      cfg.roads.extent_x = e.at(0).get<double>();
      cfg.roads.extent_y = e.at(1).get<double>();
    }

    bool seed_given = false;
    if (doc.contains("roads")) {
      const auto& r = doc.at("roads");
      if (r.contains("topology")) {
        cfg.roads.topology.clear();
        const auto& topo = r.at("topology");
        if (topo.is_string()) {
          auto t = topology_from_name(topo.get<std::string>());
          if (!t)
            throw Error(Errc::config_error, "unknown topology '" +
                                                topo.get<std::string>() + "'");
          cfg.roads.topology.push_back({*t, 1.0});
        } else {
          for (const auto& entry : topo) {
            auto t = topology_from_name(entry.at("type").get<std::string>());
            if (!t)
              throw Error(Errc::config_error,
                          "unknown topology '" +
                              entry.at("type").get<std::string>() + "'");
            double w = entry.contains("weight")
                           ? entry.at("weight").get<double>()
                           : 1.0;
            cfg.roads.topology.push_back({*t, w});
          }
        }
      }
      if (r.contains("spacing_m"))
        cfg.roads.spacing_m = r.at("spacing_m").get<double>();
      if (r.contains("jitter")) cfg.roads.jitter = r.at("jitter").get<double>();
      if (r.contains("seed")) {
        cfg.roads.seed = r.at("seed").get<uint64_t>();
        seed_given = true;
      }
      if (r.contains("rings")) cfg.roads.rings = r.at("rings").get<int>();
      if (r.contains("spokes")) cfg.roads.spokes = r.at("spokes").get<int>();
      if (r.contains("boundary_loop"))
        cfg.roads.boundary_loop = r.at("boundary_loop").get<bool>();
      if (r.contains("arterial_width_m"))
        cfg.roads.arterial_width_m = r.at("arterial_width_m").get<double>();
      if (r.contains("local_width_m"))
        cfg.roads.local_width_m = r.at("local_width_m").get<double>();
    }
    if (!seed_given) cfg.roads.seed = hash_str(cfg.world_seed, "roads");

    if (doc.contains("style")) {
      const auto& s = doc.at("style");
      if (s.is_string()) {
        cfg.style = load_builtin_style(s.get<std::string>());
      } else {
        cfg.style = load_builtin_style(
            s.contains("base") ? s.at("base").get<std::string>() : "a");
        if (s.contains("building_prob"))
          cfg.style.building_prob = s.at("building_prob").get<double>();
        if (s.contains("tree_density"))
          cfg.style.tree_density = s.at("tree_density").get<double>();
        if (s.contains("min_lot_area_m2"))
          cfg.style.min_lot_area_m2 = s.at("min_lot_area_m2").get<double>();
        if (s.contains("street_setback_m"))
          cfg.style.street_setback_m = s.at("street_setback_m").get<double>();
      }
    } else {
      cfg.style = load_builtin_style("a");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::config_error,
                std::string("world config field error: ") + e.what());
  }
  return cfg;
}

double projected_up_area(const LabeledMesh& mesh, SemanticClass cls) {
  double total = 0.0;
  for (size_t t = 0; t < mesh.triangle_count(); ++t) {
    if (mesh.triangle_class(t) != cls) continue;
    const Vec3& a = mesh.vertex(t, 0);
    const Vec3& b = mesh.vertex(t, 1);
    const Vec3& c = mesh.vertex(t, 2);
    double signed_proj =
        0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
    if (signed_proj > 0.0) total += signed_proj;
  }
  return total;
}

}  // namespace synthcity
