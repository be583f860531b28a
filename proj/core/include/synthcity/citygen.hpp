#ifndef SYNTHCITY_CITYGEN_HPP
#define SYNTHCITY_CITYGEN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "synthcity/grammar.hpp"
#include "synthcity/mesh.hpp"
#include "synthcity/roadnet.hpp"

namespace synthcity {

/// A complete city style: grammar, materials, and placement densities.
struct StyleConfig {
  std::string id;  // one of the built-in a..i, or a custom name
  GrammarProgram grammar;
  Palette palette;
  double building_prob = 0.9;   // chance a lot receives a building
  double tree_density = 15.0;   // trees per hectare of unbuilt lot area
  std::string road_material = "asphalt";
  std::string ground_material = "ground";
  std::string tree_material = "foliage";
  double min_lot_area_m2 = 600.0;
  double street_setback_m = 2.0;

  void validate() const;  // throws Error(config_error)
};

struct StageTimings {
  double roads_s = 0.0;
  double blocks_s = 0.0;
  double populate_s = 0.0;
  double total_s = 0.0;
};

/// A fully populated labeled world.
struct Scene {
  LabeledMesh mesh;
  double extent_x = 0.0;
  double extent_y = 0.0;
  std::string style_id;
  uint64_t world_seed = 0;
  size_t building_count = 0;
  size_t lot_count = 0;
  std::vector<Polygon> footprints;    // plan-view outline of each built lot
  std::vector<std::string> warnings;  // per-lot degradation records
  StageTimings timings;
};

/// Recursively split a block into lots along the longer axis of its
/// oriented bounding box until every piece has area < 2 * min_area_m2. The
/// cut position is drawn uniformly from [split_lo, split_hi] of the axis
/// (pin both to 0.5 for median splits). Lot areas sum to the block area.
/// A degenerate block (area < 1e-6) yields an empty list.
std::vector<Polygon> subdivide_block(const CityBlock& block,
                                     double min_area_m2, uint64_t seed,
                                     double split_lo = 0.4,
                                     double split_hi = 0.6);

/// Populate free-standing blocks: lots, buildings, ground, and trees.
/// Roads are not meshed here (this entry point has no road graph); the scene
/// extent is the blocks' bounding box. Deterministic in (blocks, style,
/// world_seed). Grammar failures degrade the lot to ground and are recorded
/// in Scene::warnings.
Scene populate(const std::vector<CityBlock>& blocks, const StyleConfig& style,
               uint64_t world_seed);

struct WorldConfig {
  RoadConfig roads;  // carries the extent; boundary_loop defaults on here
  StyleConfig style;
  uint64_t world_seed = 0;

  WorldConfig() { roads.boundary_loop = true; }
};

/// Full pipeline: generate_roads -> extract blocks -> subdivide -> populate,
/// with road corridors meshed from the street graph so that building, road,
/// and ground areas tile the extent. Records per-stage timings.
Scene build_world(const WorldConfig& config);

/// Parse a WorldConfig from a JSON document (schema in the README). Styles
/// may be referenced by built-in id or defined inline.
WorldConfig load_world_config(const std::string& json_text);

/// Sum of the upward-facing projected triangle areas of one class, in m².
/// Walls project to zero and down-facing triangles are ignored, so this
/// measures the plan-view footprint of a class.
double projected_up_area(const LabeledMesh& mesh, SemanticClass cls);

}  // namespace synthcity

#endif  // SYNTHCITY_CITYGEN_HPP
