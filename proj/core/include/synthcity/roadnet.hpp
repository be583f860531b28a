#ifndef SYNTHCITY_ROADNET_HPP
#define SYNTHCITY_ROADNET_HPP

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "synthcity/geometry.hpp"

namespace synthcity {

enum class Topology { raster, radial, organic };

const char* topology_name(Topology t);
std::optional<Topology> topology_from_name(std::string_view name);

/// Street-network generation parameters. A single-entry `topology` list is a
/// pure topology; several entries partition the extent into district strips
/// with widths proportional to the weights.
struct RoadConfig {
  std::vector<std::pair<Topology, double>> topology{{Topology::raster, 1.0}};
  double extent_x = 1000.0;  // metres
  double extent_y = 1000.0;
  double spacing_m = 120.0;  // nominal block spacing
  double jitter = 0.0;       // in [0, 0.5)
  uint64_t seed = 0;
  int rings = 0;   // radial only; 0 derives the count from extent/spacing
  int spokes = 8;  // radial only
  // Ring road along the extent boundary so that blocks tile the full extent
  // (radial and organic leave the margins empty otherwise). World building
  // turns this on.
  bool boundary_loop = false;
  double arterial_width_m = 12.0;
  double local_width_m = 6.0;

  void validate() const;  // throws Error(invalid_argument)
};

enum class RoadClass : uint8_t { arterial = 0, local = 1 };

struct RoadEdge {
  int a = 0;
  int b = 0;
  double width_m = 6.0;
  RoadClass cls = RoadClass::local;
};

/// Planar street graph in world metres.
struct RoadGraph {
  std::vector<Vec2> nodes;
  std::vector<RoadEdge> edges;
  double extent_x = 0.0;
  double extent_y = 0.0;
};

/// Interior face of the street graph, shrunk inward by half the bounding
/// road widths.
struct CityBlock {
  Polygon boundary;  // simple, counter-clockwise
  double area_m2 = 0.0;
};

struct ValidationReport {
  bool planar = true;
  std::optional<std::pair<int, int>> crossing_edges;
  bool connected = true;
  int component_count = 0;
  std::vector<std::pair<int, int>> duplicate_edges;
  std::vector<int> zero_length_edges;
  bool nodes_in_extent = true;
  bool euler_ok = true;
  int node_count = 0;
  int edge_count = 0;
  int interior_face_count = 0;

  bool all_pass() const {
    return planar && connected && duplicate_edges.empty() &&
           zero_length_edges.empty() && nodes_in_extent && euler_ok;
  }
};

RoadGraph generate_roads(const RoadConfig& config);

/// All interior faces of the planar subdivision, inset by half the incident
/// road widths. Throws Error(planarity_violation) on non-planar input.
std::vector<CityBlock> extract_blocks(const RoadGraph& graph);

ValidationReport validate_graph(const RoadGraph& graph);

/// Debug export, one edge per line: x1 y1 x2 y2 width class.
void write_debug_edges(std::ostream& os, const RoadGraph& graph);

}  // namespace synthcity

#endif  // SYNTHCITY_ROADNET_HPP
