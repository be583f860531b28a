#ifndef SYNTHCITY_SRC_FACES_HPP
#define SYNTHCITY_SRC_FACES_HPP

#include <optional>
#include <utility>
#include <vector>

#include "synthcity/roadnet.hpp"

namespace synthcity::detail {

/// One face of the planar subdivision as the node cycle visited by a
/// left-hand face walk. Interior faces wind counter-clockwise (positive
/// area); the unbounded outer face of each component winds clockwise.
/// Dangling tree edges are traversed out and back and are still present
/// in `nodes`; strip_spurs removes them.
struct FaceLoop {
  std::vector<int> nodes;
  double signed_area = 0.0;
};

/// Extract every face of the embedded planar graph (interior faces plus one
/// outer face per connected component). Assumes the graph is planar; run
/// find_crossing first.
std::vector<FaceLoop> extract_faces(const RoadGraph& graph);

/// Remove out-and-back spur traversals (… a b a … -> … a …) from a face
/// walk, returning the remaining simple cycle. Empty if nothing remains.
std::vector<int> strip_spurs(const std::vector<int>& loop);

/// First pair of edge indices that properly cross or overlap where the
/// planarity invariant forbids it, or nullopt if the graph is planar.
std::optional<std::pair<int, int>> find_crossing(const RoadGraph& graph);

/// Interior face with its half-road-width inset. `inset` is empty when the
/// face collapses under the offset (the whole face is street). Assumes a
/// planar graph; run find_crossing first.
struct FaceBlock {
  Polygon face;  // simple, counter-clockwise, spurs stripped
  std::optional<Polygon> inset;
};
std::vector<FaceBlock> face_blocks(const RoadGraph& graph);

}  // namespace synthcity::detail

#endif  // SYNTHCITY_SRC_FACES_HPP
