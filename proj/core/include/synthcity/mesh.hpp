#ifndef SYNTHCITY_MESH_HPP
#define SYNTHCITY_MESH_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "synthcity/geometry.hpp"

namespace synthcity {

enum class SemanticClass : uint8_t {
  Ground = 0,
  Road = 1,
  Building = 2,
  Roof = 3,
  Vegetation = 4,
};

const char* semantic_class_name(SemanticClass c);
std::optional<SemanticClass> semantic_class_from_name(std::string_view name);

/// Procedural stripe pattern: alternates the base colour with `rgb2` in
/// bands of `period_m` metres along a world axis ('x', 'y' or 'z').
struct Stripe {
  std::array<float, 3> rgb2{0, 0, 0};
  double period_m = 3.0;
  char axis = 'z';
  bool operator==(const Stripe&) const = default;
};

struct Material {
  std::string name;
  std::array<float, 3> rgb{0.5f, 0.5f, 0.5f};
  std::optional<Stripe> stripe;
  bool operator==(const Material&) const = default;
};

/// Small interned material table. Index 0 is always a neutral default.
class Palette {
 public:
  Palette();

  uint16_t intern(const Material& m);
  int find(const std::string& name) const;
  const Material& at(uint16_t id) const { return materials_.at(id); }
  size_t size() const { return materials_.size(); }
  const std::vector<Material>& materials() const { return materials_; }

 private:
  std::vector<Material> materials_;
};

/// Triangle soup with per-triangle semantics. Vertices are stored flat,
/// three per triangle; degenerate triangles are rejected on insertion.
class LabeledMesh {
 public:
  static constexpr double kMinTriangleArea = 1e-9;

  void add_triangle(const Vec3& a, const Vec3& b, const Vec3& c,
                    SemanticClass cls, uint16_t material, uint32_t instance);

  size_t triangle_count() const { return classes_.size(); }
  bool empty() const { return classes_.empty(); }

  const Vec3& vertex(size_t tri, int corner) const {
    return positions_[3 * tri + static_cast<size_t>(corner)];
  }
  SemanticClass triangle_class(size_t tri) const { return classes_[tri]; }
  uint16_t triangle_material(size_t tri) const { return materials_[tri]; }
  uint32_t triangle_instance(size_t tri) const { return instances_[tri]; }

  Palette& palette() { return palette_; }
  const Palette& palette() const { return palette_; }

  /// Appends another mesh, re-interning its materials into this palette.
  void append(const LabeledMesh& other);

  /// {min, max} corners over all vertices; nullopt when empty.
  std::optional<std::pair<Vec3, Vec3>> bounds() const;

  size_t count_class(SemanticClass c) const;

 private:
  std::vector<Vec3> positions_;
  std::vector<SemanticClass> classes_;
  std::vector<uint16_t> materials_;
  std::vector<uint32_t> instances_;
  Palette palette_;
};

/// Wavefront-style text export for external viewers. Grouped by semantic
/// class; materials become comment annotations (no .mtl file is written).
void write_obj(std::ostream& os, const LabeledMesh& mesh);

double triangle_area3d(const Vec3& a, const Vec3& b, const Vec3& c);

}  // namespace synthcity

#endif  // SYNTHCITY_MESH_HPP
