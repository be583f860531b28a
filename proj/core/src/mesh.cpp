#include "synthcity/mesh.hpp"

#include <cstdio>
#include <limits>

namespace synthcity {

const char* semantic_class_name(SemanticClass c) {
  switch (c) {
    case SemanticClass::Ground: return "Ground";
    case SemanticClass::Road: return "Road";
    case SemanticClass::Building: return "Building";
    case SemanticClass::Roof: return "Roof";
    case SemanticClass::Vegetation: return "Vegetation";
  }
  return "Unknown";
}

std::optional<SemanticClass> semantic_class_from_name(std::string_view name) {
  if (name == "Ground") return SemanticClass::Ground;
  if (name == "Road") return SemanticClass::Road;
  if (name == "Building") return SemanticClass::Building;
  if (name == "Roof") return SemanticClass::Roof;
  if (name == "Vegetation") return SemanticClass::Vegetation;
  return std::nullopt;
}

Palette::Palette() {
  materials_.push_back(Material{"default", {0.5f, 0.5f, 0.5f}, std::nullopt});
}

uint16_t Palette::intern(const Material& m) {
  for (size_t i = 0; i < materials_.size(); ++i) {
    if (materials_[i] == m) return static_cast<uint16_t>(i);
  }
  materials_.push_back(m);
  return static_cast<uint16_t>(materials_.size() - 1);
}

int Palette::find(const std::string& name) const {
  for (size_t i = 0; i < materials_.size(); ++i) {
    if (materials_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

double triangle_area3d(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

void LabeledMesh::add_triangle(const Vec3& a, const Vec3& b, const Vec3& c,
                               SemanticClass cls, uint16_t material,
                               uint32_t instance) {
  if (triangle_area3d(a, b, c) <= kMinTriangleArea) return;
  positions_.push_back(a);
  positions_.push_back(b);
  positions_.push_back(c);
  classes_.push_back(cls);
  materials_.push_back(material);
  instances_.push_back(instance);
}

void LabeledMesh::append(const LabeledMesh& other) {
  std::vector<uint16_t> remap(other.palette_.size());
  for (size_t i = 0; i < other.palette_.size(); ++i)
    remap[i] = palette_.intern(other.palette_.at(static_cast<uint16_t>(i)));
  size_t n = other.triangle_count();
  positions_.reserve(positions_.size() + 3 * n);
  for (size_t t = 0; t < n; ++t) {
    positions_.push_back(other.vertex(t, 0));
    positions_.push_back(other.vertex(t, 1));
    positions_.push_back(other.vertex(t, 2));
    classes_.push_back(other.classes_[t]);
    materials_.push_back(remap[other.materials_[t]]);
    instances_.push_back(other.instances_[t]);
  }
}

std::optional<std::pair<Vec3, Vec3>> LabeledMesh::bounds() const {
  if (positions_.empty()) return std::nullopt;
  Vec3 mn = positions_[0], mx = positions_[0];
  for (const Vec3& p : positions_) {
    mn.x = std::min(mn.x, p.x);
    mn.y = std::min(mn.y, p.y);
    mn.z = std::min(mn.z, p.z);
    mx.x = std::max(mx.x, p.x);
    mx.y = std::max(mx.y, p.y);
    mx.z = std::max(mx.z, p.z);
  }
  return std::make_pair(mn, mx);
}

size_t LabeledMesh::count_class(SemanticClass c) const {
  size_t n = 0;
  for (SemanticClass k : classes_)
    if (k == c) ++n;
  return n;
}

void write_obj(std::ostream& os, const LabeledMesh& mesh) {
  os << "# synthcity scene export\n";
  char buf[128];
  size_t n = mesh.triangle_count();
  for (size_t t = 0; t < n; ++t) {
    for (int k = 0; k < 3; ++k) {
      const Vec3& v = mesh.vertex(t, k);
      std::snprintf(buf, sizeof buf, "v %.6f %.6f %.6f\n", v.x, v.y, v.z);
      os << buf;
    }
  }
  SemanticClass current = SemanticClass::Ground;
  bool first = true;
  for (size_t t = 0; t < n; ++t) {
    if (first || mesh.triangle_class(t) != current) {
      current = mesh.triangle_class(t);
      first = false;
      os << "g " << semantic_class_name(current) << "\n";
    }
    size_t base = 3 * t + 1;  // OBJ indices are 1-based
    os << "f " << base << ' ' << base + 1 << ' ' << base + 2 << "\n";
  }
}

}  // namespace synthcity
