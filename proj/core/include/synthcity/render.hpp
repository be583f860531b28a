#ifndef SYNTHCITY_RENDER_HPP
#define SYNTHCITY_RENDER_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "synthcity/citygen.hpp"
#include "synthcity/geometry.hpp"
#include "synthcity/mesh.hpp"

namespace synthcity {

enum class CameraMode : uint8_t { orthographic = 0, perspective = 1 };

struct SunSpec {
  double azimuth_deg = 135.0;   // clockwise from north (+y)
  double elevation_deg = 45.0;  // above the horizon
};

/// A calibrated nadir camera. The ground footprint is a square of
/// image_px * gsd_m meters centered on `center`; a perspective camera
/// additionally satisfies gsd = 2 * height * tan(fov/2) / image_px.
struct CameraSpec {
  CameraMode mode = CameraMode::orthographic;
  Vec2 center{0.0, 0.0};
  double height_m = 0.0;  // altitude, used by the perspective mode
  double fov_deg = 0.0;   // full field of view, perspective only
  int image_px = 572;
  double gsd_m = 0.3;
  SunSpec sun;

  double footprint_m() const { return image_px * gsd_m; }

  /// Ground-plane bounds {min, max} of the footprint.
  std::pair<Vec2, Vec2> bounds() const {
    double half = 0.5 * footprint_m();
    return {{center.x - half, center.y - half},
            {center.x + half, center.y + half}};
  }
};

/// Solve the camera for a target ground sample distance: perspective
/// altitude h = W*g / (2*tan(fov/2)), orthographic footprint W*g. The
/// camera center is left at the origin; set it per tile. Throws
/// Error(invalid_fov) unless 0 < fov_deg < 180 for perspective.
CameraSpec plan_camera(double gsd_m, int image_px, CameraMode mode,
                       double fov_deg = 0.0);

/// Ground sample distance recovered from the camera geometry (exact
/// inverse of plan_camera to 1e-9 relative).
double camera_gsd(const CameraSpec& cam);

/// Row-major 8-bit image; pixel (i, j) lives at pixels[(j*width + i) *
/// channels]. Index j follows world northing: row 0 is the southernmost
/// row. write_png flips rows so files read north-up.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<uint8_t> pixels;

  Image() = default;
  Image(int w, int h, int c)
      : width(w), height(h), channels(c),
        pixels(static_cast<size_t>(w) * h * c, 0) {}

  uint8_t* at(int i, int j) {
    return pixels.data() + (static_cast<size_t>(j) * width + i) * channels;
  }
  const uint8_t* at(int i, int j) const {
    return pixels.data() + (static_cast<size_t>(j) * width + i) * channels;
  }
};

/// Per-pixel nearest-surface semantic class and instance id, plus the
/// depth (distance to camera) it won at. Background pixels carry Ground,
/// instance 0. Same pixel convention as Image.
struct IdBuffer {
  int width = 0;
  int height = 0;
  std::vector<SemanticClass> classes;
  std::vector<uint32_t> instances;
  std::vector<float> depth;

  IdBuffer() = default;
  IdBuffer(int w, int h)
      : width(w), height(h),
        classes(static_cast<size_t>(w) * h, SemanticClass::Ground),
        instances(static_cast<size_t>(w) * h, 0),
        depth(static_cast<size_t>(w) * h, 0.0f) {}

  size_t index(int i, int j) const {
    return static_cast<size_t>(j) * width + i;
  }
};

struct RenderResult {
  Image rgb;     // image_px x image_px x 3
  IdBuffer ids;  // matching dimensions
  bool empty_intersection = false;  // footprint missed the scene extent
};

struct RenderOptions {
  double ambient = 0.35;
  int workers = 1;  // scanline bands; output is identical for any count
};

/// Rasterize one nadir tile: z-buffered, flat Lambert shading, hard
/// labels (no anti-aliasing anywhere). Deterministic for any worker
/// count. A camera footprint that misses the scene extent yields an
/// all-Ground tile with empty_intersection set.
RenderResult render_tile(const Scene& scene, const CameraSpec& cam,
                         const RenderOptions& opts = {});

/// Binary building mask: 255 where the class is Building or Roof, else 0.
Image extract_mask(const IdBuffer& ids);

struct TileMeta {
  Vec2 min_corner;  // world bounds of the ground footprint
  Vec2 max_corner;
  std::string style_id;
  uint64_t world_seed = 0;
  CameraSpec camera;
  bool empty_intersection = false;
};

/// A dataset-ready tile: rgb image, building mask, and provenance.
struct Tile {
  Image rgb;
  Image mask;
  TileMeta meta;
};

/// render_tile + extract_mask + metadata in one step.
Tile make_tile(const Scene& scene, const CameraSpec& cam,
               const RenderOptions& opts = {});

}  // namespace synthcity

#endif  // SYNTHCITY_RENDER_HPP
