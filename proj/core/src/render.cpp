#include "synthcity/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <thread>

#include "synthcity/errors.hpp"

namespace synthcity {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Screen coordinates are snapped to a 1/256-pixel grid and all edge
// functions are evaluated in 64-bit integers, which makes shared edges
// between adjacent triangles watertight: no pixel inside the mesh is
// dropped or double-claimed by floating-point disagreement.
constexpr int kSubBits = 8;
constexpr int64_t kSubScale = 1 << kSubBits;

struct ScreenTri {
  int64_t sx[3];  // snapped screen x, 1/256 px units
  int64_t sy[3];
  double inv_zc[3];   // perspective: 1/camera-depth per vertex
  double depth[3];    // per-vertex depth key (ortho: -z, persp: camera z)
  Vec3 world[3];      // world position per vertex
  float shade;        // Lambert term, constant per triangle
  SemanticClass cls;
  uint16_t material;
  uint32_t instance;
  int64_t min_sx, min_sy, max_sx, max_sy;
};

struct Vert {
  Vec3 world;
  double zc;  // camera-space depth (perspective only)
};

int64_t snap(double v) { return llround(v * kSubScale); }

struct Raster {
  const Scene& scene;
  const CameraSpec& cam;
  const RenderOptions& opts;
  int W;
  double g;
  Vec2 min_corner;
  bool perspective;
  double f_px = 0.0;  // focal length in pixels
  Vec3 sun;
  std::vector<ScreenTri> tris;

  Raster(const Scene& s, const CameraSpec& c, const RenderOptions& o)
      : scene(s), cam(c), opts(o), W(c.image_px), g(c.gsd_m),
        min_corner(c.bounds().first),
        perspective(c.mode == CameraMode::perspective) {
    if (perspective) f_px = 0.5 * W / std::tan(0.5 * cam.fov_deg * kDeg);
    double az = cam.sun.azimuth_deg * kDeg;
    double el = cam.sun.elevation_deg * kDeg;
    sun = {std::sin(az) * std::cos(el), std::cos(az) * std::cos(el),
           std::sin(el)};
  }

  // Screen position of a world point; perspective divides by camera depth.
  void project(const Vec3& p, double& sx, double& sy, double& zc) const {
    if (perspective) {
      zc = cam.height_m - p.z;
      sx = 0.5 * W + f_px * (p.x - cam.center.x) / zc;
      sy = 0.5 * W + f_px * (p.y - cam.center.y) / zc;
    } else {
      zc = 0.0;
      sx = (p.x - min_corner.x) / g;
      sy = (p.y - min_corner.y) / g;
    }
  }

  float lambert(const Vec3& a, const Vec3& b, const Vec3& c) const {
    Vec3 n = (b - a).cross(c - a);
    double len = n.norm();
    double ndotl = len < 1e-18 ? 0.0 : std::max(0.0, n.dot(sun) / len);
    return static_cast<float>(opts.ambient + (1.0 - opts.ambient) * ndotl);
  }

  void push_triangle(const Vert* v, SemanticClass cls, uint16_t material,
                     uint32_t instance, float shade) {
    ScreenTri t;
    for (int k = 0; k < 3; ++k) {
      double sx, sy, zc;
      project(v[k].world, sx, sy, zc);
      t.sx[k] = snap(sx);
      t.sy[k] = snap(sy);
      t.inv_zc[k] = perspective ? 1.0 / zc : 0.0;
      t.depth[k] = perspective ? zc : -v[k].world.z;
      t.world[k] = v[k].world;
    }
    // Wind counter-clockwise in screen space; edge-on triangles (walls
    // under an orthographic nadir camera) vanish.
    int64_t area2 = (t.sx[1] - t.sx[0]) * (t.sy[2] - t.sy[0]) -
                    (t.sy[1] - t.sy[0]) * (t.sx[2] - t.sx[0]);
    if (area2 == 0) return;
    if (area2 < 0) {
      std::swap(t.sx[1], t.sx[2]);
      std::swap(t.sy[1], t.sy[2]);
      std::swap(t.inv_zc[1], t.inv_zc[2]);
      std::swap(t.depth[1], t.depth[2]);
      std::swap(t.world[1], t.world[2]);
    }
    t.shade = shade;
    t.cls = cls;
    t.material = material;
    t.instance = instance;
    t.min_sx = std::min({t.sx[0], t.sx[1], t.sx[2]});
    t.max_sx = std::max({t.sx[0], t.sx[1], t.sx[2]});
    t.min_sy = std::min({t.sy[0], t.sy[1], t.sy[2]});
    t.max_sy = std::max({t.sy[0], t.sy[1], t.sy[2]});
    if (t.max_sx < 0 || t.max_sy < 0 || t.min_sx > int64_t(W) * kSubScale ||
        t.min_sy > int64_t(W) * kSubScale)
      return;
    tris.push_back(t);
  }

  void setup() {
    const LabeledMesh& mesh = scene.mesh;
    double near = perspective ? std::max(0.1, 0.01 * cam.height_m) : 0.0;
    tris.reserve(mesh.triangle_count());
    for (size_t i = 0; i < mesh.triangle_count(); ++i) {
      Vert v[4];
      int n = 3;
      for (int k = 0; k < 3; ++k) {
        v[k].world = mesh.vertex(i, k);
        v[k].zc = perspective ? cam.height_m - v[k].world.z : 1.0;
      }
      float shade = lambert(v[0].world, v[1].world, v[2].world);
      if (perspective) {
        // Clip against the near plane; geometry at or above the camera
        // altitude is discarded rather than rasterized wrapped.
        Vert out[4];
        int m = 0;
        for (int k = 0; k < 3; ++k) {
          const Vert& a = v[k];
          const Vert& b = v[(k + 1) % 3];
          bool ain = a.zc >= near, bin = b.zc >= near;
          if (ain) out[m++] = a;
          if (ain != bin) {
            double t = (near - a.zc) / (b.zc - a.zc);
            Vert mid;
            mid.world = a.world + (b.world - a.world) * t;
            mid.zc = near;
            out[m++] = mid;
          }
        }
        if (m < 3) continue;
        n = m;
        std::copy(out, out + m, v);
      }
      Vert fan[3] = {v[0], v[1], v[2]};
      push_triangle(fan, mesh.triangle_class(i), mesh.triangle_material(i),
                    mesh.triangle_instance(i), shade);
      if (n == 4) {
        Vert fan2[3] = {v[0], v[2], v[3]};
        push_triangle(fan2, mesh.triangle_class(i), mesh.triangle_material(i),
                      mesh.triangle_instance(i), shade);
      }
    }
  }

  // Shared-edge tie break: a pixel center exactly on an edge belongs to
  // the triangle whose directed edge points down, or left when level.
  static bool edge_accepts(int64_t e, int64_t dx, int64_t dy) {
    if (e != 0) return e > 0;
    return dy < 0 || (dy == 0 && dx < 0);
  }

  void shade_pixel(const ScreenTri& t, double w0, double w1, double w2,
                   double depth, size_t idx, Image& rgb, IdBuffer& ids,
                   std::vector<float>& zbuf) const {
    float d = static_cast<float>(depth);
    if (d >= zbuf[idx]) return;
    zbuf[idx] = d;
    ids.classes[idx] = t.cls;
    ids.instances[idx] = t.instance;
    ids.depth[idx] = d;

    Vec3 wp;
    if (perspective) {
      double iz = w0 * t.inv_zc[0] + w1 * t.inv_zc[1] + w2 * t.inv_zc[2];
      wp = (t.world[0] * (w0 * t.inv_zc[0]) + t.world[1] * (w1 * t.inv_zc[1]) +
            t.world[2] * (w2 * t.inv_zc[2])) *
           (1.0 / iz);
    } else {
      wp = t.world[0] * w0 + t.world[1] * w1 + t.world[2] * w2;
    }

    const Material& mat = scene.mesh.palette().at(t.material);
    const std::array<float, 3>* color = &mat.rgb;
    if (mat.stripe) {
      double coord = mat.stripe->axis == 'x'   ? wp.x
                     : mat.stripe->axis == 'y' ? wp.y
                                               : wp.z;
      int64_t band = static_cast<int64_t>(std::floor(coord / mat.stripe->period_m));
      if (band & 1) color = &mat.stripe->rgb2;
    }
    uint8_t* px = rgb.pixels.data() + idx * 3;
    for (int c = 0; c < 3; ++c) {
      float v = (*color)[c] * t.shade * 255.0f;
      px[c] = static_cast<uint8_t>(std::clamp(v + 0.5f, 0.0f, 255.0f));
    }
  }

  // Rasterize every triangle into rows [j0, j1). Bands never overlap, so
  // concurrent bands write disjoint pixels and the result is identical
  // for any worker count.
  void raster_band(int j0, int j1, Image& rgb, IdBuffer& ids,
                   std::vector<float>& zbuf) const {
    for (const ScreenTri& t : tris) {
      int lo_j = std::max<int64_t>(j0, (t.min_sy - kSubScale / 2) >> kSubBits);
      int hi_j = std::min<int64_t>(
          j1 - 1, (t.max_sy - kSubScale / 2 + kSubScale - 1) >> kSubBits);
      int lo_i = std::max<int64_t>(0, (t.min_sx - kSubScale / 2) >> kSubBits);
      int hi_i = std::min<int64_t>(
          W - 1, (t.max_sx - kSubScale / 2 + kSubScale - 1) >> kSubBits);
      if (lo_j > hi_j || lo_i > hi_i) continue;

      int64_t dx01 = t.sx[1] - t.sx[0], dy01 = t.sy[1] - t.sy[0];
      int64_t dx12 = t.sx[2] - t.sx[1], dy12 = t.sy[2] - t.sy[1];
      int64_t dx20 = t.sx[0] - t.sx[2], dy20 = t.sy[0] - t.sy[2];
      double inv_area2 =
          1.0 / static_cast<double>(dx01 * (t.sy[2] - t.sy[0]) -
                                    dy01 * (t.sx[2] - t.sx[0]));

      for (int j = lo_j; j <= hi_j; ++j) {
        int64_t py = int64_t(j) * kSubScale + kSubScale / 2;
        for (int i = lo_i; i <= hi_i; ++i) {
          int64_t px = int64_t(i) * kSubScale + kSubScale / 2;
          int64_t e01 = dx01 * (py - t.sy[0]) - dy01 * (px - t.sx[0]);
          int64_t e12 = dx12 * (py - t.sy[1]) - dy12 * (px - t.sx[1]);
          int64_t e20 = dx20 * (py - t.sy[2]) - dy20 * (px - t.sx[2]);
          if (!edge_accepts(e01, dx01, dy01) ||
              !edge_accepts(e12, dx12, dy12) ||
              !edge_accepts(e20, dx20, dy20))
            continue;
          double w0 = static_cast<double>(e12) * inv_area2;
          double w1 = static_cast<double>(e20) * inv_area2;
          double w2 = static_cast<double>(e01) * inv_area2;
          double depth =
              w0 * t.depth[0] + w1 * t.depth[1] + w2 * t.depth[2];
          if (perspective) {
            double iz =
                w0 * t.inv_zc[0] + w1 * t.inv_zc[1] + w2 * t.inv_zc[2];
            depth = 1.0 / iz;
          }
          shade_pixel(t, w0, w1, w2, depth, ids.index(i, j), rgb, ids, zbuf);
        }
      }
    }
  }
};

std::array<float, 3> background_color(const Scene& scene) {
  const LabeledMesh& mesh = scene.mesh;
  for (size_t i = 0; i < mesh.triangle_count(); ++i)
    if (mesh.triangle_class(i) == SemanticClass::Ground)
      return mesh.palette().at(mesh.triangle_material(i)).rgb;
  return {0.45f, 0.47f, 0.40f};
}

}  // namespace

CameraSpec plan_camera(double gsd_m, int image_px, CameraMode mode,
                       double fov_deg) {
  if (!(gsd_m > 0.0))
    throw Error(Errc::invalid_argument, "gsd must be > 0");
  if (image_px <= 0)
    throw Error(Errc::invalid_argument, "image size must be > 0");
  CameraSpec cam;
  cam.mode = mode;
  cam.image_px = image_px;
  cam.gsd_m = gsd_m;
  if (mode == CameraMode::perspective) {
    if (!(fov_deg > 0.0) || !(fov_deg < 180.0))
      throw Error(Errc::invalid_fov,
                  "InvalidFov: field of view must lie in (0, 180) degrees");
    cam.fov_deg = fov_deg;
    cam.height_m = image_px * gsd_m / (2.0 * std::tan(0.5 * fov_deg * kDeg));
  }
  return cam;
}

double camera_gsd(const CameraSpec& cam) {
  if (cam.mode == CameraMode::perspective)
    return 2.0 * cam.height_m * std::tan(0.5 * cam.fov_deg * kDeg) /
           cam.image_px;
  return cam.gsd_m;
}

RenderResult render_tile(const Scene& scene, const CameraSpec& cam,
                         const RenderOptions& opts) {
  if (cam.image_px <= 0 || !(cam.gsd_m > 0.0))
    throw Error(Errc::invalid_argument, "camera needs positive W and gsd");
  int W = cam.image_px;
  RenderResult out;
  out.rgb = Image(W, W, 3);
  out.ids = IdBuffer(W, W);

  auto [lo, hi] = cam.bounds();
  bool intersects = lo.x < scene.extent_x && hi.x > 0.0 &&
                    lo.y < scene.extent_y && hi.y > 0.0;
  out.empty_intersection = !intersects;
  bool hits = intersects && !scene.mesh.empty();

  std::vector<float> zbuf(static_cast<size_t>(W) * W,
                          std::numeric_limits<float>::infinity());

  Raster raster(scene, cam, opts);
  if (hits) {
    raster.setup();
    int workers = std::max(1, opts.workers);
    if (workers == 1) {
      raster.raster_band(0, W, out.rgb, out.ids, zbuf);
    } else {
      std::vector<std::thread> pool;
      int rows = (W + workers - 1) / workers;
      for (int w = 0; w < workers; ++w) {
        int j0 = w * rows, j1 = std::min(W, j0 + rows);
        if (j0 >= j1) break;
        pool.emplace_back([&, j0, j1] {
          raster.raster_band(j0, j1, out.rgb, out.ids, zbuf);
        });
      }
      for (auto& th : pool) th.join();
    }
  }

  // Unwritten pixels are open ground at z = 0.
  std::array<float, 3> bg = background_color(scene);
  float bg_shade = static_cast<float>(
      opts.ambient +
      (1.0 - opts.ambient) *
          std::max(0.0, std::sin(cam.sun.elevation_deg * kDeg)));
  float bg_depth = cam.mode == CameraMode::perspective
                       ? static_cast<float>(cam.height_m)
                       : 0.0f;
  for (size_t idx = 0; idx < zbuf.size(); ++idx) {
    if (!std::isinf(zbuf[idx])) continue;
    out.ids.depth[idx] = bg_depth;
    uint8_t* px = out.rgb.pixels.data() + idx * 3;
    for (int c = 0; c < 3; ++c) {
      float v = bg[c] * bg_shade * 255.0f;
      px[c] = static_cast<uint8_t>(std::clamp(v + 0.5f, 0.0f, 255.0f));
    }
  }
  return out;
}

Image extract_mask(const IdBuffer& ids) {
  Image mask(ids.width, ids.height, 1);
  for (size_t i = 0; i < ids.classes.size(); ++i)
    mask.pixels[i] = (ids.classes[i] == SemanticClass::Building ||
                      ids.classes[i] == SemanticClass::Roof)
                         ? 255
                         : 0;
  return mask;
}

Tile make_tile(const Scene& scene, const CameraSpec& cam,
               const RenderOptions& opts) {
  RenderResult r = render_tile(scene, cam, opts);
  Tile tile;
  tile.rgb = std::move(r.rgb);
  tile.mask = extract_mask(r.ids);
  auto [lo, hi] = cam.bounds();
  tile.meta.min_corner = lo;
  tile.meta.max_corner = hi;
  tile.meta.style_id = scene.style_id;
  tile.meta.world_seed = scene.world_seed;
  tile.meta.camera = cam;
  tile.meta.empty_intersection = r.empty_intersection;
  return tile;
}

}  // namespace synthcity
