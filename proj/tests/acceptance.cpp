// End-to-end acceptance gates for the full pipeline. Each criterion prints
// exactly one [PASS]/[FAIL] line with its measured value, pinned tolerance,
// and wall time; the process exit code is the number of failures.

#include <synthcity/citygen.hpp>
#include <synthcity/dataset.hpp>
#include <synthcity/errors.hpp>
#include <synthcity/eval.hpp>
#include <synthcity/grammar.hpp>
#include <synthcity/presets.hpp>
#include <synthcity/render.hpp>
#include <synthcity/rng.hpp>
#include <synthcity/roadnet.hpp>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace synthcity;
namespace fs = std::filesystem;

namespace {

double now_s() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch())
      .count();
}

struct Outcome {
  bool pass = false;
  std::string detail;  // "measured vs tolerance" summary
};

int failures = 0;

void run_criterion(const char* id, const char* title,
                   const std::function<Outcome()>& fn) {
  double t0 = now_s();
  Outcome out;
  try {
    out = fn();
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail = std::string("unexpected exception: ") + e.what();
  }
  double dt = now_s() - t0;
  std::printf("[%s] %s %-34s %s  (%.2fs)\n", out.pass ? "PASS" : "FAIL", id,
              title, out.detail.c_str(), dt);
  std::fflush(stdout);
  if (!out.pass) ++failures;
}

std::string fmt(const char* f, ...) {
  char buf[256];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

// --- C1: IoU against brute-force counting ---------------------------------

Outcome c1_iou_oracle() {
  Rng rng(101);
  double max_err = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    Image p(64, 64, 1), g(64, 64, 1);
    double dp = rng.uniform(0.0, 0.7), dg = rng.uniform(0.0, 0.7);
    for (auto& v : p.pixels) v = rng.uniform() < dp ? 255 : 0;
    for (auto& v : g.pixels) v = rng.uniform() < dg ? 255 : 0;
    long inter = 0, uni = 0;
    for (size_t i = 0; i < p.pixels.size(); ++i) {
      inter += p.pixels[i] && g.pixels[i];
      uni += p.pixels[i] || g.pixels[i];
    }
    double expect = uni ? double(inter) / uni : 1.0;
    max_err = std::max(max_err, std::abs(iou(p, g) - expect));
    if (iou(p, g) != iou(g, p)) return {false, "asymmetric iou"};
  }
  return {max_err <= 1e-12,
          fmt("max |iou-brute| = %.2e (tol 1e-12, 1000 pairs)", max_err)};
}

// --- C2: mask pixel counts against analytic footprint areas ---------------

Outcome c2_render_calibration() {
  const double gsd = 0.3;
  const int px = 572;
  double worst = 0.0;  // |count - A/g^2| normalized by P/g
  for (int scene_i = 0; scene_i < 50; ++scene_i) {
    Rng rng(hash_combine(2025, scene_i));
    Scene scene;
    scene.extent_x = scene.extent_y = px * gsd;  // 171.6
    Material ground{"ground", {0.4f, 0.5f, 0.35f}, std::nullopt};
    Material wall{"wall", {0.8f, 0.8f, 0.75f}, std::nullopt};
    Material roof{"roof", {0.55f, 0.5f, 0.45f}, std::nullopt};
    uint16_t gm = scene.mesh.palette().intern(ground);
    uint16_t wm = scene.mesh.palette().intern(wall);
    uint16_t rm = scene.mesh.palette().intern(roof);
    double e = scene.extent_x;
    scene.mesh.add_triangle({0, 0, 0}, {e, 0, 0}, {e, e, 0},
                            SemanticClass::Ground, gm, 0);
    scene.mesh.add_triangle({0, 0, 0}, {e, e, 0}, {0, e, 0},
                            SemanticClass::Ground, gm, 0);

    // Prisms confined to disjoint 20 m grid cells so areas add exactly.
    double area = 0.0, perimeter = 0.0;
    uint32_t instance = 1;
    for (int cy = 0; cy < 8; ++cy) {
      for (int cx = 0; cx < 8; ++cx) {
        if (rng.uniform() > 0.45) continue;
        double w = rng.uniform(6.0, 16.0), d = rng.uniform(6.0, 16.0);
        double x0 = 5.8 + 20.0 * cx + rng.uniform(1.0, 19.0 - w);
        double y0 = 5.8 + 20.0 * cy + rng.uniform(1.0, 19.0 - d);
        double h = rng.uniform(3.0, 30.0);
        Vec2 c[4] = {{x0, y0}, {x0 + w, y0}, {x0 + w, y0 + d}, {x0, y0 + d}};
        for (int k = 0; k < 4; ++k) {
          Vec2 a = c[k], b = c[(k + 1) % 4];
          scene.mesh.add_triangle({a.x, a.y, 0}, {b.x, b.y, 0}, {b.x, b.y, h},
                                  SemanticClass::Building, wm, instance);
          scene.mesh.add_triangle({a.x, a.y, 0}, {b.x, b.y, h}, {a.x, a.y, h},
                                  SemanticClass::Building, wm, instance);
        }
        scene.mesh.add_triangle({c[0].x, c[0].y, h}, {c[1].x, c[1].y, h},
                                {c[2].x, c[2].y, h}, SemanticClass::Roof, rm,
                                instance);
        scene.mesh.add_triangle({c[0].x, c[0].y, h}, {c[2].x, c[2].y, h},
                                {c[3].x, c[3].y, h}, SemanticClass::Roof, rm,
                                instance);
        area += w * d;
        perimeter += 2.0 * (w + d);
        ++instance;
      }
    }
    if (area == 0.0) continue;

    CameraSpec cam = plan_camera(gsd, px, CameraMode::orthographic);
    cam.center = {scene.extent_x / 2.0, scene.extent_y / 2.0};
    Tile tile = make_tile(scene, cam);
    size_t count = 0;
    for (uint8_t v : tile.mask.pixels) count += v == 255;

    double deviation = std::abs(double(count) - area / (gsd * gsd));
    double bound = perimeter / gsd;
    worst = std::max(worst, deviation / bound);
    if (deviation > bound)
      return {false, fmt("scene %d: |%zu - %.1f| > %.1f", scene_i, count,
                         area / (gsd * gsd), bound)};
  }
  return {true, fmt("worst |count-A/g^2| at %.0f%% of the P/g bound "
                    "(50 scenes, 572px)",
                    100.0 * worst)};
}

// --- C3: road graphs stay planar with correct block counts ----------------

Outcome c3_road_topology() {
  int graphs = 0;
  for (int i = 0; i < 100; ++i) {
    Rng rng(hash_combine(77, i));
    RoadConfig cfg;
    Topology t = static_cast<Topology>(i % 3);
    cfg.topology = {{t, 1.0}};
    cfg.extent_x = rng.uniform(600.0, 1200.0);
    cfg.extent_y = rng.uniform(600.0, 1200.0);
    cfg.spacing_m = rng.uniform(100.0, 180.0);
    cfg.jitter = t == Topology::radial ? 0.0 : rng.uniform(0.0, 0.4);
    // Rings must fit inside the extent half-width.
    int max_rings = int(std::min(cfg.extent_x, cfg.extent_y) / 2.0 /
                        cfg.spacing_m);
    cfg.rings = 1 + int(rng.below(uint64_t(max_rings)));
    cfg.spokes = 5 + int(rng.below(8));
    cfg.boundary_loop = (i % 2) == 0;
    cfg.seed = hash_combine(991, i);
    RoadGraph g = generate_roads(cfg);
    ValidationReport rep = validate_graph(g);
    if (!rep.all_pass())
      return {false, fmt("graph %d (%s) failed validation", i,
                         topology_name(t))};
    extract_blocks(g);  // must not throw planarity_violation
    ++graphs;
  }
  // Zero-jitter rasters have an exact block-count oracle: n x m cells.
  for (int i = 0; i < 10; ++i) {
    Rng rng(hash_combine(303, i));
    int n = 2 + int(rng.below(5)), m = 2 + int(rng.below(5));
    RoadConfig cfg;
    cfg.spacing_m = 150.0;
    cfg.extent_x = 150.0 * n;
    cfg.extent_y = 150.0 * m;
    cfg.seed = i;
    RoadGraph g = generate_roads(cfg);
    size_t blocks = extract_blocks(g).size();
    if (blocks != size_t(n) * m)
      return {false, fmt("raster %dx%d gave %zu blocks, want %d", n, m,
                         blocks, n * m)};
    ++graphs;
  }
  return {true, fmt("%d graphs planar+connected+euler, raster counts exact",
                    graphs)};
}

// --- C4: split arithmetic is exact and strict -----------------------------

Outcome c4_split_arithmetic() {
  Rng rng(404);
  int ok_cases = 0, error_cases = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    int mode = trial % 4;
    if (mode == 0) {
      // Mixed absolute + relative entries; always feasible.
      std::vector<SizeSpec> spec;
      double scope = rng.uniform(5.0, 100.0);
      double remaining = scope * 0.8;
      int n_abs = int(rng.below(4));
      for (int k = 0; k < n_abs; ++k) {
        double s = rng.uniform(0.05, remaining / 2.0);
        spec.push_back({false, s});
        remaining -= s;
      }
      int n_rel = 1 + int(rng.below(3));
      for (int k = 0; k < n_rel; ++k)
        spec.push_back({true, rng.uniform(0.1, 2.5)});
      auto parts = apply_split(scope, spec);
      double sum = 0.0;
      for (double p : parts) sum += p;
      if (sum != scope)
        return {false, fmt("trial %d: sum %.17g != scope %.17g", trial, sum,
                           scope)};
      if (parts.size() != spec.size())
        return {false, fmt("trial %d: wrong part count", trial)};
      ++ok_cases;
    } else {
      // Dyadic absolute sizes make the comparison against the scope exact,
      // so each branch of the contract can be forced deliberately.
      int n = 1 + int(rng.below(5));
      std::vector<SizeSpec> spec;
      double sum = 0.0;
      for (int k = 0; k < n; ++k) {
        // At least two grid units, so shrinking the scope by one unit in
        // the overflow case still leaves it positive.
        double s = (2.0 + double(rng.below(63))) * 0.0625;
        spec.push_back({false, s});
        sum += s;  // exact: small dyadics
      }
      double scope = mode == 1 ? sum
                   : mode == 2 ? sum - 0.0625   // overflow: sizes > scope
                               : sum + 0.0625;  // underflow: residual left
      if (mode == 3 && rng.uniform() < 0.5)
        spec.push_back({true, 1.0});  // a relative entry absorbs the rest
      try {
        auto parts = apply_split(scope, spec);
        double got = 0.0;
        for (double p : parts) got += p;
        if (mode == 2) return {false, fmt("trial %d: overflow accepted", trial)};
        if (mode == 3 && spec.back().relative == false)
          return {false, fmt("trial %d: underflow accepted", trial)};
        if (got != scope)
          return {false, fmt("trial %d: sum %.17g != scope %.17g", trial,
                             got, scope)};
        ++ok_cases;
      } catch (const Error& e) {
        if (mode == 2 && e.code() == Errc::split_overflow) {
          ++error_cases;
        } else if (mode == 3 && e.code() == Errc::split_underflow &&
                   spec.back().relative == false) {
          ++error_cases;
        } else {
          return {false, fmt("trial %d: wrong error %s", trial, e.what())};
        }
      }
    }
  }
  return {true, fmt("%d exact partitions, %d strict errors (sum==len "
                    "bit-exact)",
                    ok_cases, error_cases)};
}

// --- C5: grammar derivation determinism and stochastic calibration --------

Outcome c5_grammar() {
  const char* source = R"(
attr base_h = rand(6, 18)
terminal Wall : Building
Lot --> setback(1.5) Parcel
Parcel --> extrude(base_h) Mass
Mass --> comp(faces) { top: Top side: Wall bottom: NIL }
Top --> 50%: roof(gable, 30) 50%: roof(flat)
)";
  GrammarProgram prog = parse_grammar(source);
  prog.link_check();
  Polygon lot = {{0, 0}, {14, 0}, {17, 9}, {8, 15}, {-1, 9}};

  for (uint64_t seed = 1; seed <= 20; ++seed) {
    LabeledMesh a = derive(lot, prog, seed);
    LabeledMesh b = derive(lot, prog, seed);
    if (a.triangle_count() != b.triangle_count())
      return {false, fmt("seed %llu: triangle counts differ",
                         (unsigned long long)seed)};
    for (size_t t = 0; t < a.triangle_count(); ++t) {
      for (int k = 0; k < 3; ++k) {
        Vec3 va = a.vertex(t, k), vb = b.vertex(t, k);
        if (va.x != vb.x || va.y != vb.y || va.z != vb.z)
          return {false, fmt("seed %llu: vertex drift", (unsigned long long)seed)};
      }
      if (a.triangle_class(t) != b.triangle_class(t))
        return {false, "class drift"};
    }
  }

  // 30/70 stochastic rule, measured over 10^4 derivations.
  const char* coin = R"(
terminal M : Building
Lot --> 30%: extrude(1) M 70%: extrude(2) M
)";
  GrammarProgram flip = parse_grammar(coin);
  flip.link_check();
  Polygon unit = {{0, 0}, {10, 0}, {10, 10}, {0, 10}};
  int tall = 0;
  const int trials = 10000;
  for (int s = 0; s < trials; ++s) {
    LabeledMesh m = derive(unit, flip, hash_combine(55, s));
    double max_z = 0.0;
    for (size_t t = 0; t < m.triangle_count(); ++t)
      for (int k = 0; k < 3; ++k) max_z = std::max(max_z, m.vertex(t, k).z);
    tall += max_z > 1.5;
  }
  double freq = double(tall) / trials;
  bool pass = std::abs(freq - 0.7) <= 0.02;
  return {pass, fmt("deterministic over 20 seeds; 70%% branch at %.4f "
                    "(tol 0.02)",
                    freq)};
}

// --- C6: end-to-end throughput ---------------------------------------------

Outcome c6_throughput() {
  WorldConfig cfg;
  cfg.world_seed = 7;
  cfg.roads.extent_x = cfg.roads.extent_y = 1000.0;
  cfg.roads.seed = hash_str(7, "roads");
  cfg.style = load_builtin_style("a");

  double t0 = now_s();
  Scene scene = build_world(cfg);

  SweepSpec spec;  // defaults: 1000 m, 171.6 m tiles, interior -> 25
  ExportOptions opts;
  opts.workers = std::max(1u, std::thread::hardware_concurrency());
  fs::path out = fs::temp_directory_path() / "synthcity_acceptance_world";
  fs::remove_all(out);
  DatasetManifest manifest = export_tiles(scene, spec, out.string(), opts);
  double dt = now_s() - t0;
  fs::remove_all(out);

  if (manifest.records.size() != 25)
    return {false, fmt("%zu tiles, want 25", manifest.records.size())};
  double covered = 25 * 0.02944656;
  double km2_per_min = covered / (dt / 60.0);
  return {dt <= 300.0, fmt("1 km^2 world + 25 tiles (572px) in %.1fs = "
                           "%.2f km^2/min (gate 300s)",
                           dt, km2_per_min)};
}

// --- C7: calibrated defaults and coverage math -----------------------------

Outcome c7_defaults() {
  TileRecord rec;
  ExportOptions opts;
  CameraSpec cam;
  if (rec.image_px != 572 || rec.gsd_m != 0.3)
    return {false, "TileRecord defaults drifted"};
  if (opts.image_px != 572 || opts.gsd_m != 0.3)
    return {false, "ExportOptions defaults drifted"};
  if (cam.image_px != 572 || cam.gsd_m != 0.3)
    return {false, "CameraSpec defaults drifted"};

  DatasetManifest m;
  m.dataset_id = "pool";
  TileRecord r;
  r.tile_id = "t";
  r.style_id = "a";
  for (int i = 0; i < 1640; ++i) m.records.push_back(r);
  double covered = dataset_stats(m, "").covered_km2;
  bool near = std::abs(covered - 48.2924) <= 0.01;
  bool near_published_scale = std::abs(covered - 47.0) / 47.0 < 0.05;
  return {near && near_published_scale,
          fmt("1640 default tiles cover %.4f km^2 (want 48.2924 +- 0.01, "
              "within 5%% of 47)",
              covered)};
}

// --- C8: mixed batches stay balanced over 10^5 batches ---------------------

Outcome c8_batch_balance() {
  for (int real_n : {120, 121}) {
    std::vector<std::string> real, synth;
    std::map<std::string, int> index;
    for (int i = 0; i < real_n; ++i) {
      real.push_back(fmt("r%03d", i));
      index[real.back()] = i;
    }
    for (int i = 0; i < 17; ++i) synth.push_back(fmt("s%02d", i));
    BatchConfig cfg;
    cfg.seed = 2024;
    MixedBatchStream stream(real, synth, cfg);
    std::vector<int> counts(real_n, 0);
    for (int b = 0; b < 100000; ++b) {
      Batch batch = stream.next();
      if (batch.real.size() != 6 || batch.synth.size() != 1)
        return {false, fmt("batch %d has wrong shape", b)};
      for (const std::string& id : batch.real) ++counts[index[id]];
      int lo = counts[0], hi = counts[0];
      for (int c : counts) {
        lo = std::min(lo, c);
        hi = std::max(hi, c);
      }
      if (hi - lo > 1)
        return {false, fmt("pool %d: spread %d after batch %d", real_n,
                           hi - lo, b)};
    }
  }
  return {true, "10^5 batches x {120,121} ids: every spread <= 1, shape 6+1"};
}

// --- C9: benchmark split protocol ------------------------------------------

Outcome c9_benchmark_split() {
  std::map<std::string, std::vector<std::string>> regions;
  for (std::string city : {"austin", "chicago", "kitsap", "tyrol", "vienna"}) {
    auto& v = regions[city];
    for (int i = 1; i <= 36; ++i) v.push_back(city + std::to_string(i));
  }
  auto split = split_benchmark(regions, 5);
  if (split.test.size() != 25 || split.train.size() != 155)
    return {false, fmt("%zu test / %zu train", split.test.size(),
                       split.train.size())};
  int pct = int(std::lround(100.0 * split.test.size() /
                            (split.test.size() + split.train.size())));
  return {pct == 14, fmt("5 regions x 36 -> 25 test / 155 train (%d%% held "
                         "out, want 14%%)",
                         pct)};
}

// --- C10: camera solve round trip ------------------------------------------

Outcome c10_camera_inverse() {
  Rng rng(1010);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    double g = rng.uniform(0.05, 2.0);
    int px = 64 + int(rng.below(1985));
    CameraSpec ortho = plan_camera(g, px, CameraMode::orthographic);
    worst = std::max(worst, std::abs(camera_gsd(ortho) - g) / g);
    double fov = rng.uniform(1.0, 120.0);
    CameraSpec persp = plan_camera(g, px, CameraMode::perspective, fov);
    worst = std::max(worst, std::abs(camera_gsd(persp) - g) / g);
  }
  return {worst <= 1e-9,
          fmt("max relative gsd error %.2e over 1000 solves x 2 modes "
              "(tol 1e-9)",
              worst)};
}

}  // namespace

int main() {
  std::printf("acceptance: %u hardware threads\n",
              std::thread::hardware_concurrency());
  run_criterion("C01", "iou matches brute-force counts", c1_iou_oracle);
  run_criterion("C02", "mask areas match geometry", c2_render_calibration);
  run_criterion("C03", "road graphs planar, counts exact", c3_road_topology);
  run_criterion("C04", "split arithmetic exact + strict", c4_split_arithmetic);
  run_criterion("C05", "grammar deterministic, calibrated", c5_grammar);
  run_criterion("C06", "world + 25-tile export throughput", c6_throughput);
  run_criterion("C07", "calibrated defaults and coverage", c7_defaults);
  run_criterion("C08", "mixed batches balanced", c8_batch_balance);
  run_criterion("C09", "benchmark split protocol", c9_benchmark_split);
  run_criterion("C10", "camera solve round trip", c10_camera_inverse);
  if (failures == 0)
    std::printf("acceptance: all criteria passed\n");
  else
    std::printf("acceptance: %d criteria FAILED\n", failures);
  return failures;
}
