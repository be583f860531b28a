#include "synthcity/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

#include <json.hpp>

#include "synthcity/errors.hpp"
#include "synthcity/image_io.hpp"
#include "synthcity/rng.hpp"

namespace fs = std::filesystem;

namespace synthcity {

namespace {

// Grid counting tolerance: an extent that equals a whole number of strides
// up to floating-point noise must not lose its last row of tiles.
constexpr double kGridEps = 1e-9;

std::string hex_hash(uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

size_t axis_count(double extent, double footprint, double stride,
                  SweepPolicy policy) {
  if (policy == SweepPolicy::interior_only) {
    if (extent - footprint < -kGridEps) return 0;
    return static_cast<size_t>(
               std::floor((extent - footprint) / stride + kGridEps)) +
           1;
  }
  if (extent - footprint <= kGridEps) return 1;
  return static_cast<size_t>(
             std::ceil((extent - footprint) / stride - kGridEps)) +
         1;
}

nlohmann::ordered_json record_json(const TileRecord& r) {
  nlohmann::ordered_json j;
  j["tile_id"] = r.tile_id;
  j["rgb"] = r.rgb_path;
  j["mask"] = r.mask_path;
  j["style"] = r.style_id;
  j["world_seed"] = r.world_seed;
  j["bounds"] = {r.min_x, r.min_y, r.max_x, r.max_y};
  j["gsd_m"] = r.gsd_m;
  j["image_px"] = r.image_px;
  return j;
}

TileRecord record_from_json(const nlohmann::json& j) {
  TileRecord r;
  r.tile_id = j.at("tile_id").get<std::string>();
  r.rgb_path = j.at("rgb").get<std::string>();
  r.mask_path = j.at("mask").get<std::string>();
  r.style_id = j.at("style").get<std::string>();
  r.world_seed = j.at("world_seed").get<uint64_t>();
  const auto& b = j.at("bounds");
  r.min_x = b.at(0).get<double>();
  r.min_y = b.at(1).get<double>();
  r.max_x = b.at(2).get<double>();
  r.max_y = b.at(3).get<double>();
  r.gsd_m = j.at("gsd_m").get<double>();
  r.image_px = j.at("image_px").get<int>();
  return r;
}

CameraSpec base_camera(const ExportOptions& opts) {
  CameraSpec cam = opts.mode == CameraMode::perspective
                       ? plan_camera(opts.gsd_m, opts.image_px,
                                     CameraMode::perspective, opts.fov_deg)
                       : plan_camera(opts.gsd_m, opts.image_px,
                                     CameraMode::orthographic);
  return cam;
}

// Renders the given centers into out_dir/rgb and out_dir/mask, appending
// one record per tile. Written file paths accumulate in `written` so the
// caller can clean up after a failure. Tiles render in parallel; outputs
// are independent of the worker count.
void export_centers(const Scene& scene, const std::vector<TileCenter>& centers,
                    const CameraSpec& base_cam, const fs::path& out_dir,
                    int workers, std::vector<TileRecord>& records,
                    std::vector<std::string>& written) {
  fs::create_directories(out_dir / "rgb");
  fs::create_directories(out_dir / "mask");

  size_t n = centers.size();
  std::vector<TileRecord> slots(n);
  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex mu;

  auto run = [&] {
    for (;;) {
      if (failed.load()) return;
      size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        const TileCenter& tc = centers[i];
        CameraSpec cam = base_cam;
        cam.center = tc.center;
        Tile tile = make_tile(scene, cam);

        char id[96];
        std::snprintf(id, sizeof(id), "%s_w%llu_r%03zu_c%03zu",
                      scene.style_id.c_str(),
                      static_cast<unsigned long long>(scene.world_seed),
                      tc.row, tc.col);
        TileRecord rec;
        rec.tile_id = id;
        rec.rgb_path = std::string("rgb/") + id + ".png";
        rec.mask_path = std::string("mask/") + id + ".png";
        rec.style_id = scene.style_id;
        rec.world_seed = scene.world_seed;
        rec.min_x = tile.meta.min_corner.x;
        rec.min_y = tile.meta.min_corner.y;
        rec.max_x = tile.meta.max_corner.x;
        rec.max_y = tile.meta.max_corner.y;
        rec.gsd_m = cam.gsd_m;
        rec.image_px = cam.image_px;

        fs::path rgb_file = out_dir / rec.rgb_path;
        fs::path mask_file = out_dir / rec.mask_path;
        {
          std::lock_guard lock(mu);
          written.push_back(rgb_file.string());
          written.push_back(mask_file.string());
        }
        write_png(rgb_file.string(), tile.rgb);
        write_png(mask_file.string(), tile.mask);
        slots[i] = std::move(rec);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failed.exchange(true)) first_error = std::current_exception();
      }
    }
  };

  int pool_size = std::max(1, workers);
  if (pool_size == 1 || n <= 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < std::min<int>(pool_size, static_cast<int>(n)); ++w)
      pool.emplace_back(run);
    for (auto& t : pool) t.join();
  }
  if (failed.load()) std::rethrow_exception(first_error);
  for (auto& rec : slots) records.push_back(std::move(rec));
}

void remove_files(const std::vector<std::string>& paths) {
  std::error_code ec;
  for (const auto& p : paths) fs::remove(p, ec);
}

uint64_t export_params_hash(const Scene& scene, const SweepSpec& spec,
                            const ExportOptions& opts) {
  uint64_t h = hash_str(0, "export");
  h = hash_str(h, scene.style_id);
  h = hash_combine(h, scene.world_seed);
  auto mix_double = [&](double v) {
    uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(bits));
    h = hash_combine(h, bits);
  };
  mix_double(spec.extent_x);
  mix_double(spec.extent_y);
  mix_double(spec.footprint_m);
  mix_double(spec.stride());
  h = hash_combine(h, static_cast<uint64_t>(spec.policy));
  mix_double(opts.gsd_m);
  h = hash_combine(h, static_cast<uint64_t>(opts.image_px));
  h = hash_combine(h, static_cast<uint64_t>(opts.mode));
  return h;
}

}  // namespace

void SweepSpec::validate() const {
  if (!(extent_x > 0.0) || !(extent_y > 0.0))
    throw Error(Errc::invalid_argument, "sweep extent must be positive");
  if (!(footprint_m > 0.0))
    throw Error(Errc::invalid_argument, "tile footprint must be positive");
  if (stride_m < 0.0)
    throw Error(Errc::invalid_argument, "stride must be positive");
}

std::vector<TileCenter> sweep(const SweepSpec& spec) {
  spec.validate();
  double step = spec.stride();
  size_t nx = axis_count(spec.extent_x, spec.footprint_m, step, spec.policy);
  size_t ny = axis_count(spec.extent_y, spec.footprint_m, step, spec.policy);
  double half = 0.5 * spec.footprint_m;

  std::vector<TileCenter> out;
  out.reserve(nx * ny);
  for (size_t row = 0; row < ny; ++row) {
    for (size_t col = 0; col < nx; ++col) {
      TileCenter tc;
      tc.center = {half + col * step, half + row * step};
      tc.row = row;
      tc.col = col;
      tc.edge = tc.center.x + half > spec.extent_x + kGridEps ||
                tc.center.y + half > spec.extent_y + kGridEps;
      out.push_back(tc);
    }
  }
  return out;
}

DatasetManifest export_tiles(const Scene& scene, const SweepSpec& spec,
                             const std::string& out_dir,
                             const ExportOptions& opts) {
  spec.validate();
  double cam_footprint = opts.image_px * opts.gsd_m;
  if (std::abs(cam_footprint - spec.footprint_m) >
      1e-9 * std::max(1.0, cam_footprint))
    throw Error(Errc::dimension_mismatch,
                "sweep footprint does not match image_px * gsd");

  DatasetManifest manifest;
  manifest.dataset_id = opts.dataset_id.empty()
                            ? scene.style_id + "_w" +
                                  std::to_string(scene.world_seed)
                            : opts.dataset_id;
  manifest.params_hash = hex_hash(export_params_hash(scene, spec, opts));

  std::vector<TileCenter> centers = sweep(spec);
  std::vector<std::string> written;
  try {
    export_centers(scene, centers, base_camera(opts), out_dir, opts.workers,
                   manifest.records, written);
    std::sort(manifest.records.begin(), manifest.records.end(),
              [](const TileRecord& a, const TileRecord& b) {
                return a.tile_id < b.tile_id;
              });
    write_manifest(manifest, (fs::path(out_dir) / "manifest.jsonl").string());
  } catch (...) {
    remove_files(written);
    std::error_code ec;
    fs::remove(fs::path(out_dir) / "manifest.jsonl", ec);
    throw;
  }
  return manifest;
}

void write_manifest(const DatasetManifest& manifest, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os)
    throw Error(Errc::io_error, "cannot open '" + path + "' for writing");
  nlohmann::ordered_json head;
  head["dataset_id"] = manifest.dataset_id;
  head["params_hash"] = manifest.params_hash;
  head["record_count"] = manifest.records.size();
  os << head.dump() << '\n';
  for (const TileRecord& r : manifest.records) os << record_json(r).dump() << '\n';
  os.flush();
  if (!os) throw Error(Errc::io_error, "short write to '" + path + "'");
}

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(Errc::io_error, "cannot open '" + path + "'");
  DatasetManifest manifest;
  std::string line;
  size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      if (lineno == 1 && j.contains("dataset_id")) {
        manifest.dataset_id = j.at("dataset_id").get<std::string>();
        manifest.params_hash = j.value("params_hash", std::string{});
        continue;
      }
      manifest.records.push_back(record_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::io_error, path + ":" + std::to_string(lineno) +
                                      ": bad manifest line: " + e.what());
    }
  }
  return manifest;
}

std::vector<std::string> verify_manifest(const DatasetManifest& manifest,
                                         const std::string& base_dir) {
  std::vector<std::string> problems;
  std::set<std::string> seen;
  for (const TileRecord& r : manifest.records) {
    if (!seen.insert(r.tile_id).second)
      problems.push_back("duplicate tile id " + r.tile_id);
    for (const std::string* rel : {&r.rgb_path, &r.mask_path}) {
      fs::path p = fs::path(base_dir) / *rel;
      if (!fs::exists(p)) {
        problems.push_back(r.tile_id + ": missing file " + rel->c_str());
        continue;
      }
      try {
        Image img = read_png(p.string());
        if (img.width != r.image_px || img.height != r.image_px)
          problems.push_back(r.tile_id + ": " + *rel + " is " +
                             std::to_string(img.width) + "x" +
                             std::to_string(img.height) + ", expected " +
                             std::to_string(r.image_px));
        if (rel == &r.mask_path) {
          if (img.channels != 1) {
            problems.push_back(r.tile_id + ": mask is not single channel");
          } else {
            for (uint8_t v : img.pixels)
              if (v != 0 && v != 255) {
                problems.push_back(r.tile_id + ": mask holds value " +
                                   std::to_string(v));
                break;
              }
          }
        }
      } catch (const Error& e) {
        problems.push_back(r.tile_id + ": " + e.what());
      }
    }
  }
  return problems;
}

DatasetManifest make_style_pool(const std::vector<StyleConfig>& styles,
                                const PoolSpec& spec,
                                const std::string& out_dir) {
  if (styles.empty())
    throw Error(Errc::invalid_argument, "style pool needs at least one style");
  if (spec.tiles_per_style <= 0)
    throw Error(Errc::invalid_argument, "tiles_per_style must be positive");

  SweepSpec sweep_spec;
  sweep_spec.extent_x = spec.roads.extent_x;
  sweep_spec.extent_y = spec.roads.extent_y;
  sweep_spec.footprint_m = spec.tile.image_px * spec.tile.gsd_m;
  sweep_spec.stride_m = spec.stride_m;
  sweep_spec.policy = spec.policy;
  std::vector<TileCenter> centers = sweep(sweep_spec);
  if (centers.empty())
    throw Error(Errc::empty_result,
                "world extent is narrower than one tile; the pool can never "
                "fill");

  size_t per_world = centers.size();
  size_t worlds_needed =
      (static_cast<size_t>(spec.tiles_per_style) + per_world - 1) / per_world;
  size_t retry_bound = 2 * worlds_needed + 3;

  DatasetManifest manifest;
  manifest.dataset_id = "pool_b" + std::to_string(spec.base_seed);
  uint64_t h = hash_str(0, "pool");
  h = hash_combine(h, spec.base_seed);
  h = hash_combine(h, static_cast<uint64_t>(spec.tiles_per_style));
  for (const StyleConfig& s : styles) h = hash_str(h, s.id);
  manifest.params_hash = hex_hash(h);

  std::vector<std::string> written;
  try {
    for (const StyleConfig& style : styles) {
      size_t have = 0;
      uint64_t style_seed = hash_str(spec.base_seed, style.id);
      for (size_t k = 0; have < static_cast<size_t>(spec.tiles_per_style);
           ++k) {
        if (k >= retry_bound)
          throw Error(Errc::empty_result,
                      "style '" + style.id + "' produced only " +
                          std::to_string(have) + " of " +
                          std::to_string(spec.tiles_per_style) +
                          " tiles within the world retry bound");
        WorldConfig cfg;
        cfg.roads = spec.roads;
        cfg.style = style;
        cfg.world_seed = hash_combine(style_seed, k);
        cfg.roads.seed = hash_str(cfg.world_seed, "roads");
        cfg.roads.boundary_loop = true;
        Scene scene = build_world(cfg);

        size_t want = static_cast<size_t>(spec.tiles_per_style) - have;
        std::vector<TileCenter> take(
            centers.begin(),
            centers.begin() +
                static_cast<ptrdiff_t>(std::min(want, per_world)));
        export_centers(scene, take, base_camera(spec.tile), out_dir,
                       spec.tile.workers, manifest.records, written);
        have += take.size();
      }
    }
    std::sort(manifest.records.begin(), manifest.records.end(),
              [](const TileRecord& a, const TileRecord& b) {
                return a.tile_id < b.tile_id;
              });
    write_manifest(manifest, (fs::path(out_dir) / "manifest.jsonl").string());
  } catch (...) {
    remove_files(written);
    std::error_code ec;
    fs::remove(fs::path(out_dir) / "manifest.jsonl", ec);
    throw;
  }
  return manifest;
}

DatasetManifest subsample(const DatasetManifest& manifest, double fraction,
                          uint64_t seed) {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw Error(Errc::invalid_argument, "fraction must lie in (0, 1]");
  size_t n = manifest.records.size();
  size_t keep = static_cast<size_t>(std::floor(fraction * n + 1e-12));
  if (keep == 0)
    throw Error(Errc::empty_result,
                "subsample would keep zero of " + std::to_string(n) +
                    " records");

  std::vector<size_t> perm(n);
  std::iota(perm.begin(), perm.end(), size_t{0});
  Rng rng(hash_str(seed, "subsample"));
  rng.shuffle(perm);

  DatasetManifest out;
  out.dataset_id = manifest.dataset_id + "_sub";
  uint64_t h = hash_str(0, "subsample");
  h = hash_str(h, manifest.params_hash);
  uint64_t fbits;
  std::memcpy(&fbits, &fraction, sizeof(fbits));
  h = hash_combine(hash_combine(h, fbits), seed);
  out.params_hash = hex_hash(h);

  out.records.reserve(keep);
  for (size_t i = 0; i < keep; ++i)
    out.records.push_back(manifest.records[perm[i]]);
  std::sort(out.records.begin(), out.records.end(),
            [](const TileRecord& a, const TileRecord& b) {
              return a.tile_id < b.tile_id;
            });
  return out;
}

void BatchConfig::validate() const {
  if (real_per_batch < 0 || synth_per_batch < 0 || batch_size <= 0)
    throw Error(Errc::invalid_argument, "batch sizes must be positive");
  if (real_per_batch + synth_per_batch != batch_size)
    throw Error(Errc::invalid_argument,
                "real_per_batch + synth_per_batch must equal batch_size");
}

const std::string& MixedBatchStream::Cycle::next() {
  if (pos == order.size()) {
    if (order.empty()) {
      order.resize(ids.size());
      std::iota(order.begin(), order.end(), size_t{0});
    }
    Rng rng(hash_combine(stream_seed, epoch));
    rng.shuffle(order);
    ++epoch;
    pos = 0;
  }
  return ids[order[pos++]];
}

MixedBatchStream::MixedBatchStream(std::vector<std::string> real_ids,
                                   std::vector<std::string> synth_ids,
                                   const BatchConfig& config)
    : config_(config) {
  config_.validate();
  if (real_ids.empty() || synth_ids.empty())
    throw Error(Errc::empty_result, "batch stream pools must be nonempty");
  if (real_ids.size() < static_cast<size_t>(config_.real_per_batch))
    throw Error(Errc::invalid_argument,
                "real pool smaller than one batch's real share");
  if (synth_ids.size() < static_cast<size_t>(config_.synth_per_batch))
    throw Error(Errc::invalid_argument,
                "synthetic pool smaller than one batch's synthetic share");
  real_.ids = std::move(real_ids);
  real_.stream_seed = hash_str(config_.seed, "real");
  synth_.ids = std::move(synth_ids);
  synth_.stream_seed = hash_str(config_.seed, "synth");
}

Batch MixedBatchStream::next() {
  Batch b;
  b.real.reserve(config_.real_per_batch);
  for (int i = 0; i < config_.real_per_batch; ++i) b.real.push_back(real_.next());
  b.synth.reserve(config_.synth_per_batch);
  for (int i = 0; i < config_.synth_per_batch; ++i)
    b.synth.push_back(synth_.next());
  return b;
}

const char* model_name(ModelKind m) {
  return m == ModelKind::unet ? "unet" : "deeplabv3";
}

std::optional<ModelKind> model_from_name(std::string_view name) {
  if (name == "unet") return ModelKind::unet;
  if (name == "deeplabv3") return ModelKind::deeplabv3;
  return std::nullopt;
}

TrainingSchedule training_schedule(ModelKind model, bool with_synthetic) {
  TrainingSchedule s;
  s.model = model;
  s.with_synthetic = with_synthetic;
  s.stage1.iterations = 80000;
  s.stage1.base_lr = model == ModelKind::unet ? 1e-4 : 5e-5;
  s.stage1.lr_drop_iteration = 50000;
  s.stage1.drop_factor = 10.0;
  s.stage1.data = with_synthetic ? "mixed" : "real";
  if (with_synthetic) {
    StageSpec fine;
    fine.iterations = 50000;
    fine.base_lr = 2e-5;
    fine.lr_drop_iteration = 0;
    fine.drop_factor = 1.0;
    fine.data = "real";
    s.stage2 = fine;
  }
  return s;
}

std::string schedule_to_json(const TrainingSchedule& schedule) {
  auto stage = [](const StageSpec& s) {
    nlohmann::ordered_json j;
    j["iterations"] = s.iterations;
    j["base_lr"] = s.base_lr;
    j["lr_drop_iteration"] = s.lr_drop_iteration;
    j["drop_factor"] = s.drop_factor;
    j["data"] = s.data;
    return j;
  };
  nlohmann::ordered_json j;
  j["model"] = model_name(schedule.model);
  j["with_synthetic"] = schedule.with_synthetic;
  j["stage1"] = stage(schedule.stage1);
  if (schedule.stage2) j["stage2"] = stage(*schedule.stage2);
  return j.dump(2) + "\n";
}

}  // namespace synthcity
