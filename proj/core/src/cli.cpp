#include "synthcity/cli.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "synthcity/citygen.hpp"
#include "synthcity/dataset.hpp"
#include "synthcity/errors.hpp"
#include "synthcity/eval.hpp"
#include "synthcity/presets.hpp"
#include "synthcity/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace synthcity {

namespace {

enum LogLevel { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

int log_level() {
  static int level = [] {
    const char* env = std::getenv("SYNTHCITY_LOG");
    if (!env) return kWarn;
    std::string v = env;
    if (v == "error" || v == "0") return kError;
    if (v == "warn" || v == "1") return kWarn;
    if (v == "info" || v == "2") return kInfo;
    if (v == "debug" || v == "3") return kDebug;
    std::fprintf(stderr, "synthcity: unknown SYNTHCITY_LOG level '%s'\n", env);
    return kWarn;
  }();
  return level;
}

void log(int level, const char* tag, const std::string& msg) {
  if (level <= log_level())
    std::fprintf(stderr, "[%s] %s\n", tag, msg.c_str());
}

double now_s() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(Errc::io_error, "cannot open '" + path + "'");
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os)
    throw Error(Errc::io_error, "cannot open '" + path + "' for writing");
  os << body;
  os.flush();
  if (!os) throw Error(Errc::io_error, "short write to '" + path + "'");
}

json parse_config(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(Errc::config_error,
                "'" + path + "' is not valid JSON: " + e.what());
  }
}

// Configs are schema-checked before any work starts; a typo in a key name
// must fail loudly instead of silently running with a default.
void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!obj.is_object())
    throw Error(Errc::config_error, where + " must be a JSON object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key))
      throw Error(Errc::config_error,
                  "unknown key '" + key + "' in " + where);
}

void check_world_keys(const json& world) {
  check_keys(world, {"world_seed", "extent", "roads", "style"}, "world");
  if (world.contains("roads"))
    check_keys(world.at("roads"),
               {"topology", "spacing_m", "jitter", "seed", "rings", "spokes",
                "boundary_loop", "arterial_width_m", "local_width_m"},
               "world.roads");
  if (world.contains("style") && world.at("style").is_object())
    check_keys(world.at("style"),
               {"base", "building_prob", "tree_density", "min_lot_area_m2",
                "street_setback_m"},
               "world.style");
}

SweepPolicy parse_policy(const std::string& name) {
  if (name == "interior" || name == "interior_only")
    return SweepPolicy::interior_only;
  if (name == "clipped" || name == "clipped_cover")
    return SweepPolicy::clipped_cover;
  throw Error(Errc::config_error, "unknown sweep policy '" + name + "'");
}

CameraMode parse_mode(const std::string& name) {
  if (name == "orthographic" || name == "ortho")
    return CameraMode::orthographic;
  if (name == "perspective") return CameraMode::perspective;
  throw Error(Errc::config_error, "unknown camera mode '" + name + "'");
}

ExportOptions parse_tile(const json& tile, int workers) {
  check_keys(tile, {"gsd_m", "image_px", "mode", "fov_deg"}, "tile");
  ExportOptions opts;
  if (tile.contains("gsd_m")) opts.gsd_m = tile.at("gsd_m").get<double>();
  if (tile.contains("image_px"))
    opts.image_px = tile.at("image_px").get<int>();
  if (tile.contains("mode"))
    opts.mode = parse_mode(tile.at("mode").get<std::string>());
  if (tile.contains("fov_deg"))
    opts.fov_deg = tile.at("fov_deg").get<double>();
  opts.workers = workers;
  return opts;
}

RoadConfig parse_roads(const json& roads) {
  // Reuse the world-config loader so the roads schema has one definition.
  json wrapper;
  wrapper["roads"] = roads;
  check_world_keys(wrapper);
  return load_world_config(wrapper.dump()).roads;
}

std::string resolve_out(const std::string& flag, const json& cfg,
                        const char* key = "out_dir") {
  if (!flag.empty()) return flag;
  if (cfg.contains(key)) return cfg.at(key).get<std::string>();
  throw Error(Errc::config_error,
              std::string("no output location: pass --out or set '") + key +
                  "' in the config");
}

void scene_logs(const Scene& scene) {
  for (const std::string& w : scene.warnings) log(kWarn, "warn", w);
  log(kInfo, "info",
      "world " + std::to_string(scene.world_seed) + " style " +
          scene.style_id + ": " + std::to_string(scene.building_count) +
          " buildings on " + std::to_string(scene.lot_count) + " lots");
}

struct GenerateArgs {
  std::string config;
  std::string out;
  std::optional<uint64_t> seed;
  int workers = 1;
};

int cmd_generate(const GenerateArgs& args) {
  json cfg = parse_config(args.config);
  check_keys(cfg, {"world", "sweep", "tile", "out_dir", "dataset_id",
                   "export_obj"},
             "config");
  if (!cfg.contains("world"))
    throw Error(Errc::config_error, "config is missing 'world'");
  check_world_keys(cfg.at("world"));

  json world = cfg.at("world");
  if (args.seed) world["world_seed"] = *args.seed;
  WorldConfig wc = load_world_config(world.dump());

  std::string out_dir = resolve_out(args.out, cfg);
  fs::create_directories(out_dir);

  Scene scene = build_world(wc);
  scene_logs(scene);

  SweepSpec sweep_spec;
  sweep_spec.extent_x = scene.extent_x;
  sweep_spec.extent_y = scene.extent_y;
  if (cfg.contains("sweep")) {
    const json& sw = cfg.at("sweep");
    check_keys(sw, {"policy", "stride_m"}, "sweep");
    if (sw.contains("policy"))
      sweep_spec.policy = parse_policy(sw.at("policy").get<std::string>());
    if (sw.contains("stride_m"))
      sweep_spec.stride_m = sw.at("stride_m").get<double>();
  }
  ExportOptions opts =
      parse_tile(cfg.contains("tile") ? cfg.at("tile") : json::object(),
                 args.workers);
  if (cfg.contains("dataset_id"))
    opts.dataset_id = cfg.at("dataset_id").get<std::string>();
  sweep_spec.footprint_m = opts.image_px * opts.gsd_m;

  double t0 = now_s();
  DatasetManifest manifest = export_tiles(scene, sweep_spec, out_dir, opts);
  double export_s = now_s() - t0;

  if (cfg.value("export_obj", false)) {
    std::ofstream os(fs::path(out_dir) / "scene.obj",
                     std::ios::binary | std::ios::trunc);
    if (!os) throw Error(Errc::io_error, "cannot write scene.obj");
    write_obj(os, scene.mesh);
  }

  double covered_km2 = 0.0;
  for (const TileRecord& r : manifest.records) {
    double side = r.image_px * r.gsd_m;
    covered_km2 += side * side / 1e6;
  }
  double total_s = scene.timings.total_s + export_s;
  double km2_per_min = total_s > 0.0 ? covered_km2 / (total_s / 60.0) : 0.0;

  ordered_json report;
  report["dataset_id"] = manifest.dataset_id;
  report["params_hash"] = manifest.params_hash;
  report["style"] = scene.style_id;
  report["world_seed"] = scene.world_seed;
  report["extent_m"] = {scene.extent_x, scene.extent_y};
  report["buildings"] = scene.building_count;
  report["lots"] = scene.lot_count;
  report["warnings"] = scene.warnings.size();
  report["tiles"] = manifest.records.size();
  report["covered_km2"] = covered_km2;
  report["timings_s"] = {{"roads", scene.timings.roads_s},
                         {"blocks", scene.timings.blocks_s},
                         {"populate", scene.timings.populate_s},
                         {"export", export_s},
                         {"total", total_s}};
  report["km2_per_min"] = km2_per_min;
  write_file((fs::path(out_dir) / "run_report.json").string(),
             report.dump(2) + "\n");

  std::printf("%s: %zu tiles, %.4f km^2, %zu buildings\n",
              manifest.dataset_id.c_str(), manifest.records.size(),
              covered_km2, scene.building_count);
  std::printf("throughput: %.2f km^2/min (%.2f min per km^2) in %.1f s\n",
              km2_per_min, km2_per_min > 0.0 ? 1.0 / km2_per_min : 0.0,
              total_s);
  return 0;
}

struct PoolArgs {
  std::string config;
  std::string out;
  std::string styles;
  std::optional<uint64_t> seed;
  int workers = 1;
};

int cmd_pool(const PoolArgs& args) {
  json cfg = args.config.empty() ? json::object() : parse_config(args.config);
  check_keys(cfg, {"styles", "tiles_per_style", "base_seed", "roads", "tile",
                   "policy", "stride_m", "out_dir"},
             "config");

  PoolSpec spec;
  if (cfg.contains("tiles_per_style"))
    spec.tiles_per_style = cfg.at("tiles_per_style").get<int>();
  if (cfg.contains("base_seed"))
    spec.base_seed = cfg.at("base_seed").get<uint64_t>();
  if (args.seed) spec.base_seed = *args.seed;
  if (cfg.contains("roads")) spec.roads = parse_roads(cfg.at("roads"));
  spec.tile =
      parse_tile(cfg.contains("tile") ? cfg.at("tile") : json::object(),
                 args.workers);
  if (cfg.contains("policy"))
    spec.policy = parse_policy(cfg.at("policy").get<std::string>());
  if (cfg.contains("stride_m"))
    spec.stride_m = cfg.at("stride_m").get<double>();

  std::vector<std::string> ids;
  if (!args.styles.empty()) {
    std::stringstream ss(args.styles);
    std::string part;
    while (std::getline(ss, part, ','))
      if (!part.empty()) ids.push_back(part);
  } else if (cfg.contains("styles")) {
    ids = cfg.at("styles").get<std::vector<std::string>>();
  } else {
    ids = {"a", "b", "c", "g", "h", "i"};
  }
  std::vector<StyleConfig> styles;
  styles.reserve(ids.size());
  for (const std::string& id : ids) styles.push_back(load_builtin_style(id));

  std::string out_dir = resolve_out(args.out, cfg);
  fs::create_directories(out_dir);
  DatasetManifest manifest = make_style_pool(styles, spec, out_dir);

  DatasetStats stats = dataset_stats(manifest, "");
  std::printf("%s: %zu tiles over %zu styles, %.4f km^2\n",
              manifest.dataset_id.c_str(), manifest.records.size(),
              stats.per_style.size(), stats.covered_km2);
  return 0;
}

struct SubsampleArgs {
  std::string manifest;
  std::string out;
  double fraction = 1.0;
  uint64_t seed = 0;
};

int cmd_subsample(const SubsampleArgs& args) {
  DatasetManifest full = load_manifest(args.manifest);
  DatasetManifest kept = subsample(full, args.fraction, args.seed);

  // Records point at files relative to their manifest; keep them valid
  // from the new location.
  fs::path in_base = fs::absolute(fs::path(args.manifest)).parent_path();
  fs::path out_base = fs::absolute(args.out);
  for (TileRecord& r : kept.records) {
    for (std::string* rel : {&r.rgb_path, &r.mask_path}) {
      fs::path abs = in_base / *rel;
      fs::path moved = abs.lexically_relative(out_base);
      *rel = moved.empty() ? abs.generic_string() : moved.generic_string();
    }
  }
  fs::create_directories(args.out);
  write_manifest(kept, (fs::path(args.out) / "manifest.jsonl").string());
  std::printf("%s: kept %zu of %zu records\n", kept.dataset_id.c_str(),
              kept.records.size(), full.records.size());
  return 0;
}

struct BatchplanArgs {
  std::string config;
  std::string out;
  std::optional<uint64_t> seed;
};

std::vector<std::string> read_id_lines(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(Errc::io_error, "cannot open '" + path + "'");
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(is, line))
    if (!line.empty()) ids.push_back(line);
  return ids;
}

int cmd_batchplan(const BatchplanArgs& args) {
  json cfg = parse_config(args.config);
  check_keys(cfg, {"real_ids", "real_ids_file", "synth_ids", "synth_manifest",
                   "batches", "seed", "batch", "out"},
             "config");

  std::vector<std::string> real;
  if (cfg.contains("real_ids"))
    real = cfg.at("real_ids").get<std::vector<std::string>>();
  else if (cfg.contains("real_ids_file"))
    real = read_id_lines(cfg.at("real_ids_file").get<std::string>());
  else
    throw Error(Errc::config_error,
                "config needs 'real_ids' or 'real_ids_file'");

  std::vector<std::string> synth;
  if (cfg.contains("synth_ids"))
    synth = cfg.at("synth_ids").get<std::vector<std::string>>();
  else if (cfg.contains("synth_manifest"))
    for (const TileRecord& r :
         load_manifest(cfg.at("synth_manifest").get<std::string>()).records)
      synth.push_back(r.tile_id);
  else
    throw Error(Errc::config_error,
                "config needs 'synth_ids' or 'synth_manifest'");

  BatchConfig bc;
  if (cfg.contains("batch")) {
    const json& b = cfg.at("batch");
    check_keys(b, {"batch_size", "real_per_batch", "synth_per_batch"},
               "batch");
    if (b.contains("batch_size")) bc.batch_size = b.at("batch_size").get<int>();
    if (b.contains("real_per_batch"))
      bc.real_per_batch = b.at("real_per_batch").get<int>();
    if (b.contains("synth_per_batch"))
      bc.synth_per_batch = b.at("synth_per_batch").get<int>();
  }
  bc.seed = cfg.value("seed", uint64_t{0});
  if (args.seed) bc.seed = *args.seed;
  size_t batches = cfg.value("batches", size_t{1000});

  std::string out_path = args.out;
  if (out_path.empty()) out_path = resolve_out("", cfg, "out");

  MixedBatchStream stream(real, synth, bc);
  std::ostringstream os;
  for (size_t i = 0; i < batches; ++i) {
    Batch b = stream.next();
    ordered_json line;
    line["real"] = b.real;
    line["synth"] = b.synth;
    os << line.dump() << '\n';
  }
  write_file(out_path, os.str());
  std::printf("%zu batches (%d real + %d synthetic) -> %s\n", batches,
              bc.real_per_batch, bc.synth_per_batch, out_path.c_str());
  return 0;
}

struct EvalArgs {
  std::string pred;
  std::string gt;
  std::string out;
};

int cmd_eval(const EvalArgs& args) {
  std::vector<MaskPair> pairs = load_mask_pairs(args.pred, args.gt);
  IoUReport report = stratified_report(pairs);
  std::fputs(report_to_text(report).c_str(), stdout);
  if (!args.out.empty()) write_file(args.out, report_to_json(report));
  return 0;
}

struct StatsArgs {
  std::string manifest;
  std::string base;
  std::string out;
  bool no_pixels = false;
};

int cmd_stats(const StatsArgs& args) {
  DatasetManifest manifest = load_manifest(args.manifest);
  std::string base = args.base;
  if (base.empty() && !args.no_pixels)
    base = fs::path(args.manifest).parent_path().string();
  if (args.no_pixels) base.clear();
  DatasetStats stats = dataset_stats(manifest, base);
  std::fputs(stats_to_text(stats).c_str(), stdout);
  if (!args.out.empty()) write_file(args.out, stats_to_json(stats));
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"synthetic overhead-imagery dataset generator"};
  app.require_subcommand(1);
  int default_workers =
      std::max(1u, std::thread::hardware_concurrency());

  GenerateArgs gen;
  gen.workers = default_workers;
  CLI::App* c_gen =
      app.add_subcommand("generate", "build one world and export its tiles");
  c_gen->add_option("--config", gen.config, "config file (JSON)")
      ->required();
  c_gen->add_option("--out", gen.out, "output directory");
  c_gen->add_option("--seed", gen.seed, "override the world seed");
  c_gen->add_option("--workers", gen.workers, "tile render threads");

  PoolArgs pool;
  pool.workers = default_workers;
  CLI::App* c_pool =
      app.add_subcommand("pool", "export a fixed-size pool per style");
  c_pool->add_option("--config", pool.config, "config file (JSON)");
  c_pool->add_option("--out", pool.out, "output directory");
  c_pool->add_option("--seed", pool.seed, "override the base seed");
  c_pool->add_option("--workers", pool.workers, "tile render threads");
  c_pool->add_option("--styles", pool.styles,
                     "comma-separated style ids (default a,b,c,g,h,i)");

  SubsampleArgs sub;
  CLI::App* c_sub =
      app.add_subcommand("subsample", "keep a seeded fraction of a manifest");
  c_sub->add_option("--manifest", sub.manifest, "input manifest.jsonl")
      ->required();
  c_sub->add_option("--out", sub.out, "output directory")->required();
  c_sub->add_option("--fraction", sub.fraction, "fraction to keep in (0,1]")
      ->required();
  c_sub->add_option("--seed", sub.seed, "selection seed");

  BatchplanArgs plan;
  CLI::App* c_plan = app.add_subcommand(
      "batchplan", "write a deterministic mixed-batch plan (JSONL)");
  c_plan->add_option("--config", plan.config, "config file (JSON)")
      ->required();
  c_plan->add_option("--out", plan.out, "plan file path");
  c_plan->add_option("--seed", plan.seed, "override the stream seed");

  EvalArgs ev;
  CLI::App* c_eval = app.add_subcommand(
      "eval", "stratified IoU of prediction masks against ground truth");
  c_eval->add_option("--pred", ev.pred, "directory of prediction masks")
      ->required();
  c_eval->add_option("--gt", ev.gt, "directory of ground-truth masks")
      ->required();
  c_eval->add_option("--out", ev.out, "also write the report as JSON here");

  StatsArgs st;
  CLI::App* c_stats =
      app.add_subcommand("stats", "summarize a dataset manifest");
  c_stats->add_option("--manifest", st.manifest, "manifest.jsonl path")
      ->required();
  c_stats->add_option("--base", st.base,
                      "directory the record paths are relative to");
  c_stats->add_option("--out", st.out, "also write the stats as JSON here");
  c_stats->add_flag("--no-pixels", st.no_pixels,
                    "skip reading masks for the building fraction");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (c_gen->parsed()) return cmd_generate(gen);
    if (c_pool->parsed()) return cmd_pool(pool);
    if (c_sub->parsed()) return cmd_subsample(sub);
    if (c_plan->parsed()) return cmd_batchplan(plan);
    if (c_eval->parsed()) return cmd_eval(ev);
    if (c_stats->parsed()) return cmd_stats(st);
  } catch (const Error& e) {
    std::fprintf(stderr, "synthcity: error: %s\n", e.what());
    return e.code() == Errc::config_error ? 2 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "synthcity: error: %s\n", e.what());
    return 1;
  }
  return 0;
}

}  // namespace synthcity
