#include <benchmark/benchmark.h>

#include <synthcity/citygen.hpp>
#include <synthcity/grammar.hpp>
#include <synthcity/presets.hpp>
#include <synthcity/render.hpp>
#include <synthcity/rng.hpp>
#include <synthcity/roadnet.hpp>

using namespace synthcity;

static void BM_GenerateRoads(benchmark::State& state) {
  RoadConfig cfg;
  cfg.topology = {{static_cast<Topology>(state.range(0)), 1.0}};
  cfg.extent_x = cfg.extent_y = 1000.0;
  cfg.seed = 42;
  cfg.boundary_loop = true;
  for (auto _ : state) {
    RoadGraph g = generate_roads(cfg);
    benchmark::DoNotOptimize(g.nodes.data());
  }
  state.SetLabel(topology_name(static_cast<Topology>(state.range(0))));
}
BENCHMARK(BM_GenerateRoads)->Arg(0)->Arg(1)->Arg(2);

static void BM_ExtractBlocks(benchmark::State& state) {
  RoadConfig cfg;
  cfg.extent_x = cfg.extent_y = 1000.0;
  cfg.spacing_m = 120.0;
  cfg.jitter = 0.2;
  cfg.seed = 7;
  RoadGraph g = generate_roads(cfg);
  for (auto _ : state) {
    auto blocks = extract_blocks(g);
    benchmark::DoNotOptimize(blocks.data());
  }
}
BENCHMARK(BM_ExtractBlocks);

static void BM_DeriveBuilding(benchmark::State& state) {
  StyleConfig style = load_builtin_style("a");
  Polygon lot = {{0, 0}, {22, 0}, {25, 14}, {11, 20}, {-2, 12}};
  uint64_t seed = 0;
  for (auto _ : state) {
    LabeledMesh m = derive(lot, style.grammar, ++seed, &style.palette);
    benchmark::DoNotOptimize(m.triangle_count());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_DeriveBuilding);

static void BM_BuildWorld(benchmark::State& state) {
  WorldConfig cfg;
  cfg.world_seed = 5;
  cfg.roads.extent_x = cfg.roads.extent_y = double(state.range(0));
  cfg.roads.seed = hash_str(5, "roads");
  cfg.style = load_builtin_style("a");
  for (auto _ : state) {
    Scene scene = build_world(cfg);
    benchmark::DoNotOptimize(scene.building_count);
  }
  // km^2 generated per wall-clock second, the pipeline's headline number.
  double km2 = cfg.roads.extent_x * cfg.roads.extent_y / 1e6;
  state.counters["km2_per_s"] =
      benchmark::Counter(km2 * state.iterations(), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_BuildWorld)->Unit(benchmark::kMillisecond)->Arg(500)->Arg(1000);

static void BM_RenderTile(benchmark::State& state) {
  WorldConfig cfg;
  cfg.world_seed = 5;
  cfg.roads.extent_x = cfg.roads.extent_y = 400.0;
  cfg.roads.spacing_m = 110.0;
  cfg.roads.seed = hash_str(5, "roads");
  cfg.style = load_builtin_style("a");
  Scene scene = build_world(cfg);
  CameraSpec cam =
      plan_camera(0.3, int(state.range(0)), CameraMode::orthographic);
  cam.center = {200.0, 200.0};
  for (auto _ : state) {
    RenderResult r = render_tile(scene, cam);
    benchmark::DoNotOptimize(r.rgb.pixels.data());
  }
  state.counters["Mpx_per_s"] = benchmark::Counter(
      double(state.range(0)) * state.range(0) * state.iterations() / 1e6,
      benchmark::Counter::kIsRate);
}
BENCHMARK(BM_RenderTile)->Unit(benchmark::kMillisecond)->Arg(128)->Arg(572);

BENCHMARK_MAIN();
