#ifndef SYNTHCITY_DATASET_HPP
#define SYNTHCITY_DATASET_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "synthcity/citygen.hpp"
#include "synthcity/render.hpp"

namespace synthcity {

enum class SweepPolicy : uint8_t {
  interior_only = 0,  // every tile fits inside the extent
  clipped_cover = 1,  // tiles run past the far edge; those are marked
};

/// A regular camera grid over a world extent.
struct SweepSpec {
  double extent_x = 1000.0;
  double extent_y = 1000.0;
  double footprint_m = 171.6;  // tile side in metres (W * gsd)
  double stride_m = 0.0;       // 0 means stride = footprint (no overlap)
  SweepPolicy policy = SweepPolicy::interior_only;

  double stride() const { return stride_m > 0.0 ? stride_m : footprint_m; }
  void validate() const;  // throws Error(invalid_argument)
};

struct TileCenter {
  Vec2 center;
  size_t row = 0;
  size_t col = 0;
  bool edge = false;  // clipped-cover tile extending past the extent
};

/// Row-major grid of tile centers. Interior-only yields
/// floor((extent - footprint) / stride) + 1 per axis, or none at all when
/// the extent is narrower than one tile.
std::vector<TileCenter> sweep(const SweepSpec& spec);

struct TileRecord {
  std::string tile_id;
  std::string rgb_path;   // relative to the manifest's directory
  std::string mask_path;
  std::string style_id;
  uint64_t world_seed = 0;
  double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;
  double gsd_m = 0.3;
  int image_px = 572;
};

struct DatasetManifest {
  std::string dataset_id;
  std::string params_hash;  // digest of the creation parameters
  std::vector<TileRecord> records;
};

struct ExportOptions {
  double gsd_m = 0.3;
  int image_px = 572;
  CameraMode mode = CameraMode::orthographic;
  double fov_deg = 10.0;  // perspective mode only
  int workers = 1;
  std::string dataset_id;  // empty derives one from style and seed
};

/// Render every swept tile of a scene and write rgb/<id>.png,
/// mask/<id>.png, and manifest.jsonl under out_dir. The sweep footprint
/// must equal image_px * gsd_m (throws Error(dimension_mismatch)).
/// Deterministic: identical inputs reproduce byte-identical files. An I/O
/// failure removes the files already written before rethrowing.
DatasetManifest export_tiles(const Scene& scene, const SweepSpec& spec,
                             const std::string& out_dir,
                             const ExportOptions& opts = {});

/// JSON-lines serialization: a header line with the dataset id and
/// parameter hash, then one record per line with stable field order.
void write_manifest(const DatasetManifest& manifest, const std::string& path);
DatasetManifest load_manifest(const std::string& path);

/// Integrity check: files exist, parse as images of the declared size,
/// masks hold only {0, 255}. Returns human-readable problems, empty when
/// the manifest is sound.
std::vector<std::string> verify_manifest(const DatasetManifest& manifest,
                                         const std::string& base_dir);

struct PoolSpec {
  int tiles_per_style = 234;
  uint64_t base_seed = 0;
  RoadConfig roads;  // world template; seed and extent reused per world
  ExportOptions tile;
  SweepPolicy policy = SweepPolicy::interior_only;
  double stride_m = 0.0;
};

/// Build worlds per style (seeds derived from base_seed and the style id)
/// and export exactly tiles_per_style tiles for each, truncating the final
/// sweep. The pooled manifest lands in out_dir with every record tagged by
/// style. Throws Error(empty_result) if worlds cannot supply enough tiles
/// within the retry bound.
DatasetManifest make_style_pool(const std::vector<StyleConfig>& styles,
                                const PoolSpec& spec,
                                const std::string& out_dir);

/// Keep floor(fraction * N) records, chosen by a seeded permutation
/// prefix: for one seed the kept set at a smaller fraction is a subset of
/// the kept set at a larger one. Throws Error(empty_result) when the
/// floor reaches zero.
DatasetManifest subsample(const DatasetManifest& manifest, double fraction,
                          uint64_t seed);

struct BatchConfig {
  int batch_size = 7;
  int real_per_batch = 6;
  int synth_per_batch = 1;
  uint64_t seed = 0;

  void validate() const;  // real + synth = batch_size, all positive
};

struct Batch {
  std::vector<std::string> real;
  std::vector<std::string> synth;
};

/// Endless deterministic batch sequence: each batch draws real_per_batch
/// ids from seeded per-epoch shuffles of the real pool (every real id
/// appears once per epoch; batches may span epoch boundaries) and
/// synth_per_batch ids from an independent shuffle cycle.
class MixedBatchStream {
 public:
  MixedBatchStream(std::vector<std::string> real_ids,
                   std::vector<std::string> synth_ids,
                   const BatchConfig& config);

  Batch next();
  const BatchConfig& config() const { return config_; }

 private:
  struct Cycle {
    std::vector<std::string> ids;
    std::vector<size_t> order;
    size_t pos = 0;
    uint64_t epoch = 0;
    uint64_t stream_seed = 0;

    const std::string& next();
  };

  BatchConfig config_;
  Cycle real_;
  Cycle synth_;
};

enum class ModelKind : uint8_t { unet = 0, deeplabv3 = 1 };

const char* model_name(ModelKind m);
std::optional<ModelKind> model_from_name(std::string_view name);

struct StageSpec {
  int iterations = 0;
  double base_lr = 0.0;
  int lr_drop_iteration = 0;  // 0 means no drop within the stage
  double drop_factor = 1.0;
  std::string data;  // "mixed" or "real"
};

struct TrainingSchedule {
  ModelKind model = ModelKind::unet;
  bool with_synthetic = false;
  StageSpec stage1;
  std::optional<StageSpec> stage2;  // real-only fine-tune
};

/// The published two-stage recipe: 80,000 iterations with a 10x learning
/// rate drop at 50,000 (base lr 1e-4 for unet, 5e-5 for deeplabv3); with
/// synthetic data, a second 50,000-iteration stage at 2e-5 on real
/// imagery only.
TrainingSchedule training_schedule(ModelKind model, bool with_synthetic);

/// Machine-readable schedule document (stable field order).
std::string schedule_to_json(const TrainingSchedule& schedule);

}  // namespace synthcity

#endif  // SYNTHCITY_DATASET_HPP
