#ifndef SYNTHCITY_EVAL_HPP
#define SYNTHCITY_EVAL_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "synthcity/dataset.hpp"
#include "synthcity/render.hpp"

namespace synthcity {

/// A prediction mask with its ground truth and a grouping label such as a
/// city or style id. Masks are single-channel {0, 255} images of equal size.
struct MaskPair {
  Image pred;
  Image gt;
  std::string stratum;
};

/// Pixel intersection over union of the foreground (nonzero) regions.
/// Both masks empty counts as perfect agreement and returns 1.0. Throws
/// Error(dimension_mismatch) when the shapes differ.
double iou(const Image& pred, const Image& gt);

/// Pooled confusion counts for one stratum (or the whole set).
struct StratumStats {
  uint64_t tp = 0;
  uint64_t fp = 0;
  uint64_t fn = 0;

  double iou() const {
    uint64_t denom = tp + fp + fn;
    return denom ? static_cast<double>(tp) / static_cast<double>(denom) : 1.0;
  }
};

struct IoUReport {
  std::map<std::string, StratumStats> per_stratum;
  StratumStats overall;        // pooled over every pair
  double mean_per_tile = 0.0;  // unweighted average of per-pair IoU
  size_t pair_count = 0;
};

/// Scores every pair and pools pixel counts per stratum. The overall IoU
/// is computed from the summed counts, so it equals the IoU of one giant
/// concatenated mask exactly. Throws Error(empty_result) on no pairs.
IoUReport stratified_report(const std::vector<MaskPair>& pairs);

/// Reads identically named PNG files from pred_dir and gt_dir. The stratum
/// label is the file-name prefix before the first underscore (the whole
/// stem when there is none). A file present on only one side is an error.
std::vector<MaskPair> load_mask_pairs(const std::string& pred_dir,
                                      const std::string& gt_dir);

struct BenchmarkSplit {
  std::vector<std::string> train;
  std::vector<std::string> test;
};

/// Holds out the first k_test ids of each region for testing and keeps the
/// rest for training. Regions iterate in key order; ids keep their given
/// order. Every region must have more than k_test ids, otherwise
/// Error(invalid_argument) names the offender.
BenchmarkSplit split_benchmark(
    const std::map<std::string, std::vector<std::string>>& regions,
    size_t k_test);

struct DatasetStats {
  size_t tiles = 0;
  double covered_km2 = 0.0;       // sum of (image_px * gsd)^2 over records
  double building_fraction = 0.0; // foreground share over readable masks
  std::map<std::string, size_t> per_style;
  std::vector<std::string> unreadable;  // tile ids excluded from pixel stats
};

/// Aggregates manifest-level statistics. Coverage and per-style counts come
/// from the records alone; the building fraction scans each mask under
/// base_dir. Pass an empty base_dir to skip the pixel scan (fraction stays
/// zero). Unreadable masks are listed and excluded rather than fatal.
DatasetStats dataset_stats(const DatasetManifest& manifest,
                           const std::string& base_dir);

std::string report_to_text(const IoUReport& report);
std::string report_to_json(const IoUReport& report);
std::string stats_to_text(const DatasetStats& stats);
std::string stats_to_json(const DatasetStats& stats);

}  // namespace synthcity

#endif  // SYNTHCITY_EVAL_HPP
