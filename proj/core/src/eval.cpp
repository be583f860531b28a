#include "synthcity/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <set>
#include <sstream>

#include <json.hpp>

#include "synthcity/errors.hpp"
#include "synthcity/image_io.hpp"

namespace fs = std::filesystem;

namespace synthcity {

namespace {

// A pixel is foreground when any of its channels is nonzero. Masks are
// single-channel in practice; this keeps accidental RGB masks working.
bool foreground(const Image& img, size_t pixel) {
  size_t base = pixel * img.channels;
  for (int c = 0; c < img.channels; ++c)
    if (img.pixels[base + c]) return true;
  return false;
}

StratumStats count_pair(const Image& pred, const Image& gt) {
  if (pred.width != gt.width || pred.height != gt.height)
    throw Error(Errc::dimension_mismatch,
                "mask shapes differ: " + std::to_string(pred.width) + "x" +
                    std::to_string(pred.height) + " vs " +
                    std::to_string(gt.width) + "x" +
                    std::to_string(gt.height));
  StratumStats s;
  size_t n = static_cast<size_t>(pred.width) * pred.height;
  for (size_t i = 0; i < n; ++i) {
    bool p = foreground(pred, i);
    bool g = foreground(gt, i);
    s.tp += p && g;
    s.fp += p && !g;
    s.fn += !p && g;
  }
  return s;
}

std::string fixed(double v, int places) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.*f", places, v);
  return buf;
}

nlohmann::ordered_json stats_json(const StratumStats& s) {
  nlohmann::ordered_json j;
  j["tp"] = s.tp;
  j["fp"] = s.fp;
  j["fn"] = s.fn;
  j["iou"] = s.iou();
  return j;
}

}  // namespace

double iou(const Image& pred, const Image& gt) {
  return count_pair(pred, gt).iou();
}

IoUReport stratified_report(const std::vector<MaskPair>& pairs) {
  if (pairs.empty())
    throw Error(Errc::empty_result, "no mask pairs to score");
  IoUReport report;
  report.pair_count = pairs.size();
  double iou_sum = 0.0;
  for (const MaskPair& pair : pairs) {
    StratumStats s = count_pair(pair.pred, pair.gt);
    StratumStats& bucket = report.per_stratum[pair.stratum];
    bucket.tp += s.tp;
    bucket.fp += s.fp;
    bucket.fn += s.fn;
    report.overall.tp += s.tp;
    report.overall.fp += s.fp;
    report.overall.fn += s.fn;
    iou_sum += s.iou();
  }
  report.mean_per_tile = iou_sum / static_cast<double>(pairs.size());
  return report;
}

std::vector<MaskPair> load_mask_pairs(const std::string& pred_dir,
                                      const std::string& gt_dir) {
  auto list_pngs = [](const std::string& dir) {
    if (!fs::is_directory(dir))
      throw Error(Errc::io_error, "'" + dir + "' is not a directory");
    std::set<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (!entry.is_regular_file()) continue;
      if (entry.path().extension() == ".png")
        names.insert(entry.path().filename().string());
    }
    return names;
  };

  std::set<std::string> pred_names = list_pngs(pred_dir);
  std::set<std::string> gt_names = list_pngs(gt_dir);
  for (const std::string& name : pred_names)
    if (!gt_names.count(name))
      throw Error(Errc::invalid_argument,
                  "'" + name + "' has no ground-truth counterpart");
  for (const std::string& name : gt_names)
    if (!pred_names.count(name))
      throw Error(Errc::invalid_argument,
                  "'" + name + "' has no prediction counterpart");

  std::vector<MaskPair> pairs;
  pairs.reserve(pred_names.size());
  for (const std::string& name : pred_names) {
    MaskPair pair;
    pair.pred = read_png((fs::path(pred_dir) / name).string());
    pair.gt = read_png((fs::path(gt_dir) / name).string());
    std::string stem = fs::path(name).stem().string();
    pair.stratum = stem.substr(0, stem.find('_'));
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

BenchmarkSplit split_benchmark(
    const std::map<std::string, std::vector<std::string>>& regions,
    size_t k_test) {
  BenchmarkSplit split;
  for (const auto& [region, ids] : regions) {
    if (ids.size() <= k_test)
      throw Error(Errc::invalid_argument,
                  "region '" + region + "' has " + std::to_string(ids.size()) +
                      " tiles, needs more than " + std::to_string(k_test));
    split.test.insert(split.test.end(), ids.begin(),
                      ids.begin() + static_cast<ptrdiff_t>(k_test));
    split.train.insert(split.train.end(),
                       ids.begin() + static_cast<ptrdiff_t>(k_test),
                       ids.end());
  }
  return split;
}

DatasetStats dataset_stats(const DatasetManifest& manifest,
                           const std::string& base_dir) {
  DatasetStats stats;
  stats.tiles = manifest.records.size();
  uint64_t building_px = 0;
  uint64_t total_px = 0;
  for (const TileRecord& r : manifest.records) {
    double side = r.image_px * r.gsd_m;
    stats.covered_km2 += side * side / 1e6;
    ++stats.per_style[r.style_id];
    if (base_dir.empty()) continue;
    try {
      Image mask = read_png((fs::path(base_dir) / r.mask_path).string());
      size_t n = static_cast<size_t>(mask.width) * mask.height;
      for (size_t i = 0; i < n; ++i) building_px += foreground(mask, i);
      total_px += n;
    } catch (const Error&) {
      stats.unreadable.push_back(r.tile_id);
    }
  }
  if (total_px)
    stats.building_fraction =
        static_cast<double>(building_px) / static_cast<double>(total_px);
  return stats;
}

std::string report_to_text(const IoUReport& report) {
  // Strata as columns, metrics as rows, mirroring the usual benchmark
  // table layout. Detailed pixel counts follow underneath.
  std::vector<std::string> names;
  for (const auto& [name, s] : report.per_stratum) names.push_back(name);
  names.push_back("overall");

  std::vector<size_t> widths;
  for (const std::string& n : names) widths.push_back(std::max<size_t>(n.size(), 6));

  std::ostringstream os;
  os << "        ";
  for (size_t i = 0; i < names.size(); ++i)
    os << "  " << std::string(widths[i] - names[i].size(), ' ') << names[i];
  os << '\n' << "iou     ";
  for (size_t i = 0; i < names.size(); ++i) {
    const StratumStats& s = i + 1 < names.size()
                                ? report.per_stratum.at(names[i])
                                : report.overall;
    std::string v = fixed(s.iou(), 4);
    os << "  " << std::string(widths[i] - v.size(), ' ') << v;
  }
  os << "\n\n";
  os << "stratum  tp  fp  fn\n";
  for (const auto& [name, s] : report.per_stratum)
    os << name << "  " << s.tp << "  " << s.fp << "  " << s.fn << '\n';
  os << "overall  " << report.overall.tp << "  " << report.overall.fp << "  "
     << report.overall.fn << '\n';
  os << "mean per-tile iou over " << report.pair_count
     << " pairs: " << fixed(report.mean_per_tile, 4) << '\n';
  return os.str();
}

std::string report_to_json(const IoUReport& report) {
  nlohmann::ordered_json j;
  j["strata"] = nlohmann::ordered_json::object();
  for (const auto& [name, s] : report.per_stratum) j["strata"][name] = stats_json(s);
  j["overall"] = stats_json(report.overall);
  j["mean_per_tile"] = report.mean_per_tile;
  j["pairs"] = report.pair_count;
  return j.dump(2) + "\n";
}

std::string stats_to_text(const DatasetStats& stats) {
  std::ostringstream os;
  os << "tiles:             " << stats.tiles << '\n';
  os << "covered area:      " << fixed(stats.covered_km2, 4) << " km^2\n";
  os << "building fraction: " << fixed(stats.building_fraction, 4) << '\n';
  os << "per style:\n";
  for (const auto& [style, n] : stats.per_style)
    os << "  " << style << ": " << n << '\n';
  if (!stats.unreadable.empty()) {
    os << "unreadable masks (" << stats.unreadable.size() << "):\n";
    for (const std::string& id : stats.unreadable) os << "  " << id << '\n';
  }
  return os.str();
}

std::string stats_to_json(const DatasetStats& stats) {
  nlohmann::ordered_json j;
  j["tiles"] = stats.tiles;
  j["covered_km2"] = stats.covered_km2;
  j["building_fraction"] = stats.building_fraction;
  j["per_style"] = nlohmann::ordered_json::object();
  for (const auto& [style, n] : stats.per_style) j["per_style"][style] = n;
  j["unreadable"] = stats.unreadable;
  return j.dump(2) + "\n";
}

}  // namespace synthcity
