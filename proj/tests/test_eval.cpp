#include <doctest.h>

#include <synthcity/dataset.hpp>
#include <synthcity/errors.hpp>
#include <synthcity/eval.hpp>
#include <synthcity/image_io.hpp>
#include <synthcity/rng.hpp>

#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

using namespace synthcity;
namespace fs = std::filesystem;

namespace {

Image mask(int w, int h) { return Image(w, h, 1); }

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("iou identities") {
  Image a = mask(8, 8), b = mask(8, 8);
  CHECK(iou(a, b) == 1.0);  // both empty by convention
  for (int i = 0; i < 32; ++i) a.pixels[i] = 255;
  CHECK(iou(a, a) == 1.0);

  Image full = mask(8, 8);
  for (auto& p : full.pixels) p = 255;
  CHECK(iou(a, full) == doctest::Approx(0.5).epsilon(1e-15));

  Image disjoint = mask(8, 8);
  for (int i = 32; i < 64; ++i) disjoint.pixels[i] = 255;
  CHECK(iou(a, disjoint) == 0.0);

  try {
    iou(a, mask(4, 4));
    FAIL("expected dimension_mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::dimension_mismatch);
  }
}

TEST_CASE("iou matches a brute-force count on random masks") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    Image p = mask(64, 64), g = mask(64, 64);
    double dp = rng.uniform(0.05, 0.6), dg = rng.uniform(0.05, 0.6);
    for (auto& v : p.pixels) v = rng.uniform() < dp ? 255 : 0;
    for (auto& v : g.pixels) v = rng.uniform() < dg ? 255 : 0;
    long inter = 0, uni = 0;
    for (size_t i = 0; i < p.pixels.size(); ++i) {
      inter += p.pixels[i] && g.pixels[i];
      uni += p.pixels[i] || g.pixels[i];
    }
    double expect = uni ? double(inter) / uni : 1.0;
    CHECK(std::abs(iou(p, g) - expect) < 1e-12);
    CHECK(iou(p, g) == iou(g, p));
  }
}

TEST_CASE("turning a false positive into a true positive never hurts") {
  Rng rng(17);
  Image g = mask(32, 32), p = mask(32, 32);
  for (auto& v : g.pixels) v = rng.uniform() < 0.4 ? 255 : 0;
  for (auto& v : p.pixels) v = rng.uniform() < 0.4 ? 255 : 0;
  double prev = iou(p, g);
  for (size_t i = 0; i < p.pixels.size(); ++i) {
    if (p.pixels[i] && !g.pixels[i]) {
      // move one predicted pixel onto a missed ground-truth pixel
      for (size_t j = 0; j < p.pixels.size(); ++j) {
        if (!p.pixels[j] && g.pixels[j]) {
          p.pixels[i] = 0;
          p.pixels[j] = 255;
          double now = iou(p, g);
          CHECK(now >= prev);
          prev = now;
          break;
        }
      }
    }
  }
}

TEST_CASE("stratified report pools counts exactly") {
  // Stratum x: perfect (tp 10). Stratum y: total miss (fp 10, fn 10).
  Image p1 = mask(20, 1), g1 = mask(20, 1);
  for (int i = 0; i < 10; ++i) p1.pixels[i] = g1.pixels[i] = 255;
  Image p2 = mask(20, 1), g2 = mask(20, 1);
  for (int i = 0; i < 10; ++i) p2.pixels[i] = 255;
  for (int i = 10; i < 20; ++i) g2.pixels[i] = 255;

  std::vector<MaskPair> pairs;
  pairs.push_back({p1, g1, "x"});
  pairs.push_back({p2, g2, "y"});
  auto rep = stratified_report(pairs);
  CHECK(rep.per_stratum.at("x").iou() == 1.0);
  CHECK(rep.per_stratum.at("y").iou() == 0.0);
  CHECK(rep.overall.iou() == doctest::Approx(10.0 / 30.0).epsilon(1e-15));
  CHECK(rep.mean_per_tile == 0.5);
  CHECK(rep.pair_count == 2);

  // Pooled identity: the overall score equals the IoU of the two masks
  // laid side by side as one large mask.
  Image pc = mask(40, 1), gc = mask(40, 1);
  for (int i = 0; i < 20; ++i) {
    pc.pixels[i] = p1.pixels[i];
    gc.pixels[i] = g1.pixels[i];
    pc.pixels[20 + i] = p2.pixels[i];
    gc.pixels[20 + i] = g2.pixels[i];
  }
  CHECK(rep.overall.iou() == iou(pc, gc));

  auto txt = report_to_text(rep);
  CHECK(txt.find("overall") != std::string::npos);
  auto js = report_to_json(rep);
  CHECK(js.find("\"mean_per_tile\"") != std::string::npos);
  CHECK(js.find("\"overall\"") != std::string::npos);

  CHECK_THROWS_AS(stratified_report({}), Error);
}

TEST_CASE("benchmark split takes the first k images per region") {
  std::map<std::string, std::vector<std::string>> regions;
  for (std::string city : {"austin", "chicago", "kitsap", "tyrol", "vienna"}) {
    auto& v = regions[city];
    for (int i = 1; i <= 36; ++i) v.push_back(city + std::to_string(i));
  }
  auto split = split_benchmark(regions, 5);
  CHECK(split.test.size() == 25);
  CHECK(split.train.size() == 155);
  CHECK(split.test[0] == "austin1");
  CHECK(split.test[4] == "austin5");
  CHECK(split.train[0] == "austin6");

  // Disjoint and complete.
  std::set<std::string> seen(split.test.begin(), split.test.end());
  for (auto& id : split.train) CHECK(seen.insert(id).second);
  CHECK(seen.size() == 180);

  auto none = split_benchmark(regions, 0);
  CHECK(none.test.empty());
  CHECK(none.train.size() == 180);

  std::map<std::string, std::vector<std::string>> tiny{{"r", {"a", "b", "c"}}};
  try {
    split_benchmark(tiny, 5);
    FAIL("expected invalid_argument");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_argument);
    CHECK(std::string(e.what()).find("r") != std::string::npos);
  }
}

TEST_CASE("coverage area scales with the record count") {
  DatasetManifest m;
  CHECK(dataset_stats(m, "").covered_km2 == 0.0);
  TileRecord r;  // defaults: 572 px at 0.3 m
  r.tile_id = "t";
  r.style_id = "a";
  m.records.push_back(r);
  auto one = dataset_stats(m, "");
  CHECK(one.covered_km2 == doctest::Approx(0.02944656).epsilon(1e-9));
  CHECK(one.tiles == 1);

  for (int i = 1; i < 1640; ++i) m.records.push_back(r);
  auto big = dataset_stats(m, "");
  CHECK(big.covered_km2 == doctest::Approx(48.2924).epsilon(1e-4));
  CHECK(std::abs(big.covered_km2 - 47.0) / 47.0 < 0.05);
  CHECK(big.per_style.at("a") == 1640);

  auto txt = stats_to_text(big);
  CHECK(txt.find("km^2") != std::string::npos);
  auto js = stats_to_json(big);
  CHECK(js.find("\"covered_km2\"") != std::string::npos);
}

TEST_CASE("mask pair loading pairs files by name") {
  fs::path base = fs::temp_directory_path() / "synthcity_eval_test";
  fs::remove_all(base);
  fs::create_directories(base / "pred");
  fs::create_directories(base / "gt");

  Rng rng(9);
  for (std::string name : {"austin_1.png", "austin_2.png", "vienna_1.png"}) {
    Image m = mask(16, 16);
    for (auto& v : m.pixels) v = rng.uniform() < 0.5 ? 255 : 0;
    write_png((base / "pred" / name).string(), m);
    write_png((base / "gt" / name).string(), m);
  }
  auto pairs = load_mask_pairs((base / "pred").string(),
                               (base / "gt").string());
  REQUIRE(pairs.size() == 3);
  CHECK(pairs[0].stratum == "austin");
  CHECK(pairs[2].stratum == "vienna");
  auto rep = stratified_report(pairs);
  CHECK(rep.overall.iou() == 1.0);
  CHECK(rep.per_stratum.size() == 2);

  // A one-sided file is an error, not a silent skip.
  Image extra = mask(16, 16);
  write_png((base / "pred" / "chicago_9.png").string(), extra);
  try {
    load_mask_pairs((base / "pred").string(), (base / "gt").string());
    FAIL("expected invalid_argument");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_argument);
    CHECK(std::string(e.what()).find("chicago_9") != std::string::npos);
  }
  fs::remove_all(base);
}

}  // TEST_SUITE
