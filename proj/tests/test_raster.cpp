#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <vector>

#include "frogsdm/raster.hpp"
#include "frogsdm/rng.hpp"
#include "frogsdm/testkit.hpp"

using namespace frogsdm;

namespace {

RasterPatch ramp_patch(int h, int w, const std::string& name) {
  RasterPatch p = make_patch(h, w, {name});
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) p.at(0, r, c) = static_cast<float>(r * w + c);
  return p;
}

}  // namespace

TEST_CASE("modality names round-trip") {
  CHECK(modality_name(Modality::RGB) == "rgb");
  CHECK(parse_modality("ndvi") == Modality::NDVI);
  CHECK_THROWS(parse_modality("thermal"));
  CHECK(is_landcover_band("lc"));
  CHECK(is_landcover_band("landcover_class"));
  CHECK(!is_landcover_band("red"));
}

TEST_CASE("patch accessors address row-major per band") {
  RasterPatch p = make_patch(2, 3, {"red", "nir"});
  p.at(1, 1, 2) = 7.0f;
  CHECK(p.bands[1].pixels[5] == 7.0f);
  CHECK(p.find_band("nir") != nullptr);
  CHECK(p.find_band("blue") == nullptr);
  CHECK_THROWS(p.band_or_throw("blue"));
  CHECK_THROWS(make_patch(0, 3, {"red"}));
}

TEST_CASE("ndvi and ndwi compute normalized differences with zero-denominator guard") {
  RasterPatch p = make_patch(1, 3, {"red", "green", "nir"});
  // pixel 0: nir 3, red 1 -> (3-1)/(3+1) = 0.5
  p.at(0, 0, 0) = 1.0f;
  p.at(2, 0, 0) = 3.0f;
  // pixel 1: nir 0, red 0 -> defined as 0
  // pixel 2: nir 2, red 6 -> (2-6)/8 = -0.5
  p.at(0, 0, 2) = 6.0f;
  p.at(2, 0, 2) = 2.0f;
  p.at(1, 0, 1) = 4.0f;  // green for ndwi: (4-0)/4 = 1

  const RasterPatch v = ndvi(p);
  REQUIRE(v.bands.size() == 1);
  CHECK(v.bands[0].name == "ndvi");
  CHECK(v.at(0, 0, 0) == 0.5f);
  CHECK(v.at(0, 0, 1) == 0.0f);
  CHECK(v.at(0, 0, 2) == -0.5f);
  for (float x : v.bands[0].pixels) {
    CHECK(x >= -1.0f);
    CHECK(x <= 1.0f);
  }

  const RasterPatch w = ndwi(p);
  CHECK(w.bands[0].name == "ndwi");
  CHECK(w.at(0, 0, 1) == 1.0f);
  CHECK_THROWS(ndvi(make_patch(1, 1, {"red"})));  // no nir band
}

TEST_CASE("resize is identity at the same dims and interpolates midpoints") {
  const RasterPatch p = ramp_patch(2, 2, "red");
  const RasterPatch same = resize_patch(p, 2, 2);
  CHECK(same.bands[0].pixels == p.bands[0].pixels);

  // align-corners on a 2x2 ramp {0,1;2,3}: middle column is the mean
  const RasterPatch wide = resize_patch(p, 2, 3);
  CHECK(wide.at(0, 0, 0) == 0.0f);
  CHECK(wide.at(0, 0, 1) == 0.5f);
  CHECK(wide.at(0, 0, 2) == 1.0f);
  CHECK(wide.at(0, 1, 1) == 2.5f);

  // collapsing to one pixel samples the centre
  const RasterPatch one = resize_patch(p, 1, 1);
  CHECK(one.at(0, 0, 0) == 1.5f);
  CHECK_THROWS(resize_patch(p, 0, 2));
}

TEST_CASE("landcover bands resize by nearest neighbour and stay integral") {
  RasterPatch p = make_patch(2, 2, {"landcover_class"});
  p.at(0, 0, 0) = 3.0f;
  p.at(0, 0, 1) = 5.0f;
  p.at(0, 1, 0) = 7.0f;
  p.at(0, 1, 1) = 9.0f;
  const RasterPatch big = resize_patch(p, 5, 5);
  const std::set<float> allowed{3.0f, 5.0f, 7.0f, 9.0f};
  for (float x : big.bands[0].pixels) CHECK(allowed.count(x) == 1);
}

TEST_CASE("sliding window counts and copies blocks") {
  const RasterPatch p = ramp_patch(4, 5, "red");
  const auto wins = sliding_window(p, 2, 2, 1);
  CHECK(wins.size() == 12);  // 3 * 4 placements
  CHECK(wins[0].at(0, 0, 0) == 0.0f);
  CHECK(wins[0].at(0, 1, 1) == 6.0f);
  CHECK(sliding_window(p, 2, 2, 2).size() == 4);
  CHECK(sliding_window(p, 4, 5, 1).size() == 1);
  CHECK_THROWS(sliding_window(p, 6, 2, 1));
  CHECK_THROWS(sliding_window(p, 2, 2, 0));
}

TEST_CASE("hflip mirrors columns and is an involution") {
  const RasterPatch p = ramp_patch(2, 3, "red");
  const RasterPatch f = hflip(p);
  CHECK(f.at(0, 0, 0) == 2.0f);
  CHECK(f.at(0, 0, 2) == 0.0f);
  CHECK(f.at(0, 1, 1) == 4.0f);
  CHECK(hflip(f).bands[0].pixels == p.bands[0].pixels);
}

TEST_CASE("zero rotation and unit scale are identities") {
  const RasterPatch p = ramp_patch(5, 5, "red");
  CHECK(rotate(p, 0.0).bands[0].pixels == p.bands[0].pixels);
  CHECK(scale(p, 1.0).bands[0].pixels == p.bands[0].pixels);
}

TEST_CASE("rotation by 360 degrees returns close to the input away from edges") {
  const RasterPatch p = ramp_patch(9, 9, "red");
  const RasterPatch r = rotate(p, 360.0);
  for (int i = 2; i < 7; ++i)
    for (int j = 2; j < 7; ++j)
      CHECK_THAT(r.at(0, i, j), Catch::Matchers::WithinAbs(p.at(0, i, j), 1e-3));
}

TEST_CASE("augment preserves dims, bands and landcover integrality") {
  RasterPatch p = make_patch(6, 6, {"red", "landcover_class"});
  Rng fill(4);
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 6; ++c) {
      p.at(0, r, c) = static_cast<float>(fill.uniform());
      p.at(1, r, c) = static_cast<float>(fill.uniform_index(kLandcoverClasses));
    }

  AugmentationConfig cfg;
  Rng rng(17);
  for (int i = 0; i < 25; ++i) {
    const RasterPatch a = augment(p, cfg, rng);
    CHECK(a.height == 6);
    CHECK(a.width == 6);
    REQUIRE(a.bands.size() == 2);
    CHECK(a.bands[1].name == "landcover_class");
    for (float x : a.bands[1].pixels) {
      CHECK(x == std::floor(x));
      CHECK(x >= 0.0f);
      CHECK(x < static_cast<float>(kLandcoverClasses));
    }
  }

  AugmentationConfig resized;
  resized.resize_targets = {{3, 4}};
  const RasterPatch a = augment(p, resized, rng);
  CHECK(a.height == 3);
  CHECK(a.width == 4);

  // determinism: the same seed yields the same augmented pixels
  Rng r1(99), r2(99);
  CHECK(augment(p, cfg, r1).bands[0].pixels == augment(p, cfg, r2).bands[0].pixels);
}

TEST_CASE("identity augmentation config is a no-op") {
  const RasterPatch p = ramp_patch(4, 4, "red");
  AugmentationConfig cfg;
  cfg.hflip_prob = 0.0;
  cfg.rotation_min_deg = cfg.rotation_max_deg = 0.0;
  cfg.scale_min = cfg.scale_max = 1.0;
  Rng rng(1);
  CHECK(augment(p, cfg, rng).bands[0].pixels == p.bands[0].pixels);
}

TEST_CASE("dominant landcover is the mode with ties to the lowest class") {
  RasterPatch p = make_patch(2, 2, {"lc"});
  p.at(0, 0, 0) = 4.0f;
  p.at(0, 0, 1) = 4.0f;
  p.at(0, 1, 0) = 2.0f;
  p.at(0, 1, 1) = 2.0f;
  CHECK(dominant_landcover(p) == 2);  // tie 2 vs 4
  p.at(0, 1, 1) = 4.0f;
  CHECK(dominant_landcover(p) == 4);
  p.at(0, 0, 0) = 99.0f;
  CHECK_THROWS(dominant_landcover(p));
  CHECK_THROWS(dominant_landcover(make_patch(1, 1, {"red"})));
}

TEST_CASE("patch binary io round-trips bit-exactly") {
  RasterPatch p = make_patch(3, 4, {"red", "green", "blue", "nir"});
  Rng rng(8);
  for (auto& b : p.bands)
    for (auto& x : b.pixels) x = static_cast<float>(rng.uniform(-5.0, 5.0));

  TempDir dir("raster");
  const auto path = dir.path() / "p.bin";
  write_patch(p, path);
  const RasterPatch q = read_patch(path);
  CHECK(q.height == 3);
  CHECK(q.width == 4);
  REQUIRE(q.bands.size() == 4);
  for (std::size_t b = 0; b < 4; ++b) {
    CHECK(q.bands[b].name == p.bands[b].name);
    CHECK(q.bands[b].pixels == p.bands[b].pixels);
  }
  CHECK_THROWS(read_patch(dir.path() / "missing.bin"));

  // corrupt magic is rejected
  {
    std::ofstream bad(dir.path() / "bad.bin", std::ios::binary);
    bad << "XXXX1234567890";
  }
  CHECK_THROWS(read_patch(dir.path() / "bad.bin"));
}

TEST_CASE("band_to_text prints a matrix of numbers") {
  const RasterPatch p = ramp_patch(2, 2, "red");
  const std::string text = band_to_text(p, "red");
  CHECK(text.find('0') != std::string::npos);
  CHECK(text.find('3') != std::string::npos);
  CHECK_THROWS(band_to_text(p, "nope"));
}
