#include <algorithm>

#include "doctest.h"
#include "seedling/error.hpp"
#include "seedling/fileutil.hpp"
#include "seedling/segmentation.hpp"
#include "seedling/tensor.hpp"
#include "tempdir.hpp"

using namespace seedling;

namespace {

RasterImage random_image(int w, int h, SeededRng& rng) {
  RasterImage img(w, h, 3);
  for (auto& v : img.data()) v = static_cast<std::uint8_t>(rng.bounded(256));
  return img;
}

// Mostly green with noise, so the mask is neither empty nor full.
RasterImage greenish_image(int w, int h, SeededRng& rng) {
  RasterImage img(w, h, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const bool plant = rng.uniform() < 0.85;
      img.at(x, y, 0) = static_cast<std::uint8_t>(rng.bounded(plant ? 60 : 256));
      img.at(x, y, 1) = static_cast<std::uint8_t>(plant ? 120 + rng.bounded(136) : rng.bounded(256));
      img.at(x, y, 2) = static_cast<std::uint8_t>(rng.bounded(plant ? 60 : 256));
    }
  return img;
}

}  // namespace

TEST_SUITE("segmentation") {
  TEST_CASE("config validation") {
    SegmentationConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.erode_size = 10;
    CHECK_THROWS_AS(cfg.validate(), ArgumentError);
    cfg = {};
    cfg.blur_sigma = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  }

  TEST_CASE("uniform green keeps the interior") {
    RasterImage green(24, 20, 3);
    for (int y = 0; y < 20; ++y)
      for (int x = 0; x < 24; ++x) {
        green.at(x, y, 0) = 30;
        green.at(x, y, 1) = 180;
        green.at(x, y, 2) = 40;
      }
    const auto out = segment(green, {});
    REQUIRE(out.width() == 24);
    REQUIRE(out.height() == 20);
    for (int y = 0; y < 20; ++y)
      for (int x = 0; x < 24; ++x) {
        const bool interior = x >= 5 && x < 19 && y >= 5 && y < 15;
        REQUIRE(out.at(x, y, 1) == (interior ? 180 : 0));
      }
  }

  TEST_CASE("gray image goes black") {
    CHECK(segment(RasterImage(16, 16, 3, 128), {}) == RasterImage(16, 16, 3, 0));
  }

  TEST_CASE("segment equals the hand-chained pipeline") {
    SeededRng rng(31);
    SegmentationConfig cfg;
    cfg.erode_size = 3;
    for (int i = 0; i < 20; ++i) {
      const auto img = i % 2 ? random_image(17, 13, rng) : greenish_image(17, 13, rng);
      const auto mask = erode(hsv_mask(gaussian_blur(img, cfg.blur_size, cfg.blur_sigma), cfg.hsv_range), cfg.erode_size);
      REQUIRE(segment(img, cfg) == apply_mask(img, mask));
    }
  }

  TEST_CASE("second pass keeps a subset of the foreground") {
    SeededRng rng(2);
    SegmentationConfig cfg;
    cfg.erode_size = 3;
    for (int i = 0; i < 10; ++i) {
      const auto once = segment(greenish_image(24, 24, rng), cfg);
      const auto twice = segment(once, cfg);
      for (int y = 0; y < 24; ++y)
        for (int x = 0; x < 24; ++x) {
          const bool fg2 = twice.at(x, y, 0) || twice.at(x, y, 1) || twice.at(x, y, 2);
          const bool fg1 = once.at(x, y, 0) || once.at(x, y, 1) || once.at(x, y, 2);
          REQUIRE((!fg2 || fg1));
        }
    }
  }

  TEST_CASE("normalize") {
    const auto flat = normalize(RasterImage(9, 9, 3, 200), 4, 4);
    CHECK(flat.width == 4);
    CHECK(flat.data.size() == 48);
    CHECK(std::all_of(flat.data.begin(), flat.data.end(), [](float v) { return v == 0.0f; }));

    RasterImage two(6, 6, 3);
    for (int y = 0; y < 6; ++y)
      for (int x = 0; x < 6; ++x)
        for (int c = 0; c < 3; ++c) two.at(x, y, c) = (x + y + c) % 2 ? 255 : 0;
    const auto n2 = normalize(two, 6, 6);
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 6; ++x) REQUIRE(n2.data[(c * 6 + y) * 6 + x] == ((x + y + c) % 2 ? 1.0f : 0.0f));

    SeededRng rng(77);
    for (int i = 0; i < 50; ++i) {
      const auto n = normalize(random_image(10, 7, rng), 8, 8);
      const auto [lo, hi] = std::minmax_element(n.data.begin(), n.data.end());
      REQUIRE(*lo == 0.0f);
      REQUIRE(*hi == 1.0f);
    }
    CHECK_THROWS_AS(normalize(two, 0, 4), ArgumentError);
  }

  TEST_CASE("normalize ignores positive affine pixel maps") {
    SeededRng rng(13);
    for (int i = 0; i < 50; ++i) {
      RasterImage base(8, 8, 3);
      for (auto& v : base.data()) v = static_cast<std::uint8_t>(rng.bounded(50));
      const int a = 1 + static_cast<int>(rng.bounded(4));
      const int b = static_cast<int>(rng.bounded(50));
      RasterImage scaled = base;
      for (auto& v : scaled.data()) v = static_cast<std::uint8_t>(a * v + b);
      const auto n0 = normalize(base, 8, 8), n1 = normalize(scaled, 8, 8);
      for (std::size_t k = 0; k < n0.data.size(); ++k) REQUIRE(n1.data[k] == doctest::Approx(n0.data[k]).epsilon(1e-5));
    }
  }

  TEST_CASE("segment_directory") {
    TempDir dir("segdir");
    std::filesystem::create_directories(dir / "empty");
    CHECK(segment_directory(dir / "empty", dir / "empty_out", {}).written == 0);

    SeededRng rng(5);
    std::vector<std::pair<std::string, RasterImage>> files;
    for (const char* cls : {"alpha", "beta"}) {
      std::filesystem::create_directories(dir / "in" / cls);
      for (int i = 0; i < 3; ++i) {
        const std::string rel = std::string(cls) + "/img" + std::to_string(i) + ".ppm";
        files.emplace_back(rel, greenish_image(20, 20, rng));
        write_image(files.back().second, dir / "in" / rel);
      }
    }
    write_text_file(dir / "in" / "beta" / "broken.png", "not an image");
    const auto res = segment_directory(dir / "in", dir / "out", {});
    CHECK(res.written == 6);
    CHECK(res.skipped == 1);
    for (const auto& [rel, img] : files) REQUIRE(read_image(dir / "out" / rel) == segment(img, {}));
    CHECK_THROWS_AS(segment_directory(dir / "nope", dir / "out2", {}), IoError);
  }
}
