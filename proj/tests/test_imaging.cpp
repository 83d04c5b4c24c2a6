#include <cmath>
#include <fstream>
#include <numeric>

#include "doctest.h"
#include "seedling/error.hpp"
#include "seedling/fileutil.hpp"
#include "seedling/imaging.hpp"
#include "seedling/tensor.hpp"
#include "tempdir.hpp"

using namespace seedling;

namespace {

RasterImage random_image(int w, int h, SeededRng& rng, int channels = 3) {
  RasterImage img(w, h, channels);
  for (auto& v : img.data()) v = static_cast<std::uint8_t>(rng.bounded(256));
  return img;
}

}  // namespace

TEST_SUITE("imaging") {
  TEST_CASE("raster image invariants") {
    CHECK_THROWS_AS(RasterImage(0, 3, 3), ArgumentError);
    CHECK_THROWS_AS(RasterImage(2, 2, 2), ArgumentError);
    CHECK_THROWS_AS(RasterImage(2, 2, 3, std::vector<std::uint8_t>(11)), ArgumentError);
    RasterImage img(3, 2, 3, 7);
    CHECK(img.data().size() == 18);
    CHECK(img.at(2, 1, 2) == 7);
  }

  TEST_CASE("read a 2x2 red P6") {
    TempDir dir("img");
    const std::string ppm = std::string("P6\n# red\n2 2\n255\n") + std::string("\xff\x00\x00", 3) +
                            std::string("\xff\x00\x00", 3) + std::string("\xff\x00\x00", 3) +
                            std::string("\xff\x00\x00", 3);
    write_text_file(dir / "red.ppm", ppm);
    const RasterImage img = read_image(dir / "red.ppm");
    REQUIRE(img.width() == 2);
    REQUIRE(img.height() == 2);
    REQUIRE(img.channels() == 3);
    for (int y = 0; y < 2; ++y)
      for (int x = 0; x < 2; ++x) {
        CHECK(img.at(x, y, 0) == 255);
        CHECK(img.at(x, y, 1) == 0);
        CHECK(img.at(x, y, 2) == 0);
      }
  }

  TEST_CASE("grayscale P5 expands to three channels") {
    TempDir dir("img");
    write_text_file(dir / "g.ppm", std::string("P5 2 1 255\n") + std::string("\x10\x80", 2));
    const RasterImage img = read_image(dir / "g.ppm");
    CHECK(img.channels() == 3);
    CHECK(img.at(1, 0, 0) == 0x80);
    CHECK(img.at(1, 0, 2) == 0x80);
  }

  TEST_CASE("decode errors name the file") {
    TempDir dir("img");
    SeededRng rng(3);
    write_image(random_image(8, 8, rng), dir / "a.png");
    std::string bytes = read_text_file(dir / "a.png");
    write_text_file(dir / "cut.png", bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_WITH_AS(read_image(dir / "cut.png"), doctest::Contains("corrupt PNG stream"), FormatError);
    CHECK_THROWS_WITH_AS(read_image(dir / "cut.png"), doctest::Contains("cut.png"), FormatError);

    write_text_file(dir / "short.ppm", "P6\n4 4\n255\nabc");
    CHECK_THROWS_AS(read_image(dir / "short.ppm"), FormatError);
    write_text_file(dir / "junk.png", "hello world");
    CHECK_THROWS_AS(read_image(dir / "junk.png"), FormatError);
    CHECK_THROWS_AS(read_image(dir / "missing.png"), IoError);
  }

  TEST_CASE("encode/decode round trip") {
    TempDir dir("img");
    SeededRng rng(11);
    for (int i = 0; i < 100; ++i) {
      const RasterImage img = random_image(8, 8, rng);
      const auto path = dir / (i % 2 ? "r.png" : "r.ppm");
      write_image(img, path);
      REQUIRE(read_image(path) == img);
    }
    const RasterImage one = random_image(1, 1, rng);
    write_image(one, dir / "one.png");
    CHECK(read_image(dir / "one.png") == one);
    write_image(one, dir / "one.ppm");
    CHECK(read_image(dir / "one.ppm") == one);
  }

  TEST_CASE("write failures") {
    RasterImage img(2, 2, 3);
    CHECK_THROWS_AS(write_image(img, "/nonexistent-dir/x/y.png"), IoError);
    CHECK_THROWS_AS(write_image(img, "/nonexistent-dir/x/y.ppm"), IoError);
    TempDir dir("img");
    CHECK_THROWS_AS(write_image(img, dir / "y.bmp"), FormatError);
  }

  TEST_CASE("gaussian kernel") {
    CHECK(gaussian_kernel(1, 2.0) == std::vector<double>{1.0});
    for (int size : {3, 5, 7, 11}) {
      for (double sigma : {0.3, 1.0, 2.5}) {
        const auto k = gaussian_kernel(size, sigma);
        CHECK(std::abs(std::accumulate(k.begin(), k.end(), 0.0) - 1.0) <= 1e-12);
        for (int i = 0; i < size; ++i) CHECK(k[i] == k[size - 1 - i]);
      }
    }
    const auto k = gaussian_kernel(5, 1.0);
    double raw[5], total = 0.0;
    for (int i = 0; i < 5; ++i) total += raw[i] = std::exp(-(i - 2.0) * (i - 2.0) / 2.0);
    for (int i = 0; i < 5; ++i) CHECK(k[i] == doctest::Approx(raw[i] / total).epsilon(1e-14));
    CHECK_THROWS_AS(gaussian_kernel(4, 1.0), ArgumentError);
    CHECK_THROWS_AS(gaussian_kernel(0, 1.0), ArgumentError);
    CHECK_THROWS_AS(gaussian_kernel(3, 0.0), ArgumentError);
  }

  TEST_CASE("blur") {
    RasterImage flat(7, 5, 3, 93);
    CHECK(gaussian_blur(flat, 5, 1.3) == flat);

    RasterImage dot(5, 5, 1, 0);
    dot.at(2, 2, 0) = 255;
    const auto out = gaussian_blur(dot, 3, 1.0);
    const auto k = gaussian_kernel(3, 1.0);
    for (int y = 1; y <= 3; ++y)
      for (int x = 1; x <= 3; ++x) CHECK(out.at(x, y, 0) == to_u8(255.0 * k[y - 1] * k[x - 1]));
    CHECK(out.at(0, 0, 0) == 0);
  }

  TEST_CASE("rgb to hsv") {
    auto red = rgb_to_hsv(255, 0, 0);
    CHECK(red.h == 0.0);
    CHECK(red.s == 1.0);
    CHECK(red.v == 1.0);
    auto green = rgb_to_hsv(0, 255, 0);
    CHECK(green.h == 120.0);
    auto gray = rgb_to_hsv(128, 128, 128);
    CHECK(gray.h == 0.0);
    CHECK(gray.s == 0.0);
    CHECK(gray.v == doctest::Approx(128.0 / 255.0));
    CHECK(rgb_to_hsv(0, 0, 0).s == 0.0);

    SeededRng rng(5);
    for (int i = 0; i < 1000; ++i) {
      const auto r = static_cast<std::uint8_t>(rng.bounded(256)), g = static_cast<std::uint8_t>(rng.bounded(256)),
                 b = static_cast<std::uint8_t>(rng.bounded(256));
      const auto p = rgb_to_hsv(r, g, b);
      REQUIRE(p.h >= 0.0);
      REQUIRE(p.h < 360.0);
      const auto back = hsv_to_rgb(p);
      REQUIRE(std::abs(back[0] - r) <= 1);
      REQUIRE(std::abs(back[1] - g) <= 1);
      REQUIRE(std::abs(back[2] - b) <= 1);
    }
  }

  TEST_CASE("hsv mask") {
    const HsvRange def;
    RasterImage green(6, 4, 3);
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 6; ++x) green.at(x, y, 1) = 200;
    CHECK(hsv_mask(green, def).count() == 24);
    CHECK(hsv_mask(RasterImage(6, 4, 3, 120), def).count() == 0);
    CHECK_THROWS_AS(hsv_mask(RasterImage(2, 2, 1), def), ArgumentError);

    SeededRng rng(8);
    const auto img = random_image(20, 20, rng);
    HsvRange wrap{300.0, 30.0, 0.2, 1.0, 0.1, 0.9};
    for (const auto& range : {def, wrap}) {
      const auto m = hsv_mask(img, range);
      for (int y = 0; y < 20; ++y)
        for (int x = 0; x < 20; ++x) {
          const auto p = rgb_to_hsv(img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2));
          const bool hue = range.h_lo <= range.h_hi ? (p.h >= range.h_lo && p.h <= range.h_hi)
                                                    : (p.h >= range.h_lo || p.h <= range.h_hi);
          const bool want = hue && p.s >= range.s_lo && p.s <= range.s_hi && p.v >= range.v_lo && p.v <= range.v_hi;
          REQUIRE(m.at(x, y) == want);
        }
    }
  }

  TEST_CASE("erode") {
    CHECK(erode(BinaryMask(12, 12, false), 3).count() == 0);
    BinaryMask single(15, 15, false);
    single.set(7, 7, true);
    CHECK(erode(single, 11).count() == 0);
    CHECK(erode(single, 1) == single);
    CHECK_THROWS_AS(erode(single, 4), ArgumentError);

    // Full mask: only pixels at least r from every edge survive.
    const auto full = erode(BinaryMask(20, 16, true), 11);
    CHECK(full.count() == (20 - 10) * (16 - 10));
    CHECK(full.at(5, 5));
    CHECK_FALSE(full.at(4, 5));

    SeededRng rng(21);
    for (int i = 0; i < 50; ++i) {
      BinaryMask a(16, 16), b(16, 16);
      for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) {
          const bool va = rng.uniform() < 0.8;
          a.set(x, y, va);
          b.set(x, y, va || rng.uniform() < 0.5);
        }
      const auto ea = erode(a, 3), eb = erode(b, 3);
      for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) {
          REQUIRE((!ea.at(x, y) || a.at(x, y)));   // anti-extensive
          REQUIRE((!ea.at(x, y) || eb.at(x, y)));  // monotone
        }
    }
  }

  TEST_CASE("apply mask") {
    SeededRng rng(4);
    const auto img = random_image(6, 6, rng);
    CHECK(apply_mask(img, BinaryMask(6, 6, true)) == img);
    CHECK(apply_mask(img, BinaryMask(6, 6, false)) == RasterImage(6, 6, 3, 0));
    BinaryMask checker(6, 6);
    for (int y = 0; y < 6; ++y)
      for (int x = 0; x < 6; ++x) checker.set(x, y, (x + y) % 2 == 0);
    const auto out = apply_mask(RasterImage(6, 6, 3, 77), checker);
    for (int y = 0; y < 6; ++y)
      for (int x = 0; x < 6; ++x) CHECK(out.at(x, y, 1) == ((x + y) % 2 == 0 ? 77 : 0));
    CHECK_THROWS_AS(apply_mask(img, BinaryMask(5, 6, true)), ShapeError);

    const auto masked = apply_mask(img, hsv_mask(img, HsvRange{}));
    for (std::size_t i = 0; i < img.data().size(); ++i) CHECK(masked.data()[i] <= img.data()[i]);
  }

  TEST_CASE("bilinear resize") {
    SeededRng rng(9);
    const auto img = random_image(7, 5, rng);
    CHECK(resize_bilinear(img, 7, 5) == img);
    CHECK(resize_bilinear(RasterImage(4, 9, 3, 42), 13, 2) == RasterImage(13, 2, 3, 42));
    CHECK_THROWS_AS(resize_bilinear(img, 0, 3), ArgumentError);

    RasterImage quad(2, 2, 1);
    quad.at(0, 0, 0) = 10;
    quad.at(1, 0, 0) = 20;
    quad.at(0, 1, 0) = 30;
    quad.at(1, 1, 0) = 41;
    // Source coordinate (0 + 0.5) * 2 - 0.5 = 0.5 in both axes: the plain mean.
    CHECK(resize_bilinear(quad, 1, 1).at(0, 0, 0) == to_u8((10 + 20 + 30 + 41) / 4.0));

    for (int i = 0; i < 20; ++i) {
      const auto src = random_image(1 + static_cast<int>(rng.bounded(9)), 1 + static_cast<int>(rng.bounded(9)), rng);
      const auto [lo, hi] = std::minmax_element(src.data().begin(), src.data().end());
      const auto out = resize_bilinear(src, 1 + static_cast<int>(rng.bounded(15)), 1 + static_cast<int>(rng.bounded(15)));
      for (auto v : out.data()) {
        REQUIRE(v >= *lo);
        REQUIRE(v <= *hi);
      }
    }
  }

  TEST_CASE("rounding is half away from zero") {
    CHECK(to_u8(2.5) == 3);
    CHECK(to_u8(2.4999) == 2);
    CHECK(to_u8(-3.0) == 0);
    CHECK(to_u8(300.0) == 255);
  }

  TEST_CASE("image extensions") {
    CHECK(has_image_extension("a/b.PNG"));
    CHECK(has_image_extension("x.ppm"));
    CHECK_FALSE(has_image_extension("x.jpg"));
    CHECK_FALSE(has_image_extension("png"));
  }
}
