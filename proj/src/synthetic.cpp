#include "seedling/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <system_error>

#include "seedling/error.hpp"

namespace seedling::synthetic {

namespace fs = std::filesystem;

namespace {

enum class Shape { cross, disk, square, triangle };

constexpr double kHues[3] = {110.0, 75.0, 145.0};  // green, lime, teal

struct Placement {
  Shape shape;
  double cx, cy, r, angle;
};

double between(SeededRng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

bool inside(const Placement& p, double x, double y) {
  const double dx = x - p.cx, dy = y - p.cy;
  const double c = std::cos(p.angle), s = std::sin(p.angle);
  const double u = (c * dx + s * dy) / p.r;
  const double v = (-s * dx + c * dy) / p.r;
  switch (p.shape) {
    case Shape::disk:
      return u * u + v * v <= 1.0;
    case Shape::square:
      return std::abs(u) <= 0.85 && std::abs(v) <= 0.85;
    case Shape::cross:
      return (std::abs(u) <= 0.45 && std::abs(v) <= 1.05) || (std::abs(v) <= 0.45 && std::abs(u) <= 1.05);
    case Shape::triangle: {
      // Equilateral, circumradius 1.3, apex up.
      constexpr double R = 1.3;
      const double in = R / 2.0;
      const double k = std::sqrt(3.0) / 2.0;
      return v <= in && (k * u - 0.5 * v) <= in && (-k * u - 0.5 * v) <= in;
    }
  }
  return false;
}

void paint(RasterImage& img, const Placement& p, const HsvPixel& base, double v_noise, SeededRng& rng) {
  const double ext = p.r * 1.4 + 1.0;
  const int x0 = std::max(0, static_cast<int>(std::floor(p.cx - ext)));
  const int x1 = std::min(img.width() - 1, static_cast<int>(std::ceil(p.cx + ext)));
  const int y0 = std::max(0, static_cast<int>(std::floor(p.cy - ext)));
  const int y1 = std::min(img.height() - 1, static_cast<int>(std::ceil(p.cy + ext)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if (!inside(p, x + 0.5, y + 0.5)) continue;
      HsvPixel px = base;
      px.v = std::clamp(px.v + between(rng, -v_noise, v_noise), 0.0, 1.0);
      const auto rgb = hsv_to_rgb(px);
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = rgb[static_cast<std::size_t>(c)];
    }
  }
}

Shape random_shape(SeededRng& rng) { return static_cast<Shape>(rng.bounded(4)); }

double off_green_hue(SeededRng& rng) {
  // Reds/oranges or blues/purples, well clear of the green mask band.
  return rng.bounded(2) == 0 ? between(rng, 0.0, 35.0) : between(rng, 200.0, 330.0);
}

void paint_soil(RasterImage& img, SeededRng& rng) {
  const int w = img.width(), h = img.height();
  const double hue = between(rng, 15.0, 40.0);
  const double sat = between(rng, 0.25, 0.6);
  const double val = between(rng, 0.35, 0.7);

  struct Blob {
    double x, y, radius, dv;
  };
  std::vector<Blob> blobs(4 + rng.bounded(4));
  for (auto& b : blobs) {
    b = {between(rng, 0, w), between(rng, 0, h), between(rng, 0.1, 0.3) * w, between(rng, -0.15, 0.15)};
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double v = val;
      for (const auto& b : blobs) {
        const double d2 = (x - b.x) * (x - b.x) + (y - b.y) * (y - b.y);
        v += b.dv * std::exp(-d2 / (2.0 * b.radius * b.radius));
      }
      HsvPixel px{hue + between(rng, -4.0, 4.0), sat + between(rng, -0.05, 0.05), v + between(rng, -0.06, 0.06)};
      const auto rgb = hsv_to_rgb(px);
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = rgb[static_cast<std::size_t>(c)];
    }
  }

  // Gray pebbles.
  const auto pebbles = 3 + rng.bounded(6);
  for (std::uint64_t i = 0; i < pebbles; ++i) {
    const Placement p{Shape::disk, between(rng, 0, w), between(rng, 0, h), between(rng, 1.0, 3.0) * w / 64.0, 0.0};
    paint(img, p, {0.0, between(rng, 0.0, 0.08), between(rng, 0.4, 0.85)}, 0.03, rng);
  }
}

}  // namespace

const std::vector<std::string>& class_names() {
  static const std::vector<std::string> names = [] {
    const char* shapes[] = {"cross", "disk", "square", "triangle"};
    const char* hues[] = {"green", "lime", "teal"};
    std::vector<std::string> out;
    for (const char* s : shapes) {
      for (const char* h : hues) out.push_back(std::string(s) + "-" + h);
    }
    return out;
  }();
  return names;
}

RasterImage render(int label, int size, SeededRng& rng) {
  if (label < 0 || label >= kClasses) throw ArgumentError("synthetic label out of range: " + std::to_string(label));
  if (size < 32) throw ArgumentError("synthetic images need size >= 32");
  const double scale = size / 64.0;

  RasterImage img(size, size, 3);
  paint_soil(img, rng);

  const auto distractors = 1 + rng.bounded(2);
  for (std::uint64_t i = 0; i < distractors; ++i) {
    const Placement p{random_shape(rng), between(rng, 0, size), between(rng, 0, size), between(rng, 9.0, 15.0) * scale,
                      between(rng, -0.4, 0.4)};
    paint(img, p, {off_green_hue(rng), between(rng, 0.45, 0.9), between(rng, 0.45, 0.9)}, 0.05, rng);
  }

  // Speckles are at most 5 px across, so erosion always clears them.
  const auto speckles = 6 + rng.bounded(7);
  for (std::uint64_t i = 0; i < speckles; ++i) {
    const Placement p{Shape::disk, between(rng, 0, size), between(rng, 0, size), between(rng, 1.0, 2.5) * scale, 0.0};
    const double hue = kHues[rng.bounded(3)] + between(rng, -6.0, 6.0);
    paint(img, p, {hue, between(rng, 0.5, 0.9), between(rng, 0.45, 0.85)}, 0.05, rng);
  }

  const auto shape = static_cast<Shape>(label / 3);
  const double r = between(rng, 14.0, 18.0) * scale;
  const double jitter = 4.0 * scale;
  const double mid = size / 2.0;
  const Placement main{shape, mid + between(rng, -jitter, jitter), mid + between(rng, -jitter, jitter), r,
                       shape == Shape::disk ? 0.0 : between(rng, -0.25, 0.25)};
  const HsvPixel color{kHues[label % 3] + between(rng, -4.0, 4.0), between(rng, 0.6, 0.85), between(rng, 0.5, 0.8)};
  paint(img, main, color, 0.05, rng);
  return img;
}

std::vector<Sample> generate(std::size_t count, int size, std::uint64_t seed) {
  SeededRng rng(seed);
  std::vector<Sample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const int label = static_cast<int>(i % kClasses);
    out.push_back({render(label, size, rng), label});
  }
  return out;
}

std::size_t write_tree(const fs::path& root, std::size_t count, int size, std::uint64_t seed) {
  const auto& names = class_names();
  std::error_code ec;
  for (const auto& name : names) {
    fs::create_directories(root / name, ec);
    if (ec) throw IoError("cannot create '" + (root / name).string() + "': " + ec.message());
  }
  const auto samples = generate(count, size, seed);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    char file[32];
    std::snprintf(file, sizeof file, "%04zu.png", i);
    write_image(samples[i].image, root / names[static_cast<std::size_t>(samples[i].label)] / file);
  }
  return samples.size();
}

}  // namespace seedling::synthetic
