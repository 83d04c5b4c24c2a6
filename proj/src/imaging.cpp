#include "seedling/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "seedling/error.hpp"

namespace seedling {

namespace {

std::size_t pixel_count(int w, int h) { return static_cast<std::size_t>(w) * static_cast<std::size_t>(h); }

void check_dims(int w, int h) {
  if (w < 1 || h < 1) {
    throw ArgumentError("image dimensions must be positive, got " + std::to_string(w) + "x" +
                        std::to_string(h));
  }
}

void check_odd_size(int size, const char* what) {
  if (size < 1 || size % 2 == 0) {
    throw ArgumentError(std::string(what) + " size must be odd and >= 1, got " + std::to_string(size));
  }
}

// Sliding-window "all true" test along one axis; out-of-range samples are false.
void erode_line(const std::uint8_t* src, std::uint8_t* dst, int n, std::ptrdiff_t stride, int radius) {
  // run[i] = length of the run of true values ending at i
  std::vector<int> run(static_cast<std::size_t>(n));
  int current = 0;
  for (int i = 0; i < n; ++i) {
    current = src[i * stride] ? current + 1 : 0;
    run[static_cast<std::size_t>(i)] = current;
  }
  for (int i = 0; i < n; ++i) {
    const int hi = i + radius;
    const bool ok = i - radius >= 0 && hi < n && run[static_cast<std::size_t>(hi)] >= 2 * radius + 1;
    dst[i * stride] = ok ? 1 : 0;
  }
}

}  // namespace

RasterImage::RasterImage(int width, int height, int channels, std::uint8_t fill)
    : width_(width), height_(height), channels_(channels) {
  check_dims(width, height);
  if (channels != 1 && channels != 3) {
    throw ArgumentError("channels must be 1 or 3, got " + std::to_string(channels));
  }
  data_.assign(pixel_count(width, height) * static_cast<std::size_t>(channels), fill);
}

RasterImage::RasterImage(int width, int height, int channels, std::vector<std::uint8_t> data)
    : RasterImage(width, height, channels) {
  if (data.size() != data_.size()) {
    throw ArgumentError("raster data length " + std::to_string(data.size()) + " does not match " +
                        std::to_string(width) + "x" + std::to_string(height) + "x" +
                        std::to_string(channels));
  }
  data_ = std::move(data);
}

BinaryMask::BinaryMask(int width, int height, bool fill) : width_(width), height_(height) {
  check_dims(width, height);
  data_.assign(pixel_count(width, height), fill ? 1 : 0);
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

bool HsvRange::contains(const HsvPixel& p) const {
  const bool hue_ok = h_lo <= h_hi ? (p.h >= h_lo && p.h <= h_hi) : (p.h >= h_lo || p.h <= h_hi);
  return hue_ok && p.s >= s_lo && p.s <= s_hi && p.v >= v_lo && p.v <= v_hi;
}

std::uint8_t to_u8(double v) {
  const double r = std::round(v);
  return static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
}

std::vector<double> gaussian_kernel(int size, double sigma) {
  check_odd_size(size, "gaussian kernel");
  if (!(sigma > 0.0)) {
    throw ArgumentError("gaussian sigma must be positive, got " + std::to_string(sigma));
  }
  const int center = (size - 1) / 2;
  std::vector<double> w(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) {
    const double d = static_cast<double>(i - center);
    w[static_cast<std::size_t>(i)] = std::exp(-(d * d) / (2.0 * sigma * sigma));
  }
  const double sum = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= sum;
  return w;
}

RasterImage gaussian_blur(const RasterImage& img, int size, double sigma) {
  const auto kernel = gaussian_kernel(size, sigma);
  const int w = img.width();
  const int h = img.height();
  const int ch = img.channels();
  const int r = size / 2;

  std::vector<double> tmp(pixel_count(w, h) * static_cast<std::size_t>(ch));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int k = -r; k <= r; ++k) {
          const int sx = std::clamp(x + k, 0, w - 1);
          acc += kernel[static_cast<std::size_t>(k + r)] * img.at(sx, y, c);
        }
        tmp[(static_cast<std::size_t>(y) * w + x) * ch + c] = acc;
      }
    }
  }

  RasterImage out(w, h, ch);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int k = -r; k <= r; ++k) {
          const int sy = std::clamp(y + k, 0, h - 1);
          acc += kernel[static_cast<std::size_t>(k + r)] * tmp[(static_cast<std::size_t>(sy) * w + x) * ch + c];
        }
        out.at(x, y, c) = to_u8(acc);
      }
    }
  }
  return out;
}

HsvPixel rgb_to_hsv(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const int mx = std::max({r, g, b});
  const int mn = std::min({r, g, b});
  const double delta = static_cast<double>(mx - mn);

  HsvPixel p;
  p.v = mx / 255.0;
  p.s = mx == 0 ? 0.0 : delta / mx;
  if (mx == mn) {
    p.h = 0.0;
    return p;
  }
  double h = 0.0;
  if (mx == r) {
    h = 60.0 * (static_cast<double>(g - b) / delta);
  } else if (mx == g) {
    h = 60.0 * (static_cast<double>(b - r) / delta + 2.0);
  } else {
    h = 60.0 * (static_cast<double>(r - g) / delta + 4.0);
  }
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h -= 360.0;
  p.h = h;
  return p;
}

std::array<std::uint8_t, 3> hsv_to_rgb(const HsvPixel& p) {
  double h = std::fmod(p.h, 360.0);
  if (h < 0.0) h += 360.0;
  const double s = std::clamp(p.s, 0.0, 1.0);
  const double v = std::clamp(p.v, 0.0, 1.0);
  const double c = v * s;
  const double hp = h / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hp)) {
    case 0: r = c, g = x; break;
    case 1: r = x, g = c; break;
    case 2: g = c, b = x; break;
    case 3: g = x, b = c; break;
    case 4: r = x, b = c; break;
    default: r = c, b = x; break;
  }
  const double m = v - c;
  return {to_u8((r + m) * 255.0), to_u8((g + m) * 255.0), to_u8((b + m) * 255.0)};
}

BinaryMask hsv_mask(const RasterImage& img, const HsvRange& range) {
  if (img.channels() != 3) {
    throw ArgumentError("hsv_mask requires a 3-channel image, got " + std::to_string(img.channels()));
  }
  BinaryMask mask(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      mask.set(x, y, range.contains(rgb_to_hsv(img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2))));
    }
  }
  return mask;
}

BinaryMask erode(const BinaryMask& mask, int size) {
  check_odd_size(size, "erosion");
  const int w = mask.width();
  const int h = mask.height();
  const int r = size / 2;

  // A square element factors into a row pass followed by a column pass.
  std::vector<std::uint8_t> src(pixel_count(w, h));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) src[static_cast<std::size_t>(y) * w + x] = mask.at(x, y) ? 1 : 0;

  std::vector<std::uint8_t> rows(src.size());
  for (int y = 0; y < h; ++y) {
    const std::size_t off = static_cast<std::size_t>(y) * w;
    erode_line(src.data() + off, rows.data() + off, w, 1, r);
  }
  std::vector<std::uint8_t> cols(src.size());
  for (int x = 0; x < w; ++x) erode_line(rows.data() + x, cols.data() + x, h, w, r);

  BinaryMask out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.set(x, y, cols[static_cast<std::size_t>(y) * w + x] != 0);
  return out;
}

RasterImage apply_mask(const RasterImage& img, const BinaryMask& mask) {
  if (img.width() != mask.width() || img.height() != mask.height()) {
    throw ShapeError("mask " + std::to_string(mask.width()) + "x" + std::to_string(mask.height()) +
                     " does not match image " + std::to_string(img.width()) + "x" +
                     std::to_string(img.height()));
  }
  RasterImage out = img;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (!mask.at(x, y)) {
        for (int c = 0; c < img.channels(); ++c) out.at(x, y, c) = 0;
      }
    }
  }
  return out;
}

RasterImage resize_bilinear(const RasterImage& img, int out_w, int out_h) {
  if (out_w < 1 || out_h < 1) {
    throw ArgumentError("resize target must be at least 1x1, got " + std::to_string(out_w) + "x" +
                        std::to_string(out_h));
  }
  if (out_w == img.width() && out_h == img.height()) return img;

  const double sx_scale = static_cast<double>(img.width()) / out_w;
  const double sy_scale = static_cast<double>(img.height()) / out_h;
  const int ch = img.channels();
  RasterImage out(out_w, out_h, ch);

  for (int dy = 0; dy < out_h; ++dy) {
    const double sy = std::clamp((dy + 0.5) * sy_scale - 0.5, 0.0, static_cast<double>(img.height() - 1));
    const int y0 = static_cast<int>(std::floor(sy));
    const int y1 = std::min(y0 + 1, img.height() - 1);
    const double fy = sy - y0;
    for (int dx = 0; dx < out_w; ++dx) {
      const double sx = std::clamp((dx + 0.5) * sx_scale - 0.5, 0.0, static_cast<double>(img.width() - 1));
      const int x0 = static_cast<int>(std::floor(sx));
      const int x1 = std::min(x0 + 1, img.width() - 1);
      const double fx = sx - x0;
      for (int c = 0; c < ch; ++c) {
        const double top = img.at(x0, y0, c) * (1.0 - fx) + img.at(x1, y0, c) * fx;
        const double bottom = img.at(x0, y1, c) * (1.0 - fx) + img.at(x1, y1, c) * fx;
        out.at(dx, dy, c) = to_u8(top * (1.0 - fy) + bottom * fy);
      }
    }
  }
  return out;
}

}  // namespace seedling
