#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace seedling {

// H x W x C interleaved 8-bit raster. channels is 1 or 3.
class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(int width, int height, int channels, std::uint8_t fill = 0);
  RasterImage(int width, int height, int channels, std::vector<std::uint8_t> data);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }

  std::uint8_t& at(int x, int y, int c) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  std::uint8_t at(int x, int y, int c) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  std::span<std::uint8_t> data() { return data_; }
  std::span<const std::uint8_t> data() const { return data_; }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<std::uint8_t> data_;
};

// h in degrees [0, 360); s and v in [0, 1].
struct HsvPixel {
  double h = 0.0;
  double s = 0.0;
  double v = 0.0;
};

// Inclusive bounds. h_lo > h_hi selects the hue interval that wraps through 0.
struct HsvRange {
  double h_lo = 50.0;
  double h_hi = 160.0;
  double s_lo = 0.15;
  double s_hi = 1.0;
  double v_lo = 0.15;
  double v_hi = 1.0;

  bool contains(const HsvPixel& p) const;
  friend bool operator==(const HsvRange&, const HsvRange&) = default;
};

class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, bool fill = false);

  int width() const { return width_; }
  int height() const { return height_; }

  bool at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  void set(int x, int y, bool v) { data_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0; }
  std::size_t count() const;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

// Decodes PNG or binary PPM/PGM (P6/P5), sniffing the format from the leading
// bytes. The result always has 3 channels; gray inputs are replicated.
RasterImage read_image(const std::filesystem::path& path);

// Encodes by extension: ".png" or ".ppm". Single-channel images are written as
// three identical channels.
void write_image(const RasterImage& img, const std::filesystem::path& path);

std::vector<double> gaussian_kernel(int size, double sigma);

// Separable blur, horizontal then vertical, edge-clamped borders.
RasterImage gaussian_blur(const RasterImage& img, int size, double sigma);

HsvPixel rgb_to_hsv(std::uint8_t r, std::uint8_t g, std::uint8_t b);
// Hexcone inverse; hue is taken modulo 360, s and v are clamped to [0, 1].
std::array<std::uint8_t, 3> hsv_to_rgb(const HsvPixel& p);

BinaryMask hsv_mask(const RasterImage& img, const HsvRange& range);

// Square structuring element of side `size`; neighbours outside the mask count
// as background.
BinaryMask erode(const BinaryMask& mask, int size);

RasterImage apply_mask(const RasterImage& img, const BinaryMask& mask);

RasterImage resize_bilinear(const RasterImage& img, int out_w, int out_h);

// True for the extensions the dataset tools treat as images (.png, .ppm,
// case-insensitive).
bool has_image_extension(const std::filesystem::path& path);

// Rounds half away from zero and clamps to [0, 255].
std::uint8_t to_u8(double v);

}  // namespace seedling
