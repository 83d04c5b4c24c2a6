#pragma once

#include <filesystem>
#include <vector>

#include "seedling/imaging.hpp"

namespace seedling {

struct SegmentationConfig {
  int blur_size = 5;
  double blur_sigma = 1.0;
  HsvRange hsv_range{};
  int erode_size = 11;

  // Throws ArgumentError on invalid kernel parameters.
  void validate() const;
  friend bool operator==(const SegmentationConfig&, const SegmentationConfig&) = default;
};

// Planar (channel-major) float image with every value in [0, 1].
struct NormalizedImage {
  int width = 0;
  int height = 0;
  std::vector<float> data;  // 3 * width * height

  static constexpr int channels = 3;
};

// blur -> HSV mask -> erode -> mask applied to the original (unblurred) pixels.
RasterImage segment(const RasterImage& img, const SegmentationConfig& cfg);

// Resize, per-image standardization, then min-max rescale to [0, 1]. Constant
// images map to all zeros.
NormalizedImage normalize(const RasterImage& img, int target_w, int target_h);

struct SegmentDirectoryResult {
  std::size_t written = 0;
  std::size_t skipped = 0;
};

// Mirrors in_dir's class-subdirectory tree into out_dir with every decodable
// image segmented. Output keeps the source file name and extension.
SegmentDirectoryResult segment_directory(const std::filesystem::path& in_dir,
                                         const std::filesystem::path& out_dir,
                                         const SegmentationConfig& cfg);

}  // namespace seedling
