#include "seedling/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <system_error>

#include "seedling/error.hpp"
#include "seedling/log.hpp"

namespace seedling {

namespace fs = std::filesystem;

void SegmentationConfig::validate() const {
  if (blur_size < 1 || blur_size % 2 == 0) {
    throw ArgumentError("segmentation blur_size must be odd and >= 1, got " + std::to_string(blur_size));
  }
  if (!(blur_sigma > 0.0)) throw ArgumentError("segmentation blur_sigma must be positive");
  if (erode_size < 1 || erode_size % 2 == 0) {
    throw ArgumentError("segmentation erode_size must be odd and >= 1, got " + std::to_string(erode_size));
  }
  const auto& r = hsv_range;
  if (r.s_lo > r.s_hi || r.v_lo > r.v_hi) throw ArgumentError("HSV range has lo > hi for S or V");
  if (r.h_lo < 0.0 || r.h_lo >= 360.0 || r.h_hi < 0.0 || r.h_hi >= 360.0) {
    throw ArgumentError("HSV hue bounds must lie in [0, 360)");
  }
}

RasterImage segment(const RasterImage& img, const SegmentationConfig& cfg) {
  cfg.validate();
  const RasterImage blurred = gaussian_blur(img, cfg.blur_size, cfg.blur_sigma);
  const BinaryMask mask = erode(hsv_mask(blurred, cfg.hsv_range), cfg.erode_size);
  return apply_mask(img, mask);
}

NormalizedImage normalize(const RasterImage& img, int target_w, int target_h) {
  if (img.channels() != 3) {
    throw ArgumentError("normalize requires a 3-channel image, got " + std::to_string(img.channels()));
  }
  const RasterImage sized = resize_bilinear(img, target_w, target_h);
  const auto px = sized.data();
  const std::size_t plane = static_cast<std::size_t>(target_w) * target_h;

  NormalizedImage out;
  out.width = target_w;
  out.height = target_h;
  out.data.assign(3 * plane, 0.0f);

  double mean = 0.0;
  for (auto v : px) mean += v;
  mean /= static_cast<double>(px.size());
  double var = 0.0;
  for (auto v : px) var += (v - mean) * (v - mean);
  const double sigma = std::sqrt(var / static_cast<double>(px.size()));
  if (sigma == 0.0) return out;

  std::vector<double> z(px.size());
  for (std::size_t i = 0; i < px.size(); ++i) z[i] = (px[i] - mean) / sigma;
  const auto [lo_it, hi_it] = std::minmax_element(z.begin(), z.end());
  const double lo = *lo_it;
  const double span = *hi_it - lo;

  // interleaved HWC -> planar CHW
  for (std::size_t p = 0; p < plane; ++p) {
    for (std::size_t c = 0; c < 3; ++c) {
      out.data[c * plane + p] = static_cast<float>((z[p * 3 + c] - lo) / span);
    }
  }
  return out;
}

SegmentDirectoryResult segment_directory(const fs::path& in_dir, const fs::path& out_dir,
                                         const SegmentationConfig& cfg) {
  cfg.validate();
  std::error_code ec;
  if (!fs::is_directory(in_dir, ec)) {
    throw IoError("input directory '" + in_dir.string() + "' does not exist or is not a directory");
  }

  std::vector<fs::path> files;
  try {
    for (const auto& entry : fs::recursive_directory_iterator(in_dir)) {
      if (entry.is_regular_file() && has_image_extension(entry.path())) files.push_back(entry.path());
    }
  } catch (const fs::filesystem_error& e) {
    throw IoError("cannot read input tree '" + in_dir.string() + "': " + e.what());
  }
  std::sort(files.begin(), files.end());

  SegmentDirectoryResult result;
  for (const auto& src : files) {
    RasterImage img;
    try {
      img = read_image(src);
    } catch (const Error& e) {
      log::warn(std::string("skipping undecodable image: ") + e.what());
      ++result.skipped;
      continue;
    }
    const fs::path dst = out_dir / fs::relative(src, in_dir);
    fs::create_directories(dst.parent_path(), ec);
    if (ec) throw IoError("cannot create '" + dst.parent_path().string() + "': " + ec.message());
    write_image(segment(img, cfg), dst);
    ++result.written;
  }
  return result;
}

}  // namespace seedling
