#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "seedling/error.hpp"
#include "seedling/imaging.hpp"

namespace seedling {

namespace {

std::string lower_ext(const std::filesystem::path& p) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return e;
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
  return bytes;
}

class NetpbmParser {
 public:
  NetpbmParser(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path)
      : bytes_(bytes), path_(path) {}

  RasterImage parse() {
    const bool gray = bytes_[1] == '5';
    pos_ = 2;
    const int w = next_int();
    const int h = next_int();
    const int maxval = next_int();
    if (w < 1 || h < 1) corrupt("non-positive dimensions");
    if (maxval < 1 || maxval > 255) {
      throw FormatError("unsupported netpbm maxval " + std::to_string(maxval) + " in '" + path_.string() + "'");
    }
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) corrupt("missing header terminator");
    ++pos_;

    const int in_ch = gray ? 1 : 3;
    const std::size_t need = static_cast<std::size_t>(w) * h * in_ch;
    if (bytes_.size() - pos_ < need) corrupt("truncated pixel data");

    RasterImage img(w, h, 3);
    auto dst = img.data();
    const std::uint8_t* src = bytes_.data() + pos_;
    for (std::size_t i = 0; i < static_cast<std::size_t>(w) * h; ++i) {
      for (int c = 0; c < 3; ++c) {
        int v = src[i * in_ch + (gray ? 0 : c)];
        if (maxval != 255) v = (v * 255 + maxval / 2) / maxval;
        dst[i * 3 + c] = static_cast<std::uint8_t>(std::min(v, 255));
      }
    }
    return img;
  }

 private:
  [[noreturn]] void corrupt(const std::string& why) const {
    throw FormatError("corrupt netpbm stream in '" + path_.string() + "': " + why);
  }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  int next_int() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) corrupt("malformed header");
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > (1L << 24)) corrupt("header value out of range");
      ++pos_;
    }
    return static_cast<int>(v);
  }

  const std::vector<std::uint8_t>& bytes_;
  const std::filesystem::path& path_;
  std::size_t pos_ = 0;
};

RasterImage decode_png(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw FormatError("corrupt PNG stream in '" + path.string() + "': " + msg);
  }
  image.format = PNG_FORMAT_RGB;
  if (image.width < 1 || image.height < 1 || image.width > (1u << 15) || image.height > (1u << 15)) {
    png_image_free(&image);
    throw FormatError("unsupported PNG dimensions in '" + path.string() + "'");
  }
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  const png_color black{0, 0, 0};
  if (!png_image_finish_read(&image, &black, buffer.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw FormatError("corrupt PNG stream in '" + path.string() + "': " + msg);
  }
  return RasterImage(static_cast<int>(image.width), static_cast<int>(image.height), 3, std::move(buffer));
}

RasterImage as_rgb(const RasterImage& img) {
  if (img.channels() == 3) return img;
  RasterImage out(img.width(), img.height(), 3);
  auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i * 3] = dst[i * 3 + 1] = dst[i * 3 + 2] = src[i];
  return out;
}

}  // namespace

bool has_image_extension(const std::filesystem::path& path) {
  const std::string ext = lower_ext(path);
  return ext == ".png" || ext == ".ppm";
}

RasterImage read_image(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  static constexpr std::array<std::uint8_t, 8> kPngSig{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= kPngSig.size() && std::equal(kPngSig.begin(), kPngSig.end(), bytes.begin())) {
    return decode_png(bytes, path);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '6' || bytes[1] == '5')) {
    return NetpbmParser(bytes, path).parse();
  }
  throw FormatError("unsupported image format in '" + path.string() + "'");
}

void write_image(const RasterImage& img, const std::filesystem::path& path) {
  const std::string ext = lower_ext(path);
  if (ext != ".ppm" && ext != ".png") {
    throw FormatError("cannot infer image format from extension of '" + path.string() + "'");
  }
  const RasterImage rgb = as_rgb(img);

  if (ext == ".ppm") {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << "P6\n" << rgb.width() << ' ' << rgb.height() << "\n255\n";
    auto d = rgb.data();
    out.write(reinterpret_cast<const char*>(d.data()), static_cast<std::streamsize>(d.size()));
    if (!out) throw IoError("write failure on '" + path.string() + "'");
    return;
  }

  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(rgb.width());
  image.height = static_cast<png_uint_32>(rgb.height());
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> encoded;
  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(image, size, 0, rgb.data().data(), 0, nullptr)) {
    throw IoError("PNG encoding failed for '" + path.string() + "': " + image.message);
  }
  encoded.resize(size);
  if (!png_image_write_to_memory(&image, encoded.data(), &size, 0, rgb.data().data(), 0, nullptr)) {
    throw IoError("PNG encoding failed for '" + path.string() + "': " + image.message);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(encoded.data()), static_cast<std::streamsize>(size));
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

}  // namespace seedling
