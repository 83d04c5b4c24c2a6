#include "seedling/container.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

namespace seedling {

namespace {

using Kind = ContainerError::Kind;

void put_u32_le(std::vector<char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32_le(const char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

void put_f32_le(std::vector<char>& out, float f) { put_u32_le(out, std::bit_cast<std::uint32_t>(f)); }

}  // namespace

const Tensor& Container::get(std::string_view name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t.tensor;
  }
  throw ContainerError(Kind::inconsistent, "container is missing tensor '" + std::string(name) + "'");
}

std::vector<char> encode_container(std::string_view magic, const nlohmann::json& header,
                                   const std::vector<NamedTensor>& tensors) {
  nlohmann::json full = header;
  nlohmann::json table = nlohmann::json::array();
  std::size_t offset = 0;
  for (const auto& t : tensors) {
    const std::size_t length = t.tensor.size() * sizeof(float);
    table.push_back({{"name", t.name}, {"shape", t.tensor.shape()}, {"offset", offset}, {"length", length}});
    offset += length;
  }
  full["tensors"] = std::move(table);
  const std::string text = full.dump();

  std::vector<char> out(magic.begin(), magic.end());
  put_u32_le(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  out.reserve(out.size() + offset);
  for (const auto& t : tensors) {
    for (float f : t.tensor.data()) put_f32_le(out, f);
  }
  return out;
}

Container decode_container(const std::vector<char>& bytes, std::string_view magic, const std::string& origin) {
  if (bytes.size() < magic.size() || std::string_view(bytes.data(), magic.size()) != magic) {
    throw ContainerError(Kind::bad_magic, "'" + origin + "' is not a " + std::string(magic) +
                                              " file (magic/version mismatch)");
  }
  if (bytes.size() < magic.size() + 4) throw ContainerError(Kind::truncated, "'" + origin + "' is truncated");
  const std::uint32_t header_len = get_u32_le(bytes.data() + magic.size());
  const std::size_t header_start = magic.size() + 4;
  if (bytes.size() - header_start < header_len) {
    throw ContainerError(Kind::truncated, "'" + origin + "' is truncated inside its header");
  }

  Container c;
  try {
    c.header = nlohmann::json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(header_start),
                                     bytes.begin() + static_cast<std::ptrdiff_t>(header_start + header_len));
  } catch (const nlohmann::json::exception& e) {
    throw ContainerError(Kind::malformed_header, "'" + origin + "' has a malformed header: " + e.what());
  }
  if (!c.header.is_object() || !c.header.contains("tensors") || !c.header["tensors"].is_array()) {
    throw ContainerError(Kind::malformed_header, "'" + origin + "' header lacks a tensor table");
  }

  const char* payload = bytes.data() + header_start + header_len;
  const std::size_t payload_size = bytes.size() - header_start - header_len;
  std::size_t expected_end = 0;
  try {
    for (const auto& entry : c.header["tensors"]) {
      const auto name = entry.at("name").get<std::string>();
      const auto shape = entry.at("shape").get<Shape>();
      const auto offset = entry.at("offset").get<std::size_t>();
      const auto length = entry.at("length").get<std::size_t>();
      if (shape.empty() || shape_size(shape) == 0 || shape_size(shape) * sizeof(float) != length) {
        throw ContainerError(Kind::inconsistent, "'" + origin + "': tensor '" + name + "' declares shape " +
                                                     shape_str(shape) + " but length " + std::to_string(length));
      }
      if (offset > payload_size || payload_size - offset < length) {
        throw ContainerError(Kind::truncated, "'" + origin + "': payload for tensor '" + name + "' is truncated");
      }
      std::vector<float> data(shape_size(shape));
      for (std::size_t i = 0; i < data.size(); ++i) {
        data[i] = std::bit_cast<float>(get_u32_le(payload + offset + i * sizeof(float)));
      }
      c.tensors.push_back({name, Tensor(shape, std::move(data))});
      expected_end = std::max(expected_end, offset + length);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ContainerError(Kind::malformed_header, "'" + origin + "' has a malformed tensor table: " + e.what());
  }
  if (expected_end != payload_size) {
    throw ContainerError(Kind::inconsistent, "'" + origin + "': payload is " + std::to_string(payload_size) +
                                                 " bytes but the header accounts for " + std::to_string(expected_end));
  }
  c.header.erase("tensors");
  return c;
}

void write_container(const std::filesystem::path& path, std::string_view magic, const nlohmann::json& header,
                     const std::vector<NamedTensor>& tensors) {
  const auto bytes = encode_container(magic, header, tensors);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

Container read_container(const std::filesystem::path& path, std::string_view magic) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_container(bytes, magic, path.string());
}

std::string peek_magic(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  char buf[8];
  if (!in.read(buf, sizeof buf)) return {};
  return std::string(buf, sizeof buf);
}

}  // namespace seedling
