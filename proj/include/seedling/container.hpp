#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "seedling/error.hpp"
#include "seedling/tensor.hpp"

// Binary model container shared by CNN checkpoints and baseline models:
//   bytes 0-7   magic
//   bytes 8-11  little-endian u32 header length
//   header      UTF-8 JSON; "tensors": [{name, shape, offset, length}] with
//               offset/length in bytes relative to the start of the payload
//   payload     little-endian f32 values, row-major
namespace seedling {

class ContainerError : public FormatError {
 public:
  enum class Kind { bad_magic, truncated, inconsistent, malformed_header };

  ContainerError(Kind kind, const std::string& msg) : FormatError(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

struct Container {
  nlohmann::json header;  // everything except the "tensors" table
  std::vector<NamedTensor> tensors;

  // Throws ContainerError(inconsistent) when the name is absent.
  const Tensor& get(std::string_view name) const;
};

inline constexpr std::string_view kCnnMagic = "SDLCNN01";
inline constexpr std::string_view kBaselineMagic = "SDLBAS01";

// Serializes to bytes; identical inputs give identical bytes.
std::vector<char> encode_container(std::string_view magic, const nlohmann::json& header,
                                   const std::vector<NamedTensor>& tensors);
Container decode_container(const std::vector<char>& bytes, std::string_view magic, const std::string& origin);

void write_container(const std::filesystem::path& path, std::string_view magic, const nlohmann::json& header,
                     const std::vector<NamedTensor>& tensors);
Container read_container(const std::filesystem::path& path, std::string_view magic);

// First eight bytes of a file, or empty when unreadable/short.
std::string peek_magic(const std::filesystem::path& path);

}  // namespace seedling
