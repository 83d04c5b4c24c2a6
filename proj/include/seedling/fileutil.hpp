#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace seedling {

// Whole-file helpers; failures throw IoError naming the path.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace seedling
