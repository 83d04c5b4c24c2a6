#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "seedling/imaging.hpp"
#include "seedling/tensor.hpp"

namespace seedling::synthetic {

// Twelve classes: four shapes (cross, disk, square, triangle) times three green
// hues (green 110, lime 75, teal 145 degrees). Names sort in label order.
constexpr int kClasses = 12;

const std::vector<std::string>& class_names();

// One green plant-like shape of the given class on a textured soil background,
// with off-green distractor shapes and small green speckles that an 11x11
// erosion removes.
RasterImage render(int label, int size, SeededRng& rng);

struct Sample {
  RasterImage image;
  int label = 0;
};

// count samples with labels cycling 0..11.
std::vector<Sample> generate(std::size_t count, int size, std::uint64_t seed);

// Writes generate(count, size, seed) as <root>/<class>/<NNNN>.png and returns
// the number of files written.
std::size_t write_tree(const std::filesystem::path& root, std::size_t count, int size, std::uint64_t seed);

}  // namespace seedling::synthetic
