#pragma once

#include <filesystem>

#include "seedling/nn/model.hpp"

namespace seedling::nn {

// Writes an SDLCNN01 container: config, label names, metadata and every
// parameter tensor under its layer name.
void save_checkpoint(const Model<float>& model, const std::filesystem::path& path);

// Rebuilds the architecture from the stored config and loads the weights.
// Throws ContainerError on magic mismatch, truncation, or shape inconsistency.
Model<float> load_checkpoint(const std::filesystem::path& path);

}  // namespace seedling::nn
