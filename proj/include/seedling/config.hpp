#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "seedling/baselines.hpp"
#include "seedling/dataset.hpp"
#include "seedling/nn/model.hpp"
#include "seedling/segmentation.hpp"

namespace seedling {

struct KnnSection {
  std::vector<int> k_values;  // empty: odd k up to sqrt(n_train)
  std::string weighting = "uniform";

  friend bool operator==(const KnnSection&, const KnnSection&) = default;
};

struct SvmSection {
  SvmConfig base;  // C is replaced by each grid value
  std::vector<double> c_grid{0.1, 1.0, 5.0, 10.0};

  friend bool operator==(const SvmSection&, const SvmSection&) = default;
};

struct SplitSection {
  SplitSpec spec;
  int folds = 3;  // cross-validation folds for baseline grid search

  friend bool operator==(const SplitSection&, const SplitSection&) = default;
};

struct PathsConfig {
  std::string data;
  std::string output;

  friend bool operator==(const PathsConfig&, const PathsConfig&) = default;
};

// Everything a run depends on. The JSON form has exactly the keys
// "segmentation", "cnn", "svm", "knn", "split" and "paths", each optional.
struct RunConfig {
  SegmentationConfig segmentation;
  nn::CnnConfig cnn;
  SvmSection svm;
  KnnSection knn;
  SplitSection split;
  PathsConfig paths;

  // Throws ConfigError describing the first violated invariant.
  void validate() const;
  // Sets the split, CNN and SVM seeds together.
  void set_seed(std::uint64_t seed);

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

void to_json(nlohmann::json& j, const HsvRange& r);
void from_json(const nlohmann::json& j, HsvRange& r);
void to_json(nlohmann::json& j, const SegmentationConfig& c);
void from_json(const nlohmann::json& j, SegmentationConfig& c);
void to_json(nlohmann::json& j, const SplitSpec& s);
void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

// Parses and validates; every failure is a ConfigError (IoError if unreadable).
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& text);

// FNV-1a 64 over the compact JSON form, as 16 hex digits.
std::string config_hash(const RunConfig& c);

}  // namespace seedling
