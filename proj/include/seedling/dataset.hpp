#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "seedling/segmentation.hpp"
#include "seedling/tensor.hpp"

namespace seedling {

// Class names in index order (lexicographic directory names).
struct LabelMap {
  std::vector<std::string> names;

  std::size_t size() const { return names.size(); }
  // -1 when absent.
  int index_of(const std::string& name) const;

  friend bool operator==(const LabelMap&, const LabelMap&) = default;
};

struct DatasetItem {
  std::filesystem::path path;
  int label = 0;

  friend bool operator==(const DatasetItem&, const DatasetItem&) = default;
};

struct LabeledDataset {
  std::filesystem::path root;
  std::vector<DatasetItem> items;
  LabelMap label_map;
  std::vector<std::size_t> counts;  // per class

  std::size_t size() const { return items.size(); }
  std::vector<int> labels() const;

  friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;
};

// Builds a dataset from items, recomputing the per-class counts.
LabeledDataset make_dataset(std::filesystem::path root, LabelMap label_map, std::vector<DatasetItem> items);

// <root>/<class>/<image>.{png,ppm}. Classes and files are sorted by name; other
// files are skipped with a warning. Throws DatasetError for fewer than two classes
// or an empty class, IoError when root is not a directory.
LabeledDataset scan_dataset(const std::filesystem::path& root);

// Same items with root replaced, e.g. to point at a pre-segmented mirror tree.
LabeledDataset rebase(const LabeledDataset& ds, const std::filesystem::path& new_root);

struct DatasetStats {
  std::vector<std::string> names;
  std::vector<std::size_t> counts;
  std::size_t total = 0;
  std::vector<double> weights;  // total / (K * count)
};

// {"classes": [{"name", "count", "weight"}...], "total"}
void to_json(nlohmann::json& j, const DatasetStats& s);

DatasetStats class_weights(const LabeledDataset& ds);

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const SplitSpec&, const SplitSpec&) = default;
};

struct DatasetSplit {
  LabeledDataset train;
  LabeledDataset val;
};

// Per class: seeded shuffle, then ceil(fraction * n) items to train (at most
// n - 1, so validation keeps at least one). Items keep their original relative
// order within each side.
DatasetSplit stratified_split(const LabeledDataset& ds, const SplitSpec& spec);

struct FeatureMatrix {
  Tensor features;  // n x (3 * size * size), planar channels per row
  std::vector<int> labels;
};

// Reads every image, optionally segments it, normalizes to size x size and
// flattens. Any unreadable image is an error.
FeatureMatrix load_features(const LabeledDataset& ds, int size, bool segmented, const SegmentationConfig& cfg);

}  // namespace seedling
