#include "seedling/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <system_error>

#include "seedling/error.hpp"
#include "seedling/imaging.hpp"
#include "seedling/log.hpp"

namespace seedling {

namespace fs = std::filesystem;

int LabelMap::index_of(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  return it == names.end() ? -1 : static_cast<int>(it - names.begin());
}

std::vector<int> LabeledDataset::labels() const {
  std::vector<int> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(item.label);
  return out;
}

LabeledDataset make_dataset(fs::path root, LabelMap label_map, std::vector<DatasetItem> items) {
  LabeledDataset ds;
  ds.root = std::move(root);
  ds.counts.assign(label_map.size(), 0);
  for (const auto& item : items) {
    if (item.label < 0 || static_cast<std::size_t>(item.label) >= label_map.size()) {
      throw DatasetError("item label " + std::to_string(item.label) + " out of range for " +
                         std::to_string(label_map.size()) + " classes");
    }
    ++ds.counts[static_cast<std::size_t>(item.label)];
  }
  ds.label_map = std::move(label_map);
  ds.items = std::move(items);
  return ds;
}

namespace {

std::vector<fs::directory_entry> sorted_entries(const fs::path& dir) {
  std::error_code ec;
  fs::directory_iterator it(dir, ec);
  if (ec) throw IoError("cannot list '" + dir.string() + "': " + ec.message());
  std::vector<fs::directory_entry> entries;
  for (const auto& e : it) entries.push_back(e);
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.path().filename().string() < b.path().filename().string(); });
  return entries;
}

}  // namespace

LabeledDataset scan_dataset(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw IoError("dataset root '" + root.string() + "' is not a directory");

  LabelMap labels;
  std::vector<DatasetItem> items;
  for (const auto& cls : sorted_entries(root)) {
    if (!cls.is_directory()) {
      log::warn("ignoring non-directory '" + cls.path().string() + "' in dataset root");
      continue;
    }
    const int index = static_cast<int>(labels.names.size());
    std::size_t found = 0;
    for (const auto& file : sorted_entries(cls.path())) {
      if (!file.is_regular_file() || !has_image_extension(file.path())) {
        log::warn("ignoring '" + file.path().string() + "': not an image file");
        continue;
      }
      items.push_back({file.path(), index});
      ++found;
    }
    if (found == 0) throw DatasetError("class directory '" + cls.path().string() + "' contains no images");
    labels.names.push_back(cls.path().filename().string());
  }
  if (labels.size() < 2) {
    throw DatasetError("dataset '" + root.string() + "' needs at least 2 class directories, found " +
                       std::to_string(labels.size()));
  }
  return make_dataset(root, std::move(labels), std::move(items));
}

LabeledDataset rebase(const LabeledDataset& ds, const fs::path& new_root) {
  std::vector<DatasetItem> items;
  items.reserve(ds.items.size());
  for (const auto& item : ds.items) {
    items.push_back({new_root / item.path.lexically_relative(ds.root), item.label});
  }
  return make_dataset(new_root, ds.label_map, std::move(items));
}

void to_json(nlohmann::json& j, const DatasetStats& s) {
  auto classes = nlohmann::json::array();
  for (std::size_t c = 0; c < s.names.size(); ++c) {
    classes.push_back({{"name", s.names[c]}, {"count", s.counts[c]}, {"weight", s.weights[c]}});
  }
  j = {{"classes", std::move(classes)}, {"total", s.total}};
}

DatasetStats class_weights(const LabeledDataset& ds) {
  DatasetStats s;
  s.names = ds.label_map.names;
  s.counts = ds.counts;
  for (auto n : s.counts) s.total += n;
  const double k = static_cast<double>(s.counts.size());
  for (std::size_t c = 0; c < s.counts.size(); ++c) {
    if (s.counts[c] == 0) throw DatasetError("class '" + s.names[c] + "' has no items");
    s.weights.push_back(static_cast<double>(s.total) / (k * static_cast<double>(s.counts[c])));
  }
  return s;
}

void SplitSpec::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("split train_fraction must lie in (0, 1)");
  }
}

DatasetSplit stratified_split(const LabeledDataset& ds, const SplitSpec& spec) {
  spec.validate();
  const std::size_t k = ds.label_map.size();
  std::vector<std::vector<std::size_t>> by_class(k);
  for (std::size_t i = 0; i < ds.items.size(); ++i) by_class[static_cast<std::size_t>(ds.items[i].label)].push_back(i);

  SeededRng rng(spec.seed);
  std::vector<char> in_train(ds.items.size(), 0);
  for (std::size_t c = 0; c < k; ++c) {
    auto& idx = by_class[c];
    const std::size_t n = idx.size();
    if (n < 2) {
      throw DatasetError("class '" + ds.label_map.names[c] + "' has " + std::to_string(n) +
                         " items; splitting needs at least 2");
    }
    shuffle(idx.begin(), idx.end(), rng);
    // The epsilon keeps products such as 0.7 * 10 from rounding up past 7.
    auto take = static_cast<std::size_t>(std::ceil(spec.train_fraction * static_cast<double>(n) - 1e-9));
    take = std::clamp<std::size_t>(take, 1, n - 1);
    for (std::size_t i = 0; i < take; ++i) in_train[idx[i]] = 1;
  }

  std::vector<DatasetItem> train, val;
  for (std::size_t i = 0; i < ds.items.size(); ++i) (in_train[i] ? train : val).push_back(ds.items[i]);
  return {make_dataset(ds.root, ds.label_map, std::move(train)), make_dataset(ds.root, ds.label_map, std::move(val))};
}

FeatureMatrix load_features(const LabeledDataset& ds, int size, bool segmented, const SegmentationConfig& cfg) {
  if (size < 1) throw ArgumentError("feature size must be >= 1");
  if (segmented) cfg.validate();
  const std::size_t d = 3 * static_cast<std::size_t>(size) * static_cast<std::size_t>(size);
  FeatureMatrix out{Tensor({ds.size(), d}), ds.labels()};
  auto dst = out.features.data();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    RasterImage img = read_image(ds.items[i].path);
    if (segmented) img = segment(img, cfg);
    const NormalizedImage norm = normalize(img, size, size);
    std::copy(norm.data.begin(), norm.data.end(), dst.begin() + static_cast<std::ptrdiff_t>(i * d));
  }
  return out;
}

}  // namespace seedling
