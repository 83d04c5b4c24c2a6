#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "seedling/dataset.hpp"
#include "seedling/error.hpp"
#include "seedling/fileutil.hpp"
#include "tempdir.hpp"

using namespace seedling;
namespace fs = std::filesystem;

namespace {

void make_tree(const fs::path& root, const std::vector<std::pair<std::string, int>>& classes, std::uint64_t seed = 1) {
  SeededRng rng(seed);
  for (const auto& [name, n] : classes) {
    fs::create_directories(root / name);
    for (int i = 0; i < n; ++i) {
      RasterImage img(6, 6, 3);
      for (auto& v : img.data()) v = static_cast<std::uint8_t>(rng.bounded(256));
      write_image(img, root / name / ("f" + std::to_string(i) + (i % 2 ? ".png" : ".ppm")));
    }
  }
}

LabeledDataset synthetic_ds(const std::vector<std::size_t>& counts) {
  LabelMap map;
  std::vector<DatasetItem> items;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    map.names.push_back("c" + std::to_string(c));
    for (std::size_t i = 0; i < counts[c]; ++i)
      items.push_back({fs::path("root") / map.names.back() / (std::to_string(i) + ".png"), static_cast<int>(c)});
  }
  return make_dataset("root", map, items);
}

}  // namespace

TEST_SUITE("dataset") {
  TEST_CASE("scan sorts classes and files") {
    TempDir dir("scan");
    make_tree(dir.path(), {{"b", 3}, {"a", 2}});
    write_text_file(dir / "a" / "notes.txt", "ignored");
    write_text_file(dir / "README", "ignored");
    const auto ds = scan_dataset(dir.path());
    CHECK(ds.label_map.names == std::vector<std::string>{"a", "b"});
    CHECK(ds.counts == std::vector<std::size_t>{2, 3});
    REQUIRE(ds.size() == 5);
    CHECK(ds.items[0].path.filename() == "f0.ppm");
    CHECK(ds.items[1].path.filename() == "f1.png");
    CHECK(ds.items[2].label == 1);
    CHECK(ds.labels() == std::vector<int>{0, 0, 1, 1, 1});
    CHECK(ds.label_map.index_of("b") == 1);
    CHECK(ds.label_map.index_of("z") == -1);
    CHECK(scan_dataset(dir.path()) == ds);
  }

  TEST_CASE("scan errors") {
    TempDir dir("scan");
    make_tree(dir / "one", {{"only", 2}});
    CHECK_THROWS_AS(scan_dataset(dir / "one"), DatasetError);
    make_tree(dir / "hole", {{"a", 2}, {"b", 0}});
    CHECK_THROWS_AS(scan_dataset(dir / "hole"), DatasetError);
    CHECK_THROWS_AS(scan_dataset(dir / "missing"), IoError);
  }

  TEST_CASE("rebase keeps relative layout") {
    const auto ds = synthetic_ds({2, 2});
    const auto moved = rebase(ds, "elsewhere");
    CHECK(moved.root == fs::path("elsewhere"));
    CHECK(moved.counts == ds.counts);
    CHECK(moved.items[3].path == fs::path("elsewhere") / "c1" / "1.png");
  }

  TEST_CASE("class weights") {
    const auto balanced = class_weights(synthetic_ds({5, 5, 5}));
    for (double w : balanced.weights) CHECK(w == 1.0);
    const auto skewed = class_weights(synthetic_ds({10, 30}));
    CHECK(skewed.total == 40);
    CHECK(skewed.weights[0] == doctest::Approx(2.0));
    CHECK(skewed.weights[1] == doctest::Approx(2.0 / 3.0));

    SeededRng rng(17);
    for (int t = 0; t < 50; ++t) {
      std::vector<std::size_t> counts(2 + rng.bounded(10));
      for (auto& c : counts) c = 1 + rng.bounded(40);
      const auto s = class_weights(synthetic_ds(counts));
      double mean = 0.0;
      for (std::size_t c = 0; c < counts.size(); ++c) mean += s.weights[c] * static_cast<double>(counts[c]);
      REQUIRE(mean / static_cast<double>(s.total) == doctest::Approx(1.0).epsilon(1e-12));
    }

    nlohmann::json j = skewed;
    CHECK(j["total"] == 40);
    CHECK(j["classes"][1]["name"] == "c1");
    CHECK(j["classes"][1]["count"] == 30);
  }

  TEST_CASE("split counts") {
    const auto split = stratified_split(synthetic_ds({10, 10}), {0.8, 3});
    CHECK(split.train.counts == std::vector<std::size_t>{8, 8});
    CHECK(split.val.counts == std::vector<std::size_t>{2, 2});
    const auto half = stratified_split(synthetic_ds({3, 3, 3}), {0.5, 3});
    CHECK(half.train.counts == std::vector<std::size_t>{2, 2, 2});
    CHECK(half.val.counts == std::vector<std::size_t>{1, 1, 1});
    // Very high fractions still leave one validation item.
    CHECK(stratified_split(synthetic_ds({4, 4}), {0.99, 3}).val.counts == std::vector<std::size_t>{1, 1});
  }

  TEST_CASE("split partitions and is deterministic") {
    SeededRng rng(9);
    for (int t = 0; t < 30; ++t) {
      std::vector<std::size_t> counts(2 + rng.bounded(5));
      for (auto& c : counts) c = 2 + rng.bounded(30);
      const auto ds = synthetic_ds(counts);
      const SplitSpec spec{0.1 + 0.8 * rng.uniform(), rng.next_u64()};
      const auto a = stratified_split(ds, spec), b = stratified_split(ds, spec);
      REQUIRE(a.train == b.train);
      REQUIRE(a.val == b.val);

      std::multiset<fs::path> seen;
      for (const auto& it : a.train.items) seen.insert(it.path);
      for (const auto& it : a.val.items) seen.insert(it.path);
      std::multiset<fs::path> all;
      for (const auto& it : ds.items) all.insert(it.path);
      REQUIRE(seen == all);
      for (std::size_t c = 0; c < counts.size(); ++c) {
        REQUIRE(a.val.counts[c] >= 1);
        const double want = spec.train_fraction * static_cast<double>(counts[c]);
        REQUIRE(std::abs(static_cast<double>(a.train.counts[c]) - want) <= 1.0);
      }
    }
  }

  TEST_CASE("split seed changes the draw") {
    const auto ds = synthetic_ds({20, 20});
    CHECK(stratified_split(ds, {0.5, 1}).train != stratified_split(ds, {0.5, 2}).train);
  }

  TEST_CASE("split errors") {
    CHECK_THROWS_AS(stratified_split(synthetic_ds({1, 4}), {}), DatasetError);
    CHECK_THROWS_AS(stratified_split(synthetic_ds({4, 4}), {1.0, 0}), ConfigError);
    CHECK_THROWS_AS(stratified_split(synthetic_ds({4, 4}), {0.0, 0}), ConfigError);
  }

  TEST_CASE("written split rescans to the same counts") {
    TempDir dir("rescan");
    make_tree(dir / "src", {{"a", 5}, {"b", 4}});
    const auto split = stratified_split(scan_dataset(dir / "src"), {0.6, 4});
    for (const auto& it : split.train.items) {
      const auto rel = it.path.lexically_relative(dir / "src");
      fs::create_directories((dir / "train" / rel).parent_path());
      fs::copy_file(it.path, dir / "train" / rel);
    }
    CHECK(scan_dataset(dir / "train").counts == split.train.counts);
  }

  TEST_CASE("load_features") {
    TempDir dir("feat");
    make_tree(dir.path(), {{"a", 2}, {"b", 2}});
    write_image(RasterImage(6, 6, 3, 90), dir / "b" / "f9.ppm");
    const auto ds = scan_dataset(dir.path());
    const SegmentationConfig cfg{5, 1.0, {}, 3};
    for (bool seg : {false, true}) {
      const auto fm = load_features(ds, 4, seg, cfg);
      REQUIRE(fm.features.shape() == Shape{5, 48});
      REQUIRE(fm.labels == ds.labels());
      for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto img = read_image(ds.items[i].path);
        const auto want = normalize(seg ? segment(img, cfg) : img, 4, 4);
        for (std::size_t k = 0; k < 48; ++k) REQUIRE(fm.features[i * 48 + k] == want.data[k]);
      }
      for (std::size_t k = 0; k < 48; ++k) REQUIRE(fm.features[4 * 48 + k] == 0.0f);
    }
    CHECK(load_features(ds, 64, false, cfg).features.dim(1) == 12288);

    write_text_file(dir / "a" / "f0.ppm", "P6\n6 6\n255\nxx");
    CHECK_THROWS_AS(load_features(scan_dataset(dir.path()), 4, false, cfg), FormatError);
  }
}
