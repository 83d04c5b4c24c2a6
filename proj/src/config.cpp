#include "seedling/config.hpp"

#include <cstdio>

#include "seedling/detail/json_keys.hpp"
#include "seedling/error.hpp"
#include "seedling/fileutil.hpp"

namespace seedling {

using detail::check_keys;
using detail::read_key;

void to_json(nlohmann::json& j, const HsvRange& r) {
  j = {{"h_lo", r.h_lo}, {"h_hi", r.h_hi}, {"s_lo", r.s_lo}, {"s_hi", r.s_hi}, {"v_lo", r.v_lo}, {"v_hi", r.v_hi}};
}

void from_json(const nlohmann::json& j, HsvRange& r) {
  check_keys(j, "segmentation.hsv_range", {"h_lo", "h_hi", "s_lo", "s_hi", "v_lo", "v_hi"});
  read_key(j, "segmentation.hsv_range", "h_lo", r.h_lo);
  read_key(j, "segmentation.hsv_range", "h_hi", r.h_hi);
  read_key(j, "segmentation.hsv_range", "s_lo", r.s_lo);
  read_key(j, "segmentation.hsv_range", "s_hi", r.s_hi);
  read_key(j, "segmentation.hsv_range", "v_lo", r.v_lo);
  read_key(j, "segmentation.hsv_range", "v_hi", r.v_hi);
}

void to_json(nlohmann::json& j, const SegmentationConfig& c) {
  j = {{"blur_size", c.blur_size}, {"blur_sigma", c.blur_sigma}, {"hsv_range", c.hsv_range}, {"erode_size", c.erode_size}};
}

void from_json(const nlohmann::json& j, SegmentationConfig& c) {
  check_keys(j, "segmentation", {"blur_size", "blur_sigma", "hsv_range", "erode_size"});
  read_key(j, "segmentation", "blur_size", c.blur_size);
  read_key(j, "segmentation", "blur_sigma", c.blur_sigma);
  if (j.contains("hsv_range")) from_json(j.at("hsv_range"), c.hsv_range);
  read_key(j, "segmentation", "erode_size", c.erode_size);
}

void to_json(nlohmann::json& j, const SplitSpec& s) {
  j = {{"train_fraction", s.train_fraction}, {"seed", s.seed}};
}

void to_json(nlohmann::json& j, const RunConfig& c) {
  nlohmann::json svm = c.svm.base;
  svm["C_grid"] = c.svm.c_grid;
  nlohmann::json split = c.split.spec;
  split["folds"] = c.split.folds;
  j = {{"segmentation", c.segmentation},
       {"cnn", c.cnn},
       {"svm", std::move(svm)},
       {"knn", {{"k_values", c.knn.k_values}, {"weighting", c.knn.weighting}}},
       {"split", std::move(split)},
       {"paths", {{"data", c.paths.data}, {"output", c.paths.output}}}};
}

void from_json(const nlohmann::json& j, RunConfig& c) {
  check_keys(j, "run", {"segmentation", "cnn", "svm", "knn", "split", "paths"});
  if (j.contains("segmentation")) from_json(j.at("segmentation"), c.segmentation);
  if (j.contains("cnn")) nn::from_json(j.at("cnn"), c.cnn);
  if (j.contains("svm")) {
    nlohmann::json svm = j.at("svm");
    check_keys(svm, "svm", {"C", "kernel", "gamma", "epochs", "seed", "C_grid"});
    read_key(svm, "svm", "C_grid", c.svm.c_grid);
    svm.erase("C_grid");
    from_json(svm, c.svm.base);
  }
  if (j.contains("knn")) {
    const auto& knn = j.at("knn");
    check_keys(knn, "knn", {"k_values", "weighting"});
    read_key(knn, "knn", "k_values", c.knn.k_values);
    read_key(knn, "knn", "weighting", c.knn.weighting);
  }
  if (j.contains("split")) {
    const auto& split = j.at("split");
    check_keys(split, "split", {"train_fraction", "seed", "folds"});
    read_key(split, "split", "train_fraction", c.split.spec.train_fraction);
    read_key(split, "split", "seed", c.split.spec.seed);
    read_key(split, "split", "folds", c.split.folds);
  }
  if (j.contains("paths")) {
    const auto& paths = j.at("paths");
    check_keys(paths, "paths", {"data", "output"});
    read_key(paths, "paths", "data", c.paths.data);
    read_key(paths, "paths", "output", c.paths.output);
  }
}

void RunConfig::validate() const {
  try {
    segmentation.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  cnn.validate();
  svm.base.validate();
  if (svm.c_grid.empty()) throw ConfigError("svm C_grid must not be empty");
  for (double C : svm.c_grid) {
    if (!(C > 0.0)) throw ConfigError("svm C_grid values must be positive");
  }
  for (int k : knn.k_values) {
    if (k < 1) throw ConfigError("knn k_values must be >= 1");
  }
  KnnConfig{1, knn.weighting}.validate();
  split.spec.validate();
  if (split.folds < 2) throw ConfigError("split folds must be >= 2");
}

void RunConfig::set_seed(std::uint64_t seed) {
  split.spec.seed = seed;
  cnn.seed = seed;
  svm.base.seed = seed;
}

RunConfig parse_run_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  from_json(j, c);
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) { return parse_run_config(read_text_file(path)); }

std::string config_hash(const RunConfig& c) {
  const std::string text = nlohmann::json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace seedling
