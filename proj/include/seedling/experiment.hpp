#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "seedling/baselines.hpp"
#include "seedling/config.hpp"
#include "seedling/dataset.hpp"
#include "seedling/metrics.hpp"
#include "seedling/nn/model.hpp"

namespace seedling {

// Train/validation datasets: either a stratified split of one tree, or two
// trees whose class names must agree.
DatasetSplit resolve_split(const std::filesystem::path& data, const std::optional<std::filesystem::path>& val_data,
                           const SplitSpec& spec);

// Reinterprets n x (3 S S) rows as an N x 3 x S x S batch.
nn::ImageSet to_image_set(FeatureMatrix features, int size);

// Process CPU seconds, for budget reporting.
double cpu_seconds();

struct BaselineRun {
  BaselineModel model;
  GridResult grid;
  std::vector<int> val_pred;
  double val_accuracy = 0.0;
};

// Grid search on the training features, refit of the winner on all of them,
// then validation. algo is "knn" or "svm".
BaselineRun run_baseline(const std::string& algo, const FeatureMatrix& train, const FeatureMatrix& val,
                         const RunConfig& cfg, const std::vector<std::string>& label_names);

nlohmann::json grid_table_json(const GridResult& grid);

struct CnnRun {
  nn::Model<float> model;
  std::vector<nn::EpochStats> history;
  std::vector<int> val_pred;
  double val_accuracy = 0.0;
  double cpu_seconds = 0.0;  // training only
};

CnnRun run_cnn(const nn::CnnConfig& cfg, const nn::ImageSet& train, const nn::ImageSet& val,
               const std::vector<std::string>& label_names, const std::vector<double>& class_weights,
               const nn::EpochCallback& on_epoch = {});

// Metadata stored with trained models so evaluation can rebuild the inputs.
nlohmann::json input_metadata(const RunConfig& cfg, bool segmented, int size);

struct ComparisonResult {
  std::vector<ComparisonRow> rows;  // KNN, SVM, CNN raw + attention, CNN + segmentation
  std::string table;
  nlohmann::json details;
  // CPU time of the CNN + segmentation regime: segmented feature loading plus
  // training. Kept out of details so reports stay reproducible.
  double segmented_cnn_cpu_seconds = 0.0;
};

// The four regimes on one shared split.
ComparisonResult run_comparison(const DatasetSplit& split, const RunConfig& cfg);

// Confusion matrix and report for predictions against a dataset.
EvalReport evaluate_predictions(std::span<const int> preds, std::span<const int> labels,
                                const std::vector<std::string>& names);

}  // namespace seedling
