#include "seedling/experiment.hpp"

#include <ctime>

#include "seedling/error.hpp"
#include "seedling/log.hpp"

namespace seedling {

namespace fs = std::filesystem;

DatasetSplit resolve_split(const fs::path& data, const std::optional<fs::path>& val_data, const SplitSpec& spec) {
  const LabeledDataset ds = scan_dataset(data);
  if (!val_data) return stratified_split(ds, spec);
  LabeledDataset val = scan_dataset(*val_data);
  if (val.label_map != ds.label_map) {
    throw DatasetError("class directories of '" + val_data->string() + "' differ from those of '" + data.string() + "'");
  }
  return {ds, std::move(val)};
}

nn::ImageSet to_image_set(FeatureMatrix features, int size) {
  const auto s = static_cast<std::size_t>(size);
  const std::size_t n = features.labels.size();
  return {std::move(features.features).reshaped({n, 3, s, s}), std::move(features.labels)};
}

double cpu_seconds() { return static_cast<double>(std::clock()) / CLOCKS_PER_SEC; }

BaselineRun run_baseline(const std::string& algo, const FeatureMatrix& train, const FeatureMatrix& val,
                         const RunConfig& cfg, const std::vector<std::string>& label_names) {
  GridSearchSpec spec;
  spec.folds = cfg.split.folds;
  spec.seed = cfg.split.spec.seed;
  if (algo == "knn") {
    const auto ks = cfg.knn.k_values.empty() ? knn_grid(train.labels.size()) : cfg.knn.k_values;
    for (int k : ks) spec.candidates.push_back(KnnConfig{k, cfg.knn.weighting});
  } else if (algo == "svm") {
    for (double C : cfg.svm.c_grid) {
      SvmConfig s = cfg.svm.base;
      s.C = C;
      spec.candidates.push_back(s);
    }
  } else {
    throw ArgumentError("unknown baseline algorithm '" + algo + "' (expected knn or svm)");
  }

  log::info("grid search over " + std::to_string(spec.candidates.size()) + " " + algo + " candidates, " +
            std::to_string(spec.folds) + " folds");
  BaselineRun run;
  run.grid = grid_search(train.features, train.labels, spec);
  run.model = fit_baseline(run.grid.table[run.grid.best].params, train.features, train.labels, label_names);
  run.val_pred = predict(run.model, val.features);
  run.val_accuracy = nn::accuracy(run.val_pred, val.labels);
  return run;
}

nlohmann::json grid_table_json(const GridResult& grid) {
  auto table = nlohmann::json::array();
  for (const auto& row : grid.table) table.push_back(row);
  return table;
}

CnnRun run_cnn(const nn::CnnConfig& cfg, const nn::ImageSet& train, const nn::ImageSet& val,
               const std::vector<std::string>& label_names, const std::vector<double>& class_weights,
               const nn::EpochCallback& on_epoch) {
  SeededRng rng(cfg.seed);
  CnnRun run{nn::build_model<float>(cfg, label_names, rng), {}, {}, 0.0, 0.0};
  const double start = cpu_seconds();
  run.history = nn::train(run.model, train, val, class_weights, rng, on_epoch);
  run.cpu_seconds = cpu_seconds() - start;
  run.val_pred = nn::predict(run.model, val.images).classes;
  run.val_accuracy = nn::accuracy(run.val_pred, val.labels);
  return run;
}

nlohmann::json input_metadata(const RunConfig& cfg, bool segmented, int size) {
  nlohmann::json split = cfg.split.spec;
  return {{"input_size", size}, {"segmented", segmented}, {"segmentation", cfg.segmentation}, {"split", split}};
}

EvalReport evaluate_predictions(std::span<const int> preds, std::span<const int> labels,
                                const std::vector<std::string>& names) {
  return summarize(confusion(preds, labels, names.size(), names));
}

namespace {

std::string fmt_param(double v) {
  nlohmann::json j = v;
  return j.dump();
}

}  // namespace

ComparisonResult run_comparison(const DatasetSplit& split, const RunConfig& cfg) {
  const int size = cfg.cnn.input_size;
  const auto& names = split.train.label_map.names;
  if (static_cast<std::size_t>(cfg.cnn.num_classes) != names.size()) {
    throw ConfigError("cnn num_classes " + std::to_string(cfg.cnn.num_classes) + " does not match the " +
                      std::to_string(names.size()) + " dataset classes");
  }
  const auto weights = class_weights(split.train).weights;

  log::info("loading segmented features");
  const double load_start = cpu_seconds();
  const FeatureMatrix seg_train = load_features(split.train, size, true, cfg.segmentation);
  const FeatureMatrix seg_val = load_features(split.val, size, true, cfg.segmentation);
  const double load_seconds = cpu_seconds() - load_start;

  ComparisonResult out;
  out.details = nlohmann::json::object();

  const BaselineRun knn = run_baseline("knn", seg_train, seg_val, cfg, names);
  out.rows.push_back({"KNN", "segmented input, k = " + std::to_string(std::get<KnnConfig>(knn.model.config).n_neighbours),
                      knn.val_accuracy});
  out.details["knn"] = {{"grid", grid_table_json(knn.grid)}, {"val_accuracy", knn.val_accuracy}};
  log::info("KNN validation accuracy " + format_percent(knn.val_accuracy) + "%");

  const BaselineRun svm = run_baseline("svm", seg_train, seg_val, cfg, names);
  out.rows.push_back(
      {"SVM", "segmented input, linear, C = " + fmt_param(std::get<SvmConfig>(svm.model.config).C), svm.val_accuracy});
  out.details["svm"] = {{"grid", grid_table_json(svm.grid)}, {"val_accuracy", svm.val_accuracy}};
  log::info("SVM validation accuracy " + format_percent(svm.val_accuracy) + "%");

  auto progress = [](const char* tag) {
    return [tag](const nn::EpochStats& s) {
      log::info(std::string(tag) + " epoch " + std::to_string(s.epoch) + ": loss " + std::to_string(s.train_loss) +
                ", train " + format_percent(s.train_acc) + "%, val " + format_percent(s.val_acc) + "%");
    };
  };

  {
    log::info("loading raw features");
    const auto raw_train = to_image_set(load_features(split.train, size, false, cfg.segmentation), size);
    const auto raw_val = to_image_set(load_features(split.val, size, false, cfg.segmentation), size);
    nn::CnnConfig c = cfg.cnn;
    c.attention = true;
    const CnnRun run = run_cnn(c, raw_train, raw_val, names, weights, progress("cnn-attention"));
    out.rows.push_back({"CNN", "raw input with attention gate", run.val_accuracy});
    out.details["cnn_attention"] = {{"history", run.history}, {"val_accuracy", run.val_accuracy}};
  }
  {
    nn::CnnConfig c = cfg.cnn;
    c.attention = false;
    const CnnRun run = run_cnn(c, to_image_set(seg_train, size), to_image_set(seg_val, size), names, weights,
                               progress("cnn-segmented"));
    out.rows.push_back({"CNN", "segmented input", run.val_accuracy});
    out.details["cnn_segmented"] = {{"history", run.history}, {"val_accuracy", run.val_accuracy}};
    out.segmented_cnn_cpu_seconds = load_seconds + run.cpu_seconds;
  }

  out.table = comparison_table(out.rows);
  out.details["rows"] = nlohmann::json::array();
  for (const auto& r : out.rows) {
    out.details["rows"].push_back({{"algorithm", r.algorithm}, {"description", r.description}, {"accuracy", r.accuracy}});
  }
  return out;
}

}  // namespace seedling
