#include "seedling/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <optional>

#include "CLI11.hpp"
#include "seedling/baselines.hpp"
#include "seedling/config.hpp"
#include "seedling/container.hpp"
#include "seedling/dataset.hpp"
#include "seedling/error.hpp"
#include "seedling/experiment.hpp"
#include "seedling/fileutil.hpp"
#include "seedling/log.hpp"
#include "seedling/metrics.hpp"
#include "seedling/nn/checkpoint.hpp"
#include "seedling/segmentation.hpp"
#include "seedling/synthetic.hpp"

namespace seedling::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  // shared
  std::string config;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  bool timestamps = false;

  std::string input, output;  // segment
  std::string data, val_data, segmented_dir, out, aux_out;
  std::string algo;
  std::optional<int> size, folds, epochs;
  bool no_segmentation = false;
  bool attention = false;

  std::string model, report, confusion_path, heatmap, split = "all";  // evaluate

  std::size_t synth_train = 200, synth_val = 60;  // synth
  int synth_size = 64;
};

void write_json(const fs::path& path, const nlohmann::json& j) { write_text_file(path, j.dump(2) + "\n"); }

RunConfig load_config(const Options& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_run_config(o.config);
  if (o.seed) cfg.set_seed(*o.seed);
  if (o.folds) cfg.split.folds = *o.folds;
  if (o.epochs) cfg.cnn.epochs = *o.epochs;
  if (o.attention) cfg.cnn.attention = true;
  if (o.size) cfg.cnn.input_size = *o.size;
  cfg.validate();
  return cfg;
}

fs::path data_root(const Options& o, const RunConfig& cfg) {
  if (!o.data.empty()) return o.data;
  if (!cfg.paths.data.empty()) return cfg.paths.data;
  throw ConfigError("no dataset given: pass --data or set paths.data in the config");
}

fs::path output_file(const Options& o, const RunConfig& cfg, const std::string& default_name) {
  if (!o.out.empty()) return o.out;
  if (!cfg.paths.output.empty()) {
    fs::create_directories(cfg.paths.output);
    return fs::path(cfg.paths.output) / default_name;
  }
  throw ConfigError("no output given: pass --out or set paths.output in the config");
}

std::optional<fs::path> val_root(const Options& o) {
  if (o.val_data.empty()) return std::nullopt;
  return fs::path(o.val_data);
}

nlohmann::json run_meta(const Options& o, const RunConfig& cfg) {
  nlohmann::json meta{{"config_hash", config_hash(cfg)}, {"seed", cfg.split.spec.seed}};
  if (o.timestamps) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    meta["timestamp"] = buf;
  }
  return meta;
}

// The dataset's class count always wins over the configured one.
void adopt_classes(RunConfig& cfg, const LabeledDataset& ds) {
  const auto k = static_cast<int>(ds.label_map.size());
  if (cfg.cnn.num_classes != k) {
    log::info("using " + std::to_string(k) + " classes from the dataset");
    cfg.cnn.num_classes = k;
  }
}

int cmd_segment(const Options& o, std::ostream& out) {
  const RunConfig cfg = load_config(o);
  const auto r = segment_directory(o.input, o.output, cfg.segmentation);
  out << "processed " << r.written << ", skipped " << r.skipped << "\n";
  return kOk;
}

int cmd_stats(const Options& o, std::ostream& out) {
  const RunConfig cfg = load_config(o);
  out << nlohmann::json(class_weights(scan_dataset(data_root(o, cfg)))).dump(2) << "\n";
  return kOk;
}

int cmd_train_baseline(const Options& o, std::ostream& out) {
  RunConfig cfg = load_config(o);
  if (!o.segmented_dir.empty() && !o.val_data.empty()) {
    throw ConfigError("--segmented-dir cannot be combined with --val-data");
  }
  const fs::path root = data_root(o, cfg);
  const fs::path model_path = output_file(o, cfg, o.algo + ".model");
  const fs::path grid_path = o.aux_out.empty() ? fs::path(model_path.string() + ".grid.json") : fs::path(o.aux_out);
  const int size = cfg.cnn.input_size;

  DatasetSplit split = resolve_split(root, val_root(o), cfg.split.spec);
  const auto& names = split.train.label_map.names;
  bool segment_now = !o.no_segmentation;
  if (!o.segmented_dir.empty()) {
    split.train = rebase(split.train, o.segmented_dir);
    split.val = rebase(split.val, o.segmented_dir);
    segment_now = false;
  }
  const FeatureMatrix train = load_features(split.train, size, segment_now, cfg.segmentation);
  const FeatureMatrix val = load_features(split.val, size, segment_now, cfg.segmentation);

  BaselineRun run = run_baseline(o.algo, train, val, cfg, names);
  run.model.metadata = input_metadata(cfg, !o.no_segmentation, size);
  save_baseline(run.model, model_path);

  nlohmann::json params;
  to_json(params, run.grid.table[run.grid.best].params);
  write_json(grid_path, {{"grid", grid_table_json(run.grid)}, {"best", params}, {"val_accuracy", run.val_accuracy},
                         {"meta", run_meta(o, cfg)}});
  out << "best " << params.dump() << "\n";
  out << "validation accuracy: " << format_percent(run.val_accuracy) << "%\n";
  return kOk;
}

int cmd_train_cnn(const Options& o, std::ostream& out) {
  RunConfig cfg = load_config(o);
  const fs::path root = data_root(o, cfg);
  const fs::path ckpt = output_file(o, cfg, "cnn.ckpt");
  const fs::path history_path = o.aux_out.empty() ? fs::path(ckpt.string() + ".history.json") : fs::path(o.aux_out);

  const DatasetSplit split = resolve_split(root, val_root(o), cfg.split.spec);
  adopt_classes(cfg, split.train);
  const bool segmented = !o.no_segmentation;
  const int size = cfg.cnn.input_size;
  const auto train = to_image_set(load_features(split.train, size, segmented, cfg.segmentation), size);
  const auto val = to_image_set(load_features(split.val, size, segmented, cfg.segmentation), size);

  CnnRun run = run_cnn(cfg.cnn, train, val, split.train.label_map.names, class_weights(split.train).weights,
                       [](const nn::EpochStats& s) {
                         log::info("epoch " + std::to_string(s.epoch) + ": loss " + std::to_string(s.train_loss) +
                                   ", train " + format_percent(s.train_acc) + "%, val " + format_percent(s.val_acc) +
                                   "%");
                       });
  run.model.metadata() = input_metadata(cfg, segmented, size);
  nn::save_checkpoint(run.model, ckpt);
  write_json(history_path, {{"history", run.history}, {"meta", run_meta(o, cfg)}});
  const auto& last = run.history.back();
  out << "final train accuracy: " << format_percent(last.train_acc) << "%\n";
  out << "validation accuracy: " << format_percent(run.val_accuracy) << "%\n";
  return kOk;
}

struct InputSpec {
  int size = 64;
  bool segmented = true;
  SegmentationConfig segmentation;
  SplitSpec split;
};

InputSpec input_spec(const nlohmann::json& meta, int fallback_size) {
  InputSpec s;
  s.size = fallback_size;
  try {
    if (meta.contains("input_size")) meta.at("input_size").get_to(s.size);
    if (meta.contains("segmented")) meta.at("segmented").get_to(s.segmented);
    if (meta.contains("segmentation")) from_json(meta.at("segmentation"), s.segmentation);
    if (meta.contains("split")) {
      meta.at("split").at("train_fraction").get_to(s.split.train_fraction);
      meta.at("split").at("seed").get_to(s.split.seed);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model metadata: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("model metadata: ") + e.what());
  }
  return s;
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  const RunConfig cfg = load_config(o);
  const fs::path root = data_root(o, cfg);
  if (!fs::exists(o.model)) throw IoError("model file '" + o.model + "' does not exist");
  const std::string magic = peek_magic(o.model);

  std::optional<nn::Model<float>> cnn;
  std::optional<BaselineModel> baseline;
  nlohmann::json meta;
  std::vector<std::string> names;
  int fallback_size = cfg.cnn.input_size;
  if (magic == kCnnMagic) {
    cnn.emplace(nn::load_checkpoint(o.model));
    meta = cnn->metadata();
    names = cnn->label_names();
    fallback_size = cnn->config().input_size;
  } else if (magic == kBaselineMagic) {
    baseline.emplace(load_baseline(o.model));
    meta = baseline->metadata;
    names = baseline->label_names;
  } else {
    throw ContainerError(ContainerError::Kind::bad_magic, "'" + o.model + "' is not a seedling model file");
  }
  const InputSpec in = input_spec(meta, fallback_size);

  LabeledDataset ds = scan_dataset(root);
  if (ds.label_map.names != names) throw DatasetError("dataset classes differ from the classes the model was trained on");
  if (o.split == "train" || o.split == "val") {
    auto parts = stratified_split(ds, in.split);
    ds = o.split == "train" ? std::move(parts.train) : std::move(parts.val);
  }

  FeatureMatrix features = load_features(ds, in.size, in.segmented, in.segmentation);
  std::vector<int> preds;
  if (cnn) {
    preds = nn::predict(*cnn, to_image_set(std::move(features), in.size).images).classes;
  } else {
    preds = predict(*baseline, features.features);
  }

  EvalReport report = evaluate_predictions(preds, ds.labels(), names);
  render_confusion(report.confusion, o.confusion_path, o.heatmap);
  report.confusion_csv = o.confusion_path;
  report.meta = run_meta(o, cfg);
  report.meta["model"] = o.model;
  report.meta["split"] = o.split;
  write_json(o.report, report);
  out << "accuracy: " << format_percent(report.accuracy) << "%\n";
  return kOk;
}

int cmd_compare(const Options& o, std::ostream& out) {
  RunConfig cfg = load_config(o);
  const fs::path root = data_root(o, cfg);
  const fs::path table_path = output_file(o, cfg, "comparison.md");
  const DatasetSplit split = resolve_split(root, val_root(o), cfg.split.spec);
  adopt_classes(cfg, split.train);

  const ComparisonResult result = run_comparison(split, cfg);
  write_text_file(table_path, result.table);
  if (!o.aux_out.empty()) {
    nlohmann::json details = result.details;
    details["meta"] = run_meta(o, cfg);
    write_json(o.aux_out, details);
  }
  out << result.table;
  return kOk;
}

int cmd_synth(const Options& o, std::ostream& out) {
  const std::uint64_t seed = o.seed.value_or(0);
  const fs::path root = o.out;
  const auto n_train = synthetic::write_tree(root / "train", o.synth_train, o.synth_size, seed);
  // Offset keeps the validation stream disjoint from the training one.
  const auto n_val = synthetic::write_tree(root / "val", o.synth_val, o.synth_size, seed ^ 0x9e3779b97f4a7c15ULL);
  out << "wrote " << n_train << " training and " << n_val << " validation images to " << root.string() << "\n";
  return kOk;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
  sub->add_option("--seed", o.seed, "seed for splits, shuffling and initialization");
  sub->add_flag("-q,--quiet", o.quiet, "only print warnings and errors");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Plant seedling classification: segmentation, baselines and a from-scratch CNN", "seedling"};
  app.require_subcommand(1);
  app.fallthrough(false);

  auto* seg = app.add_subcommand("segment", "write a background-segmented mirror of an image tree");
  seg->add_option("--input", o.input, "input directory")->required();
  seg->add_option("--output", o.output, "output directory")->required();
  add_common(seg, o);

  auto* stats = app.add_subcommand("stats", "print the class distribution of a dataset as JSON");
  stats->add_option("--data", o.data, "dataset root");
  add_common(stats, o);

  auto* tb = app.add_subcommand("train-baseline", "grid-search and train a KNN or SVM baseline");
  tb->add_option("--algo", o.algo, "knn or svm")->required()->check(CLI::IsMember({"knn", "svm"}));
  tb->add_option("--data", o.data, "dataset root");
  tb->add_option("--val-data", o.val_data, "separate validation tree instead of a split");
  tb->add_option("--segmented-dir", o.segmented_dir, "pre-segmented mirror of --data");
  tb->add_flag("--no-segmentation", o.no_segmentation, "use raw images");
  tb->add_option("--size", o.size, "feature image side in pixels")->check(CLI::PositiveNumber);
  tb->add_option("--folds", o.folds, "cross-validation folds");
  tb->add_option("--out", o.out, "model file");
  tb->add_option("--grid", o.aux_out, "grid-search table JSON (default <out>.grid.json)");
  add_common(tb, o);

  auto* tc = app.add_subcommand("train-cnn", "train the convolutional network");
  tc->add_option("--data", o.data, "dataset root");
  tc->add_option("--val-data", o.val_data, "separate validation tree instead of a split");
  tc->add_flag("--no-segmentation", o.no_segmentation, "feed normalized raw images");
  tc->add_flag("--attention", o.attention, "insert the spatial attention gate");
  tc->add_option("--epochs", o.epochs, "training epochs");
  tc->add_option("--out", o.out, "checkpoint file");
  tc->add_option("--history", o.aux_out, "per-epoch history JSON (default <out>.history.json)");
  add_common(tc, o);

  auto* ev = app.add_subcommand("evaluate", "evaluate a CNN checkpoint or baseline model on a dataset");
  ev->add_option("--model", o.model, "model file")->required();
  ev->add_option("--data", o.data, "dataset root");
  ev->add_option("--report", o.report, "report JSON")->required();
  ev->add_option("--confusion", o.confusion_path, "confusion matrix CSV")->required();
  ev->add_option("--heatmap", o.heatmap, "optional confusion heatmap (.ppm or .png)");
  ev->add_option("--split", o.split, "all, train or val (the split stored with the model)")
      ->check(CLI::IsMember({"all", "train", "val"}));
  ev->add_flag("--timestamps", o.timestamps, "record the wall-clock time in the report");
  add_common(ev, o);

  auto* cmp = app.add_subcommand("compare", "run KNN, SVM, CNN raw+attention and CNN+segmentation on one split");
  cmp->add_option("--data", o.data, "dataset root");
  cmp->add_option("--val-data", o.val_data, "separate validation tree instead of a split");
  cmp->add_option("--epochs", o.epochs, "CNN training epochs");
  cmp->add_option("--out", o.out, "markdown table");
  cmp->add_option("--details", o.aux_out, "optional JSON with grids and training histories");
  cmp->add_flag("--timestamps", o.timestamps, "record the wall-clock time in the details");
  add_common(cmp, o);

  auto* syn = app.add_subcommand("synth", "write the synthetic 12-class dataset (train/ and val/)");
  syn->add_option("--out", o.out, "output directory")->required();
  syn->add_option("--train", o.synth_train, "training images");
  syn->add_option("--val", o.synth_val, "validation images");
  syn->add_option("--size", o.synth_size, "image side in pixels")->check(CLI::Range(32, 4096));
  syn->add_option("--seed", o.seed, "generator seed");
  syn->add_flag("-q,--quiet", o.quiet, "only print warnings and errors");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    const auto subs = app.get_subcommands();
    err << "error: " << e.what() << "\n\n" << (subs.empty() ? app.help() : subs.front()->help());
    return kUsage;
  }

  log::set_level(o.quiet ? log::Level::warn : log::Level::info);
  try {
    if (seg->parsed()) return cmd_segment(o, out);
    if (stats->parsed()) return cmd_stats(o, out);
    if (tb->parsed()) return cmd_train_baseline(o, out);
    if (tc->parsed()) return cmd_train_cnn(o, out);
    if (ev->parsed()) return cmd_evaluate(o, out);
    if (cmp->parsed()) return cmd_compare(o, out);
    if (syn->parsed()) return cmd_synth(o, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

}  // namespace seedling::cli
