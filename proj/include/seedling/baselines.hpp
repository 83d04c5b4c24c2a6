#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "seedling/tensor.hpp"

namespace seedling {

struct KnnConfig {
  int n_neighbours = 5;
  std::string weighting = "uniform";

  void validate() const;
  friend bool operator==(const KnnConfig&, const KnnConfig&) = default;
};

struct SvmConfig {
  double C = 5.0;
  std::string kernel = "linear";
  std::string gamma = "auto";  // recorded only; a linear kernel has no gamma
  int epochs = 20;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const SvmConfig&, const SvmConfig&) = default;
};

void to_json(nlohmann::json& j, const KnnConfig& c);
void from_json(const nlohmann::json& j, KnnConfig& c);
void to_json(nlohmann::json& j, const SvmConfig& c);
void from_json(const nlohmann::json& j, SvmConfig& c);

// Odd k from 1 up to floor(sqrt(n)).
std::vector<int> knn_grid(std::size_t n);

struct KnnModel {
  Tensor features;  // n x d
  std::vector<int> labels;
  std::size_t num_classes = 0;
};

// num_classes = 0 infers max(label) + 1.
KnnModel knn_fit(const Tensor& features, std::span<const int> labels, std::size_t num_classes = 0);

// Euclidean distance, uniform vote. Distance ties go to the lower training
// index; vote ties to the smaller summed distance, then the lower class.
std::vector<int> knn_predict(const KnnModel& model, const Tensor& queries, int k);

// One prediction vector per k, sharing the distance computation.
std::vector<std::vector<int>> knn_predict_multi(const KnnModel& model, const Tensor& queries, std::span<const int> ks);

struct SvmModel {
  Tensor weights;  // K x d
  Tensor bias;     // K
};

// One-vs-rest Pegasos on (1/2)|w|^2 + C * sum hinge with lambda = 1/(C n) and step
// 1/(lambda t). The bias rides along as a constant feature, iterates are
// projected onto the ball of radius 1/sqrt(lambda), and the returned weights
// average the iterates of the second half of training.
SvmModel svm_fit(const Tensor& features, std::span<const int> labels, const SvmConfig& cfg,
                 std::size_t num_classes = 0);

Tensor svm_scores(const SvmModel& model, const Tensor& queries);
// Argmax of the class scores, ties to the lower index.
std::vector<int> svm_predict(const SvmModel& model, const Tensor& queries);

// Sum over classes of (1/2)|w_c|^2 + C * sum_i hinge for the one-vs-rest
// problems, with the bias counted in the norm as during training.
double svm_objective(const SvmModel& model, const Tensor& features, std::span<const int> labels, double C);

using BaselineConfig = std::variant<KnnConfig, SvmConfig>;

void to_json(nlohmann::json& j, const BaselineConfig& c);

struct GridSearchSpec {
  std::vector<BaselineConfig> candidates;
  int folds = 3;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GridRow {
  BaselineConfig params;
  std::vector<double> fold_acc;
  double mean_acc = 0.0;
};

// {"params": {...}, "fold_acc": [...], "mean_acc": r}
void to_json(nlohmann::json& j, const GridRow& row);

struct GridResult {
  std::size_t best = 0;  // index into table
  std::vector<GridRow> table;
};

// Fold index per sample: each class is shuffled and dealt round-robin.
std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed);

// Stratified k-fold cross-validation. Highest mean accuracy wins; ties go to the
// smaller k (KNN) or C (SVM), then to the earlier candidate.
GridResult grid_search(const Tensor& features, std::span<const int> labels, const GridSearchSpec& spec);

// A fitted baseline plus what is needed to reproduce its inputs.
struct BaselineModel {
  BaselineConfig config;
  KnnModel knn;  // used when config holds KnnConfig
  SvmModel svm;  // used when config holds SvmConfig
  std::vector<std::string> label_names;
  nlohmann::json metadata = nlohmann::json::object();

  bool is_knn() const { return std::holds_alternative<KnnConfig>(config); }
  std::string algorithm() const { return is_knn() ? "knn" : "svm"; }
};

BaselineModel fit_baseline(const BaselineConfig& cfg, const Tensor& features, std::span<const int> labels,
                           std::vector<std::string> label_names);
std::vector<int> predict(const BaselineModel& model, const Tensor& queries);

void save_baseline(const BaselineModel& model, const std::filesystem::path& path);
BaselineModel load_baseline(const std::filesystem::path& path);

}  // namespace seedling
