#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "seedling/nn/layers.hpp"
#include "seedling/tensor.hpp"

namespace seedling::nn {

struct CnnConfig {
  int input_size = 64;
  std::vector<int> conv_channels{64, 64, 128, 128, 256, 256};
  int kernel = 3;
  int pool = 2;
  double dropout_p = 0.1;
  std::vector<int> fc_sizes{256, 64};
  int num_classes = 12;
  bool attention = false;
  double learning_rate = 1e-3;
  int batch_size = 32;
  int epochs = 50;
  std::uint64_t seed = 0;

  // Throws ConfigError when an invariant is violated.
  void validate() const;
  // Spatial extent after every pooling stage.
  int feature_map_size() const;
  std::size_t flattened_size() const;

  friend bool operator==(const CnnConfig&, const CnnConfig&) = default;
};

void to_json(nlohmann::json& j, const CnnConfig& cfg);
void from_json(const nlohmann::json& j, CnnConfig& cfg);

// Sequential network: [conv-relu, conv-relu, (attention), pool, dropout] per
// channel pair, flatten, then dense-relu blocks and a linear output layer.
template <typename T>
class Model {
 public:
  Model(CnnConfig cfg, std::vector<std::string> label_names);

  const CnnConfig& config() const { return cfg_; }
  const std::vector<std::string>& label_names() const { return label_names_; }

  // Free-form metadata persisted with checkpoints (e.g. preprocessing).
  nlohmann::json& metadata() { return metadata_; }
  const nlohmann::json& metadata() const { return metadata_; }

  // x: N x 3 x S x S. Returns N x num_classes logits.
  BasicTensor<T> forward(const BasicTensor<T>& x, bool training);
  // Back-propagates d loss / d logits, leaving gradients on every parameter.
  void backward(const BasicTensor<T>& grad_logits);

  std::vector<Param<T>> params();
  std::vector<ConstParam<T>> params() const;
  std::size_t parameter_count() const;
  const std::vector<std::unique_ptr<Layer<T>>>& layers() const { return layers_; }

  // Gives each dropout layer its own stream derived from seed.
  void seed_dropout(std::uint64_t seed);

 private:
  CnnConfig cfg_;
  std::vector<std::string> label_names_;
  nlohmann::json metadata_ = nlohmann::json::object();
  std::vector<std::unique_ptr<Layer<T>>> layers_;
};

// Builds the layer stack and draws He-style weights (normal * sqrt(2 / fan_in),
// zero biases) from rng in layer order.
template <typename T>
Model<T> build_model(const CnnConfig& cfg, std::vector<std::string> label_names, SeededRng& rng);

// Closed-form trainable parameter count for a configuration.
std::size_t expected_parameter_count(const CnnConfig& cfg);

// N x 3 x S x S images (planar channels) with one label per image.
struct ImageSet {
  Tensor images;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;  // from the training-mode forward passes of the epoch
  double val_acc = 0.0;
};

void to_json(nlohmann::json& j, const EpochStats& s);

using EpochCallback = std::function<void(const EpochStats&)>;

// Minibatch Adam on weighted cross-entropy for cfg.epochs epochs. Shuffling and
// dropout masks come from rng, so a fixed seed gives bit-identical weights.
std::vector<EpochStats> train(Model<float>& model, const ImageSet& train_set, const ImageSet& val_set,
                              std::span<const double> class_weights, SeededRng& rng,
                              const EpochCallback& on_epoch = {});

struct Prediction {
  std::vector<int> classes;
  Tensor probabilities;  // N x K, rows sum to 1
};

// Evaluation-mode inference; argmax ties resolve to the lowest class index.
Prediction predict(Model<float>& model, const Tensor& images);

double accuracy(std::span<const int> predicted, std::span<const int> labels);

}  // namespace seedling::nn
