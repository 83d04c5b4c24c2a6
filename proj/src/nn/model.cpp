#include "seedling/nn/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "seedling/error.hpp"
#include "seedling/nn/adam.hpp"
#include "seedling/nn/loss.hpp"

namespace seedling::nn {

void CnnConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("cnn config: " + msg); };
  if (input_size < 1) fail("input_size must be positive");
  if (conv_channels.empty() || conv_channels.size() % 2 != 0) fail("conv_channels must list channel pairs");
  for (int c : conv_channels)
    if (c < 1) fail("conv_channels entries must be positive");
  if (kernel < 1 || kernel % 2 == 0) fail("kernel must be odd and >= 1");
  if (pool < 1) fail("pool must be >= 1");
  long extent = input_size;
  for (std::size_t i = 0; i < conv_channels.size() / 2; ++i) {
    if (extent % pool != 0) fail("input_size must be divisible by pool^(number of conv pairs)");
    extent /= pool;
  }
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) fail("dropout_p must lie in [0, 1)");
  for (int f : fc_sizes)
    if (f < 1) fail("fc_sizes entries must be positive");
  if (num_classes < 2) fail("num_classes must be >= 2");
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (epochs < 1) fail("epochs must be >= 1");
}

int CnnConfig::feature_map_size() const {
  int extent = input_size;
  for (std::size_t i = 0; i < conv_channels.size() / 2; ++i) extent /= pool;
  return extent;
}

std::size_t CnnConfig::flattened_size() const {
  const auto s = static_cast<std::size_t>(feature_map_size());
  return static_cast<std::size_t>(conv_channels.back()) * s * s;
}

void to_json(nlohmann::json& j, const CnnConfig& c) {
  j = nlohmann::json{{"input_size", c.input_size},   {"conv_channels", c.conv_channels},
                     {"kernel", c.kernel},           {"pool", c.pool},
                     {"dropout_p", c.dropout_p},     {"fc_sizes", c.fc_sizes},
                     {"num_classes", c.num_classes}, {"attention", c.attention},
                     {"learning_rate", c.learning_rate}, {"batch_size", c.batch_size},
                     {"epochs", c.epochs},           {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, CnnConfig& c) {
  if (!j.is_object()) throw ConfigError("cnn config must be a JSON object");
  static const char* const kKeys[] = {"input_size", "conv_channels", "kernel",        "pool",
                                      "dropout_p",  "fc_sizes",      "num_classes",   "attention",
                                      "learning_rate", "batch_size", "epochs",        "seed"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) {
      throw ConfigError("cnn config: unknown key '" + key + "'");
    }
  }
  try {
    if (j.contains("input_size")) j.at("input_size").get_to(c.input_size);
    if (j.contains("conv_channels")) j.at("conv_channels").get_to(c.conv_channels);
    if (j.contains("kernel")) j.at("kernel").get_to(c.kernel);
    if (j.contains("pool")) j.at("pool").get_to(c.pool);
    if (j.contains("dropout_p")) j.at("dropout_p").get_to(c.dropout_p);
    if (j.contains("fc_sizes")) j.at("fc_sizes").get_to(c.fc_sizes);
    if (j.contains("num_classes")) j.at("num_classes").get_to(c.num_classes);
    if (j.contains("attention")) j.at("attention").get_to(c.attention);
    if (j.contains("learning_rate")) j.at("learning_rate").get_to(c.learning_rate);
    if (j.contains("batch_size")) j.at("batch_size").get_to(c.batch_size);
    if (j.contains("epochs")) j.at("epochs").get_to(c.epochs);
    if (j.contains("seed")) j.at("seed").get_to(c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("cnn config: ") + e.what());
  }
}

void to_json(nlohmann::json& j, const EpochStats& s) {
  j = nlohmann::json{{"epoch", s.epoch}, {"train_loss", s.train_loss}, {"train_acc", s.train_acc}, {"val_acc", s.val_acc}};
}

template <typename T>
Model<T>::Model(CnnConfig cfg, std::vector<std::string> label_names)
    : cfg_(std::move(cfg)), label_names_(std::move(label_names)) {
  cfg_.validate();
  if (!label_names_.empty() && label_names_.size() != static_cast<std::size_t>(cfg_.num_classes)) {
    throw ConfigError("label name count " + std::to_string(label_names_.size()) + " != num_classes " +
                      std::to_string(cfg_.num_classes));
  }
  const auto k = static_cast<std::size_t>(cfg_.kernel);
  const std::size_t pairs = cfg_.conv_channels.size() / 2;
  std::size_t in_ch = 3;
  int conv_index = 0;
  for (std::size_t pair = 0; pair < pairs; ++pair) {
    for (std::size_t half = 0; half < 2; ++half) {
      const auto out_ch = static_cast<std::size_t>(cfg_.conv_channels[pair * 2 + half]);
      layers_.push_back(std::make_unique<Conv2dLayer<T>>("conv" + std::to_string(++conv_index), in_ch, out_ch, k));
      layers_.push_back(std::make_unique<ReluLayer<T>>());
      in_ch = out_ch;
    }
    if (cfg_.attention && pair + 1 == pairs) {
      layers_.push_back(std::make_unique<AttentionLayer<T>>("attention", in_ch));
    }
    layers_.push_back(std::make_unique<MaxPoolLayer<T>>(static_cast<std::size_t>(cfg_.pool)));
    layers_.push_back(std::make_unique<DropoutLayer<T>>(cfg_.dropout_p, pair));
  }
  layers_.push_back(std::make_unique<FlattenLayer<T>>());
  std::size_t features = cfg_.flattened_size();
  int fc_index = 0;
  for (int width : cfg_.fc_sizes) {
    layers_.push_back(std::make_unique<DenseLayer<T>>("fc" + std::to_string(++fc_index), features,
                                                      static_cast<std::size_t>(width)));
    layers_.push_back(std::make_unique<ReluLayer<T>>());
    features = static_cast<std::size_t>(width);
  }
  layers_.push_back(std::make_unique<DenseLayer<T>>("fc" + std::to_string(++fc_index), features,
                                                    static_cast<std::size_t>(cfg_.num_classes)));
}

template <typename T>
BasicTensor<T> Model<T>::forward(const BasicTensor<T>& x, bool training) {
  const auto s = static_cast<std::size_t>(cfg_.input_size);
  if (x.rank() != 4 || x.dim(1) != 3 || x.dim(2) != s || x.dim(3) != s) {
    throw ShapeError("model expects N x 3 x " + std::to_string(s) + " x " + std::to_string(s) + " input, got " +
                     shape_str(x.shape()));
  }
  BasicTensor<T> h = x;
  for (auto& layer : layers_) h = layer->forward(h, training);
  return h;
}

template <typename T>
void Model<T>::backward(const BasicTensor<T>& grad_logits) {
  BasicTensor<T> g = grad_logits;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
}

template <typename T>
std::vector<Param<T>> Model<T>::params() {
  std::vector<Param<T>> out;
  for (auto& layer : layers_) {
    auto p = layer->params();
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

template <typename T>
std::vector<ConstParam<T>> Model<T>::params() const {
  std::vector<ConstParam<T>> out;
  for (const auto& layer : layers_) {
    const Layer<T>& l = *layer;
    auto p = l.params();
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

template <typename T>
std::size_t Model<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params()) n += p.value->size();
  return n;
}

template <typename T>
void Model<T>::seed_dropout(std::uint64_t seed) {
  SeededRng derive(seed);
  for (auto& layer : layers_) {
    if (auto* d = dynamic_cast<DropoutLayer<T>*>(layer.get())) d->reseed(derive.next_u64());
  }
}

template <typename T>
Model<T> build_model(const CnnConfig& cfg, std::vector<std::string> label_names, SeededRng& rng) {
  Model<T> model(cfg, std::move(label_names));
  for (auto& p : model.params()) {
    auto& w = *p.value;
    if (w.rank() == 1) {
      w.fill(T{0});
      continue;
    }
    // conv / attention: F x C x k x k, dense: d x m
    const std::size_t fan_in = w.rank() == 4 ? w.dim(1) * w.dim(2) * w.dim(3) : w.dim(0);
    const double scale = std::sqrt(2.0 / static_cast<double>(fan_in));
    const auto draws = rng_normal(rng, w.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = static_cast<T>(draws[i] * scale);
  }
  model.seed_dropout(rng.next_u64());
  return model;
}

std::size_t expected_parameter_count(const CnnConfig& cfg) {
  cfg.validate();
  const auto k2 = static_cast<std::size_t>(cfg.kernel * cfg.kernel);
  std::size_t total = 0;
  std::size_t in_ch = 3;
  for (int c : cfg.conv_channels) {
    total += static_cast<std::size_t>(c) * in_ch * k2 + static_cast<std::size_t>(c);
    in_ch = static_cast<std::size_t>(c);
  }
  if (cfg.attention) total += in_ch + 1;
  std::size_t features = cfg.flattened_size();
  for (int width : cfg.fc_sizes) {
    total += features * static_cast<std::size_t>(width) + static_cast<std::size_t>(width);
    features = static_cast<std::size_t>(width);
  }
  total += features * static_cast<std::size_t>(cfg.num_classes) + static_cast<std::size_t>(cfg.num_classes);
  return total;
}

namespace {

Tensor gather(const Tensor& images, std::span<const std::size_t> idx) {
  const std::size_t per = images.size() / images.dim(0);
  Shape shape = images.shape();
  shape[0] = idx.size();
  Tensor batch(shape);
  for (std::size_t b = 0; b < idx.size(); ++b) {
    std::copy_n(images.data().data() + idx[b] * per, per, batch.data().data() + b * per);
  }
  return batch;
}

std::vector<int> argmax_rows(const Tensor& m) {
  const std::size_t n = m.dim(0), K = m.dim(1);
  std::vector<int> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const float* row = m.data().data() + i * K;
    out[i] = static_cast<int>(std::max_element(row, row + K) - row);
  }
  return out;
}

void check_set(const ImageSet& set, const CnnConfig& cfg, const char* what) {
  if (set.size() == 0) throw DatasetError(std::string(what) + " set is empty");
  const auto s = static_cast<std::size_t>(cfg.input_size);
  if (set.images.shape() != Shape({set.size(), 3, s, s})) {
    throw ShapeError(std::string(what) + " images have shape " + shape_str(set.images.shape()) + ", expected " +
                     shape_str({set.size(), 3, s, s}));
  }
  for (int y : set.labels) {
    if (y < 0 || y >= cfg.num_classes) throw ArgumentError(std::string(what) + " label out of range");
  }
}

}  // namespace

std::vector<EpochStats> train(Model<float>& model, const ImageSet& train_set, const ImageSet& val_set,
                              std::span<const double> class_weights, SeededRng& rng, const EpochCallback& on_epoch) {
  const CnnConfig& cfg = model.config();
  check_set(train_set, cfg, "training");
  check_set(val_set, cfg, "validation");
  if (class_weights.size() != static_cast<std::size_t>(cfg.num_classes)) {
    throw ArgumentError("class weight count does not match num_classes");
  }

  model.seed_dropout(rng.next_u64());
  auto params = model.params();
  std::vector<std::vector<float>> m_state(params.size());
  std::vector<std::vector<float>> v_state(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_state[i].assign(params[i].value->size(), 0.0f);
    v_state[i].assign(params[i].value->size(), 0.0f);
  }
  const AdamHyper hp{cfg.learning_rate, 0.9, 0.999, 1e-8};

  std::vector<std::size_t> order(train_set.size());
  std::vector<EpochStats> history;
  long step = 0;
  const auto batch_size = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(order.begin(), order.end(), rng);

    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::span<const std::size_t> idx(order.data() + start, std::min(batch_size, order.size() - start));
      const Tensor batch = gather(train_set.images, idx);
      std::vector<int> labels(idx.size());
      for (std::size_t b = 0; b < idx.size(); ++b) labels[b] = train_set.labels[idx[b]];

      const Tensor logits = model.forward(batch, true);
      const auto loss = softmax_weighted_ce(logits, labels, class_weights);
      model.backward(loss.grad_logits);
      ++step;
      for (std::size_t i = 0; i < params.size(); ++i) {
        adam_step<float>(params[i].value->data(), params[i].grad->data(), m_state[i], v_state[i], step, hp);
      }

      loss_sum += loss.loss * static_cast<double>(idx.size());
      const auto pred = argmax_rows(logits);
      for (std::size_t b = 0; b < idx.size(); ++b) correct += pred[b] == labels[b] ? 1 : 0;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(order.size());
    stats.train_acc = static_cast<double>(correct) / static_cast<double>(order.size());
    stats.val_acc = accuracy(predict(model, val_set.images).classes, val_set.labels);
    history.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  return history;
}

Prediction predict(Model<float>& model, const Tensor& images) {
  const auto s = static_cast<std::size_t>(model.config().input_size);
  if (images.rank() != 4 || images.dim(1) != 3 || images.dim(2) != s || images.dim(3) != s) {
    throw ShapeError("predict expects N x 3 x " + std::to_string(s) + " x " + std::to_string(s) + " images, got " +
                     shape_str(images.shape()));
  }
  const std::size_t n = images.dim(0);
  const auto K = static_cast<std::size_t>(model.config().num_classes);
  Prediction out{{}, Tensor({n, K})};
  constexpr std::size_t kChunk = 32;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < n; start += kChunk) {
    idx.resize(std::min(kChunk, n - start));
    std::iota(idx.begin(), idx.end(), start);
    const Tensor probs = softmax(model.forward(gather(images, idx), false));
    std::copy(probs.data().begin(), probs.data().end(), out.probabilities.data().begin() + static_cast<std::ptrdiff_t>(start * K));
  }
  out.classes = argmax_rows(out.probabilities);
  return out;
}

double accuracy(std::span<const int> predicted, std::span<const int> labels) {
  if (predicted.size() != labels.size()) throw ShapeError("prediction and label counts differ");
  if (labels.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hit += predicted[i] == labels[i] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(labels.size());
}

template class Model<float>;
template class Model<double>;
template Model<float> build_model<float>(const CnnConfig&, std::vector<std::string>, SeededRng&);
template Model<double> build_model<double>(const CnnConfig&, std::vector<std::string>, SeededRng&);

}  // namespace seedling::nn
