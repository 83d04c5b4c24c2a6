#pragma once

#include <memory>
#include <string>
#include <vector>

#include "seedling/nn/ops.hpp"
#include "seedling/tensor.hpp"

namespace seedling::nn {

enum class LayerKind { conv, relu, pool, dropout, flatten, dense, attention };

const char* to_string(LayerKind kind);

template <typename T>
struct Param {
  std::string name;
  BasicTensor<T>* value = nullptr;
  BasicTensor<T>* grad = nullptr;
};

template <typename T>
struct ConstParam {
  std::string name;
  const BasicTensor<T>* value = nullptr;
};

// A layer caches whatever its backward pass needs from the most recent forward
// call. backward() overwrites the parameter gradients.
template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;

  virtual LayerKind kind() const = 0;
  virtual BasicTensor<T> forward(const BasicTensor<T>& x, bool training) = 0;
  virtual BasicTensor<T> backward(const BasicTensor<T>& upstream) = 0;
  virtual std::vector<Param<T>> params() { return {}; }
  virtual std::vector<ConstParam<T>> params() const { return {}; }
};

template <typename T>
class Conv2dLayer final : public Layer<T> {
 public:
  Conv2dLayer(std::string name, std::size_t in_channels, std::size_t filters, std::size_t kernel);

  LayerKind kind() const override { return LayerKind::conv; }
  BasicTensor<T> forward(const BasicTensor<T>& x, bool training) override;
  BasicTensor<T> backward(const BasicTensor<T>& upstream) override;
  std::vector<Param<T>> params() override;
  std::vector<ConstParam<T>> params() const override;

  BasicTensor<T> weights, bias, grad_weights, grad_bias;

 private:
  std::string name_;
  BasicTensor<T> input_;
};

template <typename T>
class ReluLayer final : public Layer<T> {
 public:
  LayerKind kind() const override { return LayerKind::relu; }
  BasicTensor<T> forward(const BasicTensor<T>& x, bool training) override;
  BasicTensor<T> backward(const BasicTensor<T>& upstream) override;

 private:
  BasicTensor<T> input_;
};

template <typename T>
class MaxPoolLayer final : public Layer<T> {
 public:
  explicit MaxPoolLayer(std::size_t window) : window_(window) {}

  LayerKind kind() const override { return LayerKind::pool; }
  BasicTensor<T> forward(const BasicTensor<T>& x, bool training) override;
  BasicTensor<T> backward(const BasicTensor<T>& upstream) override;

 private:
  std::size_t window_;
  Shape input_shape_;
  std::vector<std::uint32_t> argmax_;
};

template <typename T>
class DropoutLayer final : public Layer<T> {
 public:
  DropoutLayer(double p, std::uint64_t seed) : p_(p), rng_(seed) {}

  LayerKind kind() const override { return LayerKind::dropout; }
  BasicTensor<T> forward(const BasicTensor<T>& x, bool training) override;
  BasicTensor<T> backward(const BasicTensor<T>& upstream) override;

  void reseed(std::uint64_t seed) { rng_ = SeededRng(seed); }
  double probability() const { return p_; }

 private:
  double p_;
  SeededRng rng_;
  std::vector<T> mask_;
};

template <typename T>
class FlattenLayer final : public Layer<T> {
 public:
  LayerKind kind() const override { return LayerKind::flatten; }
  BasicTensor<T> forward(const BasicTensor<T>& x, bool training) override;
  BasicTensor<T> backward(const BasicTensor<T>& upstream) override;

 private:
  Shape input_shape_;
};

template <typename T>
class DenseLayer final : public Layer<T> {
 public:
  DenseLayer(std::string name, std::size_t in_features, std::size_t out_features);

  LayerKind kind() const override { return LayerKind::dense; }
  BasicTensor<T> forward(const BasicTensor<T>& x, bool training) override;
  BasicTensor<T> backward(const BasicTensor<T>& upstream) override;
  std::vector<Param<T>> params() override;
  std::vector<ConstParam<T>> params() const override;

  BasicTensor<T> weights, bias, grad_weights, grad_bias;

 private:
  std::string name_;
  BasicTensor<T> input_;
};

template <typename T>
class AttentionLayer final : public Layer<T> {
 public:
  AttentionLayer(std::string name, std::size_t channels);

  LayerKind kind() const override { return LayerKind::attention; }
  BasicTensor<T> forward(const BasicTensor<T>& x, bool training) override;
  BasicTensor<T> backward(const BasicTensor<T>& upstream) override;
  std::vector<Param<T>> params() override;
  std::vector<ConstParam<T>> params() const override;

  BasicTensor<T> weights, bias, grad_weights, grad_bias;

 private:
  std::string name_;
  BasicTensor<T> input_;
  BasicTensor<T> gate_;
};

}  // namespace seedling::nn
