#include "seedling/nn/layers.hpp"

namespace seedling::nn {

const char* to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv: return "conv";
    case LayerKind::relu: return "relu";
    case LayerKind::pool: return "pool";
    case LayerKind::dropout: return "dropout";
    case LayerKind::flatten: return "flatten";
    case LayerKind::dense: return "dense";
    case LayerKind::attention: return "attention";
  }
  return "unknown";
}

template <typename T>
Conv2dLayer<T>::Conv2dLayer(std::string name, std::size_t in_channels, std::size_t filters, std::size_t kernel)
    : weights({filters, in_channels, kernel, kernel}),
      bias({filters}),
      grad_weights({filters, in_channels, kernel, kernel}),
      grad_bias({filters}),
      name_(std::move(name)) {}

template <typename T>
BasicTensor<T> Conv2dLayer<T>::forward(const BasicTensor<T>& x, bool) {
  input_ = x;
  return conv2d(x, weights, bias);
}

template <typename T>
BasicTensor<T> Conv2dLayer<T>::backward(const BasicTensor<T>& upstream) {
  auto g = conv2d_backward(input_, weights, upstream);
  grad_weights = std::move(g.weights);
  grad_bias = std::move(g.bias);
  return std::move(g.input);
}

template <typename T>
std::vector<Param<T>> Conv2dLayer<T>::params() {
  return {{name_ + ".weight", &weights, &grad_weights}, {name_ + ".bias", &bias, &grad_bias}};
}

template <typename T>
std::vector<ConstParam<T>> Conv2dLayer<T>::params() const {
  return {{name_ + ".weight", &weights}, {name_ + ".bias", &bias}};
}

template <typename T>
BasicTensor<T> ReluLayer<T>::forward(const BasicTensor<T>& x, bool) {
  input_ = x;
  return relu(x);
}

template <typename T>
BasicTensor<T> ReluLayer<T>::backward(const BasicTensor<T>& upstream) {
  return relu_backward(input_, upstream);
}

template <typename T>
BasicTensor<T> MaxPoolLayer<T>::forward(const BasicTensor<T>& x, bool) {
  input_shape_ = x.shape();
  auto r = maxpool(x, window_);
  argmax_ = std::move(r.argmax);
  return std::move(r.output);
}

template <typename T>
BasicTensor<T> MaxPoolLayer<T>::backward(const BasicTensor<T>& upstream) {
  return maxpool_backward(input_shape_, argmax_, upstream);
}

template <typename T>
BasicTensor<T> DropoutLayer<T>::forward(const BasicTensor<T>& x, bool training) {
  auto r = dropout(x, p_, rng_, training);
  mask_ = std::move(r.mask);
  return std::move(r.output);
}

template <typename T>
BasicTensor<T> DropoutLayer<T>::backward(const BasicTensor<T>& upstream) {
  return dropout_backward(mask_, upstream);
}

template <typename T>
BasicTensor<T> FlattenLayer<T>::forward(const BasicTensor<T>& x, bool) {
  input_shape_ = x.shape();
  return x.reshaped({x.dim(0), x.size() / x.dim(0)});
}

template <typename T>
BasicTensor<T> FlattenLayer<T>::backward(const BasicTensor<T>& upstream) {
  return upstream.reshaped(input_shape_);
}

template <typename T>
DenseLayer<T>::DenseLayer(std::string name, std::size_t in_features, std::size_t out_features)
    : weights({in_features, out_features}),
      bias({out_features}),
      grad_weights({in_features, out_features}),
      grad_bias({out_features}),
      name_(std::move(name)) {}

template <typename T>
BasicTensor<T> DenseLayer<T>::forward(const BasicTensor<T>& x, bool) {
  input_ = x;
  return dense(x, weights, bias);
}

template <typename T>
BasicTensor<T> DenseLayer<T>::backward(const BasicTensor<T>& upstream) {
  auto g = dense_backward(input_, weights, upstream);
  grad_weights = std::move(g.weights);
  grad_bias = std::move(g.bias);
  return std::move(g.input);
}

template <typename T>
std::vector<Param<T>> DenseLayer<T>::params() {
  return {{name_ + ".weight", &weights, &grad_weights}, {name_ + ".bias", &bias, &grad_bias}};
}

template <typename T>
std::vector<ConstParam<T>> DenseLayer<T>::params() const {
  return {{name_ + ".weight", &weights}, {name_ + ".bias", &bias}};
}

template <typename T>
AttentionLayer<T>::AttentionLayer(std::string name, std::size_t channels)
    : weights({1, channels, 1, 1}),
      bias({1}),
      grad_weights({1, channels, 1, 1}),
      grad_bias({1}),
      name_(std::move(name)) {}

template <typename T>
BasicTensor<T> AttentionLayer<T>::forward(const BasicTensor<T>& x, bool) {
  input_ = x;
  auto r = attention_gate(x, weights, bias);
  gate_ = std::move(r.gate);
  return std::move(r.output);
}

template <typename T>
BasicTensor<T> AttentionLayer<T>::backward(const BasicTensor<T>& upstream) {
  auto g = attention_gate_backward(input_, weights, gate_, upstream);
  grad_weights = std::move(g.weights);
  grad_bias = std::move(g.bias);
  return std::move(g.input);
}

template <typename T>
std::vector<Param<T>> AttentionLayer<T>::params() {
  return {{name_ + ".weight", &weights, &grad_weights}, {name_ + ".bias", &bias, &grad_bias}};
}

template <typename T>
std::vector<ConstParam<T>> AttentionLayer<T>::params() const {
  return {{name_ + ".weight", &weights}, {name_ + ".bias", &bias}};
}

#define SEEDLING_LAYERS(T)              \
  template class Conv2dLayer<T>;        \
  template class ReluLayer<T>;          \
  template class MaxPoolLayer<T>;       \
  template class DropoutLayer<T>;       \
  template class FlattenLayer<T>;       \
  template class DenseLayer<T>;         \
  template class AttentionLayer<T>;

SEEDLING_LAYERS(float)
SEEDLING_LAYERS(double)

#undef SEEDLING_LAYERS

}  // namespace seedling::nn
