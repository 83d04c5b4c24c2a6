#pragma once

#include <cstdint>
#include <vector>

#include "seedling/tensor.hpp"

// Stateless layer kernels with explicit backward passes. All 4-D tensors are
// NCHW. Each backward returns exact gradients of its forward map.
namespace seedling::nn {

template <typename T>
struct LayerGrads {
  BasicTensor<T> input;
  BasicTensor<T> weights;
  BasicTensor<T> bias;
};

// Stride 1, zero padding (k-1)/2, cross-correlation. weights: F x C x k x k,
// bias: F. Output N x F x H x W.
template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& weights, const BasicTensor<T>& bias);

template <typename T>
LayerGrads<T> conv2d_backward(const BasicTensor<T>& input, const BasicTensor<T>& weights,
                             const BasicTensor<T>& upstream);

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& input);

// Routes upstream where input > 0 and zero elsewhere (including exactly 0).
template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T>& input, const BasicTensor<T>& upstream);

template <typename T>
struct PoolResult {
  BasicTensor<T> output;
  std::vector<std::uint32_t> argmax;  // flat input index per output element
};

// Non-overlapping p x p windows; ties go to the first maximum in row-major
// window order.
template <typename T>
PoolResult<T> maxpool(const BasicTensor<T>& input, std::size_t p);

template <typename T>
BasicTensor<T> maxpool_backward(const Shape& input_shape, const std::vector<std::uint32_t>& argmax,
                                const BasicTensor<T>& upstream);

template <typename T>
struct DropoutResult {
  BasicTensor<T> output;
  // Per-element multiplier: 0 for dropped, 1/(1-p) for kept. Empty in eval mode.
  std::vector<T> mask;
};

// Inverted dropout; identity when training is false or p == 0.
template <typename T>
DropoutResult<T> dropout(const BasicTensor<T>& input, double p, SeededRng& rng, bool training);

template <typename T>
BasicTensor<T> dropout_backward(const std::vector<T>& mask, const BasicTensor<T>& upstream);

// input: n x d, weights: d x m, bias: m.
template <typename T>
BasicTensor<T> dense(const BasicTensor<T>& input, const BasicTensor<T>& weights, const BasicTensor<T>& bias);

template <typename T>
LayerGrads<T> dense_backward(const BasicTensor<T>& input, const BasicTensor<T>& weights,
                             const BasicTensor<T>& upstream);

template <typename T>
struct AttentionResult {
  BasicTensor<T> output;
  BasicTensor<T> gate;  // N x 1 x H x W
};

// g = sigmoid(1x1 conv to one channel); output = input * g broadcast over C.
// weights: 1 x C x 1 x 1, bias: 1.
template <typename T>
AttentionResult<T> attention_gate(const BasicTensor<T>& input, const BasicTensor<T>& weights,
                                  const BasicTensor<T>& bias);

template <typename T>
LayerGrads<T> attention_gate_backward(const BasicTensor<T>& input, const BasicTensor<T>& weights,
                                     const BasicTensor<T>& gate, const BasicTensor<T>& upstream);

}  // namespace seedling::nn
