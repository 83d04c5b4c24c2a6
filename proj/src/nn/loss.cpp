#include "seedling/nn/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "seedling/error.hpp"

namespace seedling::nn {

template <typename T>
BasicTensor<T> softmax(const BasicTensor<T>& logits) {
  if (logits.rank() != 2) throw ShapeError("softmax expects n x K logits, got " + shape_str(logits.shape()));
  const std::size_t n = logits.dim(0), K = logits.dim(1);
  BasicTensor<T> p(logits.shape());
  for (std::size_t i = 0; i < n; ++i) {
    const T* row = logits.data().data() + i * K;
    const T mx = *std::max_element(row, row + K);
    double sum = 0.0;
    for (std::size_t j = 0; j < K; ++j) sum += std::exp(static_cast<double>(row[j] - mx));
    for (std::size_t j = 0; j < K; ++j) p[i * K + j] = static_cast<T>(std::exp(static_cast<double>(row[j] - mx)) / sum);
  }
  return p;
}

template <typename T>
LossResult<T> softmax_weighted_ce(const BasicTensor<T>& logits, std::span<const int> labels,
                                  std::span<const double> class_weights) {
  if (logits.rank() != 2) throw ShapeError("loss expects n x K logits, got " + shape_str(logits.shape()));
  const std::size_t n = logits.dim(0), K = logits.dim(1);
  if (labels.size() != n) {
    throw ShapeError("label count " + std::to_string(labels.size()) + " != batch size " + std::to_string(n));
  }
  if (class_weights.size() != K) {
    throw ShapeError("class weight count " + std::to_string(class_weights.size()) + " != classes " + std::to_string(K));
  }
  for (double w : class_weights) {
    if (!(w > 0.0)) throw ArgumentError("class weights must be positive");
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= K) {
      throw ArgumentError("label " + std::to_string(y) + " out of range for " + std::to_string(K) + " classes");
    }
  }

  LossResult<T> r{0.0, BasicTensor<T>(logits.shape())};
  double weight_sum = 0.0;
  for (int y : labels) weight_sum += class_weights[static_cast<std::size_t>(y)];

  std::vector<double> p(K);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const T* row = logits.data().data() + i * K;
    const auto y = static_cast<std::size_t>(labels[i]);
    const double mx = static_cast<double>(*std::max_element(row, row + K));
    double sum = 0.0;
    for (std::size_t j = 0; j < K; ++j) {
      p[j] = std::exp(static_cast<double>(row[j]) - mx);
      sum += p[j];
    }
    const double log_sum = std::log(sum);
    const double w = class_weights[y];
    // -log p_y = log(sum) - (z_y - max)
    total += w * (log_sum - (static_cast<double>(row[y]) - mx));
    const double scale = w / weight_sum;
    for (std::size_t j = 0; j < K; ++j) {
      const double pj = p[j] / sum;
      r.grad_logits[i * K + j] = static_cast<T>(scale * (pj - (j == y ? 1.0 : 0.0)));
    }
  }
  r.loss = total / weight_sum;
  return r;
}

template BasicTensor<float> softmax(const BasicTensor<float>&);
template BasicTensor<double> softmax(const BasicTensor<double>&);
template LossResult<float> softmax_weighted_ce(const BasicTensor<float>&, std::span<const int>, std::span<const double>);
template LossResult<double> softmax_weighted_ce(const BasicTensor<double>&, std::span<const int>,
                                                std::span<const double>);

}  // namespace seedling::nn
