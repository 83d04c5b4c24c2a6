#pragma once

#include <span>
#include <vector>

#include "seedling/tensor.hpp"

namespace seedling::nn {

template <typename T>
struct LossResult {
  double loss = 0.0;
  BasicTensor<T> grad_logits;  // n x K
};

// Row-wise softmax with max subtraction.
template <typename T>
BasicTensor<T> softmax(const BasicTensor<T>& logits);

// loss = sum_i w[y_i] * (-log p[i][y_i]) / sum_i w[y_i], with the exact gradient
// of that expression with respect to the logits.
template <typename T>
LossResult<T> softmax_weighted_ce(const BasicTensor<T>& logits, std::span<const int> labels,
                                  std::span<const double> class_weights);

}  // namespace seedling::nn
