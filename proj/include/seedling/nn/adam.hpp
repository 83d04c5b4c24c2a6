#pragma once

#include <span>
#include <vector>

namespace seedling::nn {

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One bias-corrected Adam update in place. t is the 1-based step count shared by
// every parameter tensor of the model.
template <typename T>
void adam_step(std::span<T> params, std::span<const T> grads, std::span<T> m, std::span<T> v, long t,
               const AdamHyper& hp);

}  // namespace seedling::nn
