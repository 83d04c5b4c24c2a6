#include "seedling/nn/adam.hpp"

#include <cmath>
#include <string>

#include "seedling/error.hpp"

namespace seedling::nn {

template <typename T>
void adam_step(std::span<T> params, std::span<const T> grads, std::span<T> m, std::span<T> v, long t,
               const AdamHyper& hp) {
  if (!(hp.lr > 0.0)) throw ArgumentError("Adam learning rate must be positive, got " + std::to_string(hp.lr));
  if (t < 1) throw ArgumentError("Adam step count must be >= 1");
  if (grads.size() != params.size() || m.size() != params.size() || v.size() != params.size()) {
    throw ShapeError("Adam parameter, gradient and state sizes differ");
  }
  const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    const double mi = hp.beta1 * m[i] + (1.0 - hp.beta1) * g;
    const double vi = hp.beta2 * v[i] + (1.0 - hp.beta2) * g * g;
    m[i] = static_cast<T>(mi);
    v[i] = static_cast<T>(vi);
    params[i] = static_cast<T>(params[i] - hp.lr * (mi / bc1) / (std::sqrt(vi / bc2) + hp.eps));
  }
}

template void adam_step<float>(std::span<float>, std::span<const float>, std::span<float>, std::span<float>, long,
                               const AdamHyper&);
template void adam_step<double>(std::span<double>, std::span<const double>, std::span<double>, std::span<double>,
                                long, const AdamHyper&);

}  // namespace seedling::nn
