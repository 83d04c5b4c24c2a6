#include "seedling/nn/ops.hpp"

#include <cmath>
#include <string>

#include "seedling/error.hpp"

namespace seedling::nn {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ShapeError(msg);
}

// col[(c*k + ky)*k + kx][y*W + x] = in[c][y + ky - r][x + kx - r], zero outside.
template <typename T>
void im2col(const T* in, std::size_t C, std::size_t H, std::size_t W, std::size_t k, T* col) {
  const auto r = static_cast<std::ptrdiff_t>(k / 2);
  const auto h = static_cast<std::ptrdiff_t>(H);
  const auto w = static_cast<std::ptrdiff_t>(W);
  for (std::size_t c = 0; c < C; ++c) {
    const T* plane = in + c * H * W;
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        T* row = col + ((c * k + ky) * k + kx) * H * W;
        const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - r;
        const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - r;
        for (std::ptrdiff_t y = 0; y < h; ++y) {
          T* dst = row + y * w;
          const std::ptrdiff_t sy = y + dy;
          if (sy < 0 || sy >= h) {
            std::fill(dst, dst + w, T{0});
            continue;
          }
          const T* src = plane + sy * w;
          for (std::ptrdiff_t x = 0; x < w; ++x) {
            const std::ptrdiff_t sx = x + dx;
            dst[x] = (sx >= 0 && sx < w) ? src[sx] : T{0};
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatters column gradients back onto the (zeroed) input.
template <typename T>
void col2im(const T* col, std::size_t C, std::size_t H, std::size_t W, std::size_t k, T* out) {
  const auto r = static_cast<std::ptrdiff_t>(k / 2);
  const auto h = static_cast<std::ptrdiff_t>(H);
  const auto w = static_cast<std::ptrdiff_t>(W);
  for (std::size_t c = 0; c < C; ++c) {
    T* plane = out + c * H * W;
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        const T* row = col + ((c * k + ky) * k + kx) * H * W;
        const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - r;
        const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - r;
        for (std::ptrdiff_t y = 0; y < h; ++y) {
          const std::ptrdiff_t sy = y + dy;
          if (sy < 0 || sy >= h) continue;
          const T* src = row + y * w;
          T* dst = plane + sy * w;
          const std::ptrdiff_t x0 = std::max<std::ptrdiff_t>(0, -dx);
          const std::ptrdiff_t x1 = std::min<std::ptrdiff_t>(w, w - dx);
          for (std::ptrdiff_t x = x0; x < x1; ++x) dst[x + dx] += src[x];
        }
      }
    }
  }
}

template <typename T>
void check_conv(const BasicTensor<T>& input, const BasicTensor<T>& weights) {
  require(input.rank() == 4, "conv2d input must be N x C x H x W, got " + shape_str(input.shape()));
  require(weights.rank() == 4, "conv2d weights must be F x C x k x k, got " + shape_str(weights.shape()));
  require(weights.dim(1) == input.dim(1), "conv2d channel mismatch: input " + shape_str(input.shape()) +
                                              ", weights " + shape_str(weights.shape()));
  require(weights.dim(2) == weights.dim(3), "conv2d kernel must be square, got " + shape_str(weights.shape()));
  if (weights.dim(2) % 2 == 0) {
    throw ArgumentError("conv2d kernel size must be odd, got " + std::to_string(weights.dim(2)));
  }
}

}  // namespace

template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& weights, const BasicTensor<T>& bias) {
  check_conv(input, weights);
  const std::size_t N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
  const std::size_t F = weights.dim(0), k = weights.dim(2);
  require(bias.size() == F, "conv2d bias length " + std::to_string(bias.size()) + " != filters " + std::to_string(F));

  const std::size_t hw = H * W;
  const std::size_t ckk = C * k * k;
  BasicTensor<T> out({N, F, H, W});
  std::vector<T> col(ckk * hw);
  for (std::size_t n = 0; n < N; ++n) {
    T* dst = out.data().data() + n * F * hw;
    const T* src = input.data().data() + n * C * hw;
    const T* b_ptr = col.data();
    if (k == 1) {
      b_ptr = src;
    } else {
      im2col(src, C, H, W, k, col.data());
    }
    gemm(Trans::no, Trans::no, F, hw, ckk, weights.data().data(), b_ptr, dst, false);
    for (std::size_t f = 0; f < F; ++f) {
      const T b = bias[f];
      for (std::size_t i = 0; i < hw; ++i) dst[f * hw + i] += b;
    }
  }
  return out;
}

template <typename T>
LayerGrads<T> conv2d_backward(const BasicTensor<T>& input, const BasicTensor<T>& weights,
                              const BasicTensor<T>& upstream) {
  check_conv(input, weights);
  const std::size_t N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
  const std::size_t F = weights.dim(0), k = weights.dim(2);
  require(upstream.shape() == Shape({N, F, H, W}),
          "conv2d upstream shape " + shape_str(upstream.shape()) + " does not match output");

  const std::size_t hw = H * W;
  const std::size_t ckk = C * k * k;
  LayerGrads<T> g{BasicTensor<T>(input.shape()), BasicTensor<T>(weights.shape()), BasicTensor<T>({F})};
  std::vector<T> col(ckk * hw);
  std::vector<T> grad_col(ckk * hw);
  for (std::size_t n = 0; n < N; ++n) {
    const T* up = upstream.data().data() + n * F * hw;
    const T* src = input.data().data() + n * C * hw;
    T* gin = g.input.data().data() + n * C * hw;

    for (std::size_t f = 0; f < F; ++f) {
      T acc{0};
      for (std::size_t i = 0; i < hw; ++i) acc += up[f * hw + i];
      g.bias[f] += acc;
    }

    const T* cols = src;
    if (k != 1) {
      im2col(src, C, H, W, k, col.data());
      cols = col.data();
    }
    // dW (F x CKK) += up (F x HW) * col^T
    gemm(Trans::no, Trans::yes, F, ckk, hw, up, cols, g.weights.data().data(), true);
    // dcol (CKK x HW) = W^T * up
    if (k == 1) {
      gemm(Trans::yes, Trans::no, ckk, hw, F, weights.data().data(), up, gin, false);
    } else {
      gemm(Trans::yes, Trans::no, ckk, hw, F, weights.data().data(), up, grad_col.data(), false);
      col2im(grad_col.data(), C, H, W, k, gin);
    }
  }
  return g;
}

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& input) {
  BasicTensor<T> out = input;
  for (auto& v : out.data()) v = v > T{0} ? v : T{0};
  return out;
}

template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T>& input, const BasicTensor<T>& upstream) {
  require(input.shape() == upstream.shape(), "relu upstream shape mismatch");
  BasicTensor<T> g(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) g[i] = input[i] > T{0} ? upstream[i] : T{0};
  return g;
}

template <typename T>
PoolResult<T> maxpool(const BasicTensor<T>& input, std::size_t p) {
  require(input.rank() == 4, "maxpool input must be N x C x H x W, got " + shape_str(input.shape()));
  if (p == 0) throw ArgumentError("maxpool window must be positive");
  const std::size_t N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
  require(H % p == 0 && W % p == 0,
          "maxpool extents " + shape_str(input.shape()) + " not divisible by " + std::to_string(p));
  const std::size_t oh = H / p, ow = W / p;

  PoolResult<T> r{BasicTensor<T>({N, C, oh, ow}), std::vector<std::uint32_t>(N * C * oh * ow)};
  std::size_t o = 0;
  for (std::size_t nc = 0; nc < N * C; ++nc) {
    const std::size_t base = nc * H * W;
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x, ++o) {
        std::size_t best = base + (y * p) * W + x * p;
        for (std::size_t dy = 0; dy < p; ++dy) {
          for (std::size_t dx = 0; dx < p; ++dx) {
            const std::size_t idx = base + (y * p + dy) * W + x * p + dx;
            if (input[idx] > input[best]) best = idx;
          }
        }
        r.output[o] = input[best];
        r.argmax[o] = static_cast<std::uint32_t>(best);
      }
    }
  }
  return r;
}

template <typename T>
BasicTensor<T> maxpool_backward(const Shape& input_shape, const std::vector<std::uint32_t>& argmax,
                                const BasicTensor<T>& upstream) {
  require(upstream.size() == argmax.size(), "maxpool upstream size does not match routing table");
  BasicTensor<T> g(input_shape);
  for (std::size_t i = 0; i < argmax.size(); ++i) g[argmax[i]] += upstream[i];
  return g;
}

template <typename T>
DropoutResult<T> dropout(const BasicTensor<T>& input, double p, SeededRng& rng, bool training) {
  if (!(p >= 0.0 && p < 1.0)) throw ArgumentError("dropout probability must lie in [0, 1), got " + std::to_string(p));
  DropoutResult<T> r{input, {}};
  if (!training || p == 0.0) return r;
  const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
  r.mask.resize(input.size());
  for (std::size_t i = 0; i < input.size(); ++i) {
    r.mask[i] = rng.uniform() < p ? T{0} : keep_scale;
    r.output[i] = input[i] * r.mask[i];
  }
  return r;
}

template <typename T>
BasicTensor<T> dropout_backward(const std::vector<T>& mask, const BasicTensor<T>& upstream) {
  if (mask.empty()) return upstream;
  require(mask.size() == upstream.size(), "dropout upstream size does not match mask");
  BasicTensor<T> g = upstream;
  for (std::size_t i = 0; i < mask.size(); ++i) g[i] *= mask[i];
  return g;
}

template <typename T>
BasicTensor<T> dense(const BasicTensor<T>& input, const BasicTensor<T>& weights, const BasicTensor<T>& bias) {
  require(input.rank() == 2 && weights.rank() == 2 && input.dim(1) == weights.dim(0),
          "dense shape mismatch: input " + shape_str(input.shape()) + ", weights " + shape_str(weights.shape()));
  require(bias.size() == weights.dim(1), "dense bias length mismatch");
  BasicTensor<T> out = matmul(input, weights);
  const std::size_t m = weights.dim(1);
  for (std::size_t i = 0; i < input.dim(0); ++i)
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] += bias[j];
  return out;
}

template <typename T>
LayerGrads<T> dense_backward(const BasicTensor<T>& input, const BasicTensor<T>& weights,
                             const BasicTensor<T>& upstream) {
  require(input.rank() == 2 && weights.rank() == 2 && input.dim(1) == weights.dim(0),
          "dense shape mismatch: input " + shape_str(input.shape()) + ", weights " + shape_str(weights.shape()));
  const std::size_t n = input.dim(0), d = input.dim(1), m = weights.dim(1);
  require(upstream.shape() == Shape({n, m}), "dense upstream shape mismatch");

  LayerGrads<T> g{BasicTensor<T>({n, d}), BasicTensor<T>({d, m}), BasicTensor<T>({m})};
  gemm(Trans::no, Trans::yes, n, d, m, upstream.data().data(), weights.data().data(), g.input.data().data(), false);
  gemm(Trans::yes, Trans::no, d, m, n, input.data().data(), upstream.data().data(), g.weights.data().data(), false);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) g.bias[j] += upstream[i * m + j];
  return g;
}

template <typename T>
AttentionResult<T> attention_gate(const BasicTensor<T>& input, const BasicTensor<T>& weights,
                                  const BasicTensor<T>& bias) {
  require(input.rank() == 4, "attention input must be N x C x H x W, got " + shape_str(input.shape()));
  const std::size_t N = input.dim(0), C = input.dim(1), hw = input.dim(2) * input.dim(3);
  require(weights.shape() == Shape({1, C, 1, 1}), "attention weights must be 1 x C x 1 x 1, got " +
                                                      shape_str(weights.shape()));
  require(bias.size() == 1, "attention bias must hold one value");

  AttentionResult<T> r{BasicTensor<T>(input.shape()), BasicTensor<T>({N, 1, input.dim(2), input.dim(3)})};
  std::vector<T> z(hw);
  for (std::size_t n = 0; n < N; ++n) {
    const T* x = input.data().data() + n * C * hw;
    std::fill(z.begin(), z.end(), bias[0]);
    for (std::size_t c = 0; c < C; ++c) {
      const T w = weights[c];
      for (std::size_t i = 0; i < hw; ++i) z[i] += w * x[c * hw + i];
    }
    T* g = r.gate.data().data() + n * hw;
    for (std::size_t i = 0; i < hw; ++i) g[i] = T{1} / (T{1} + std::exp(-z[i]));
    T* out = r.output.data().data() + n * C * hw;
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t i = 0; i < hw; ++i) out[c * hw + i] = x[c * hw + i] * g[i];
  }
  return r;
}

template <typename T>
LayerGrads<T> attention_gate_backward(const BasicTensor<T>& input, const BasicTensor<T>& weights,
                                      const BasicTensor<T>& gate, const BasicTensor<T>& upstream) {
  require(input.rank() == 4 && upstream.shape() == input.shape(), "attention upstream shape mismatch");
  const std::size_t N = input.dim(0), C = input.dim(1), hw = input.dim(2) * input.dim(3);
  require(weights.shape() == Shape({1, C, 1, 1}), "attention weights shape mismatch");
  require(gate.size() == N * hw, "attention gate size mismatch");

  LayerGrads<T> g{BasicTensor<T>(input.shape()), BasicTensor<T>(weights.shape()), BasicTensor<T>({1})};
  std::vector<T> dz(hw);
  for (std::size_t n = 0; n < N; ++n) {
    const T* x = input.data().data() + n * C * hw;
    const T* up = upstream.data().data() + n * C * hw;
    const T* gt = gate.data().data() + n * hw;
    T* gin = g.input.data().data() + n * C * hw;

    // dL/dg = sum_c up * x, then through the sigmoid.
    std::fill(dz.begin(), dz.end(), T{0});
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t i = 0; i < hw; ++i) dz[i] += up[c * hw + i] * x[c * hw + i];
    for (std::size_t i = 0; i < hw; ++i) dz[i] *= gt[i] * (T{1} - gt[i]);

    for (std::size_t c = 0; c < C; ++c) {
      const T w = weights[c];
      T gw{0};
      for (std::size_t i = 0; i < hw; ++i) {
        gin[c * hw + i] = up[c * hw + i] * gt[i] + dz[i] * w;
        gw += dz[i] * x[c * hw + i];
      }
      g.weights[c] += gw;
    }
    T gb{0};
    for (std::size_t i = 0; i < hw; ++i) gb += dz[i];
    g.bias[0] += gb;
  }
  return g;
}

#define SEEDLING_NN_OPS(T)                                                                                     \
  template BasicTensor<T> conv2d(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&);        \
  template LayerGrads<T> conv2d_backward(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&); \
  template BasicTensor<T> relu(const BasicTensor<T>&);                                                         \
  template BasicTensor<T> relu_backward(const BasicTensor<T>&, const BasicTensor<T>&);                         \
  template PoolResult<T> maxpool(const BasicTensor<T>&, std::size_t);                                          \
  template BasicTensor<T> maxpool_backward(const Shape&, const std::vector<std::uint32_t>&,                    \
                                           const BasicTensor<T>&);                                             \
  template DropoutResult<T> dropout(const BasicTensor<T>&, double, SeededRng&, bool);                          \
  template BasicTensor<T> dropout_backward(const std::vector<T>&, const BasicTensor<T>&);                      \
  template BasicTensor<T> dense(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&);          \
  template LayerGrads<T> dense_backward(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&);  \
  template AttentionResult<T> attention_gate(const BasicTensor<T>&, const BasicTensor<T>&,                     \
                                             const BasicTensor<T>&);                                           \
  template LayerGrads<T> attention_gate_backward(const BasicTensor<T>&, const BasicTensor<T>&,                 \
                                                 const BasicTensor<T>&, const BasicTensor<T>&);

SEEDLING_NN_OPS(float)
SEEDLING_NN_OPS(double)

#undef SEEDLING_NN_OPS

}  // namespace seedling::nn
