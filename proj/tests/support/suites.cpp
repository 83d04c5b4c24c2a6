#include "suites.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "oracles.hpp"
#include "seedling/baselines.hpp"
#include "seedling/imaging.hpp"
#include "seedling/metrics.hpp"
#include "seedling/nn/loss.hpp"
#include "seedling/nn/ops.hpp"

namespace suites {

using seedling::SeededRng;
using seedling::Shape;
using seedling::Tensor;
using seedling::Tensor64;
namespace nn = seedling::nn;

namespace {

constexpr double kTolerance = 1e-4;
constexpr double kStep = 1e-5;

std::size_t pick(SeededRng& rng, std::size_t lo, std::size_t hi) { return lo + rng.bounded(hi - lo + 1); }

Tensor64 random_tensor(const Shape& shape, SeededRng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor64 t(shape);
  for (auto& v : t.data()) v = lo + (hi - lo) * rng.uniform();
  return t;
}

double weighted_sum(const Tensor64& y, const Tensor64& r) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * r[i];
  return s;
}

std::vector<double> numeric_grad(Tensor64& x, const std::function<double()>& f) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x[i];
    x[i] = v + kStep;
    const double fp = f();
    x[i] = v - kStep;
    const double fm = f();
    x[i] = v;
    g[i] = (fp - fm) / (2.0 * kStep);
  }
  return g;
}

double rel_error(const Tensor64& analytic, const std::vector<double>& numeric) {
  double diff = 0.0, na = 0.0, nn_ = 0.0;
  for (std::size_t i = 0; i < numeric.size(); ++i) {
    diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
    na += analytic[i] * analytic[i];
    nn_ += numeric[i] * numeric[i];
  }
  return std::sqrt(diff) / std::max(std::sqrt(na) + std::sqrt(nn_), 1e-12);
}

void record(CheckResult& r, double err, double limit) {
  ++r.cases;
  r.worst = std::max(r.worst, err);
  if (!(err <= limit)) ++r.failures;
}

CheckResult check_conv(int cases, SeededRng& rng) {
  CheckResult r{"conv2d"};
  for (int i = 0; i < cases; ++i) {
    const std::size_t n = pick(rng, 1, 2), c = pick(rng, 1, 3), f = pick(rng, 1, 3), h = pick(rng, 3, 6),
                      w = pick(rng, 3, 6), k = 2 * pick(rng, 0, 2) + 1;
    Tensor64 x = random_tensor({n, c, h, w}, rng), wt = random_tensor({f, c, k, k}, rng), b = random_tensor({f}, rng);
    const Tensor64 up = random_tensor({n, f, h, w}, rng);
    const auto g = nn::conv2d_backward(x, wt, up);
    auto loss = [&] { return weighted_sum(nn::conv2d(x, wt, b), up); };
    const double err = std::max({rel_error(g.input, numeric_grad(x, loss)), rel_error(g.weights, numeric_grad(wt, loss)),
                                 rel_error(g.bias, numeric_grad(b, loss))});
    record(r, err, kTolerance);
  }
  return r;
}

CheckResult check_relu(int cases, SeededRng& rng) {
  CheckResult r{"relu"};
  for (int i = 0; i < cases; ++i) {
    const Shape shape{pick(rng, 1, 3), pick(rng, 1, 3), pick(rng, 1, 5), pick(rng, 1, 5)};
    Tensor64 x(shape);
    // Inputs stay at least 0.05 away from the kink at zero.
    for (auto& v : x.data()) v = (rng.bounded(2) ? 1.0 : -1.0) * (0.05 + rng.uniform());
    const Tensor64 up = random_tensor(shape, rng);
    auto loss = [&] { return weighted_sum(nn::relu(x), up); };
    record(r, rel_error(nn::relu_backward(x, up), numeric_grad(x, loss)), kTolerance);
  }
  return r;
}

CheckResult check_pool(int cases, SeededRng& rng) {
  CheckResult r{"maxpool"};
  for (int i = 0; i < cases; ++i) {
    const std::size_t p = pick(rng, 2, 3);
    const Shape shape{pick(rng, 1, 2), pick(rng, 1, 3), p * pick(rng, 1, 3), p * pick(rng, 1, 3)};
    Tensor64 x(shape);
    // Distinct values spaced far beyond the finite-difference step.
    std::vector<std::size_t> perm(x.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    seedling::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = 0.01 * static_cast<double>(perm[j]) - 0.3;
    const Tensor64 up = random_tensor(nn::maxpool(x, p).output.shape(), rng);
    const auto fwd = nn::maxpool(x, p);
    auto loss = [&] { return weighted_sum(nn::maxpool(x, p).output, up); };
    record(r, rel_error(nn::maxpool_backward(shape, fwd.argmax, up), numeric_grad(x, loss)), kTolerance);
  }
  return r;
}

CheckResult check_dropout(int cases, SeededRng& rng) {
  CheckResult r{"dropout"};
  for (int i = 0; i < cases; ++i) {
    const Shape shape{pick(rng, 1, 3), pick(rng, 1, 3), pick(rng, 1, 5), pick(rng, 1, 5)};
    const double p = 0.1 + 0.5 * rng.uniform();
    const std::uint64_t seed = rng.next_u64();
    Tensor64 x = random_tensor(shape, rng);
    const Tensor64 up = random_tensor(shape, rng);
    auto run = [&] {
      SeededRng mask_rng(seed);
      return nn::dropout(x, p, mask_rng, true);
    };
    const auto fwd = run();
    auto loss = [&] { return weighted_sum(run().output, up); };
    record(r, rel_error(nn::dropout_backward(fwd.mask, up), numeric_grad(x, loss)), kTolerance);
  }
  return r;
}

CheckResult check_dense(int cases, SeededRng& rng) {
  CheckResult r{"dense"};
  for (int i = 0; i < cases; ++i) {
    const std::size_t n = pick(rng, 1, 4), d = pick(rng, 1, 6), m = pick(rng, 1, 5);
    Tensor64 x = random_tensor({n, d}, rng), wt = random_tensor({d, m}, rng), b = random_tensor({m}, rng);
    const Tensor64 up = random_tensor({n, m}, rng);
    const auto g = nn::dense_backward(x, wt, up);
    auto loss = [&] { return weighted_sum(nn::dense(x, wt, b), up); };
    const double err = std::max({rel_error(g.input, numeric_grad(x, loss)), rel_error(g.weights, numeric_grad(wt, loss)),
                                 rel_error(g.bias, numeric_grad(b, loss))});
    record(r, err, kTolerance);
  }
  return r;
}

CheckResult check_attention(int cases, SeededRng& rng) {
  CheckResult r{"attention_gate"};
  for (int i = 0; i < cases; ++i) {
    const std::size_t n = pick(rng, 1, 2), c = pick(rng, 1, 4), h = pick(rng, 2, 5), w = pick(rng, 2, 5);
    Tensor64 x = random_tensor({n, c, h, w}, rng), wt = random_tensor({1, c, 1, 1}, rng), b = random_tensor({1}, rng);
    const Tensor64 up = random_tensor({n, c, h, w}, rng);
    const auto fwd = nn::attention_gate(x, wt, b);
    const auto g = nn::attention_gate_backward(x, wt, fwd.gate, up);
    auto loss = [&] { return weighted_sum(nn::attention_gate(x, wt, b).output, up); };
    const double err = std::max({rel_error(g.input, numeric_grad(x, loss)), rel_error(g.weights, numeric_grad(wt, loss)),
                                 rel_error(g.bias, numeric_grad(b, loss))});
    record(r, err, kTolerance);
  }
  return r;
}

CheckResult check_softmax_ce(int cases, SeededRng& rng) {
  CheckResult r{"softmax_weighted_ce"};
  for (int i = 0; i < cases; ++i) {
    const std::size_t n = pick(rng, 1, 5), k = pick(rng, 2, 6);
    Tensor64 logits = random_tensor({n, k}, rng, -3.0, 3.0);
    std::vector<int> labels(n);
    for (auto& y : labels) y = static_cast<int>(rng.bounded(k));
    std::vector<double> weights(k);
    for (auto& w : weights) w = 0.2 + 2.8 * rng.uniform();
    const auto res = nn::softmax_weighted_ce(logits, labels, weights);
    auto loss = [&] { return nn::softmax_weighted_ce(logits, labels, weights).loss; };
    record(r, rel_error(res.grad_logits, numeric_grad(logits, loss)), kTolerance);
  }
  return r;
}

seedling::RasterImage random_image(int w, int h, SeededRng& rng) {
  seedling::RasterImage img(w, h, 3);
  for (auto& v : img.data()) v = static_cast<std::uint8_t>(rng.bounded(256));
  return img;
}

}  // namespace

std::vector<CheckResult> gradient_suite(int cases_per_layer, std::uint64_t seed) {
  SeededRng rng(seed);
  return {check_conv(cases_per_layer, rng),    check_relu(cases_per_layer, rng),
          check_pool(cases_per_layer, rng),    check_dropout(cases_per_layer, rng),
          check_dense(cases_per_layer, rng),   check_attention(cases_per_layer, rng),
          check_softmax_ce(cases_per_layer, rng)};
}

std::vector<CheckResult> oracle_suite(int cases, std::uint64_t seed) {
  SeededRng rng(seed);
  std::vector<CheckResult> out;

  CheckResult conv{"conv2d vs direct loops"};
  for (int i = 0; i < cases; ++i) {
    const std::size_t n = pick(rng, 1, 2), c = pick(rng, 1, 4), f = pick(rng, 1, 4), h = pick(rng, 3, 8),
                      w = pick(rng, 3, 8), k = 2 * pick(rng, 0, 2) + 1;
    const Tensor64 x = random_tensor({n, c, h, w}, rng), wt = random_tensor({f, c, k, k}, rng),
                   b = random_tensor({f}, rng);
    const Tensor got = nn::conv2d(seedling::tensor_cast<float>(x), seedling::tensor_cast<float>(wt),
                                  seedling::tensor_cast<float>(b));
    // The oracle sees the same float-rounded inputs.
    const Tensor64 want = oracle::conv2d_direct(seedling::tensor_cast<double>(seedling::tensor_cast<float>(x)),
                                                seedling::tensor_cast<double>(seedling::tensor_cast<float>(wt)),
                                                seedling::tensor_cast<double>(seedling::tensor_cast<float>(b)));
    double worst = 0.0;
    for (std::size_t j = 0; j < want.size(); ++j) worst = std::max(worst, std::abs(got[j] - want[j]));
    record(conv, worst, 1e-5);
  }
  out.push_back(conv);

  CheckResult blur{"gaussian_blur vs dense 2-D"};
  for (int i = 0; i < cases; ++i) {
    const auto img = random_image(9, 9, rng);
    const int size = static_cast<int>(2 * pick(rng, 0, 3) + 1);
    const double sigma = 0.5 + 2.5 * rng.uniform();
    const auto got = seedling::gaussian_blur(img, size, sigma);
    const auto want = oracle::blur_dense(img, size, sigma);
    double worst = 0.0;
    for (std::size_t j = 0; j < want.data().size(); ++j) {
      worst = std::max(worst, std::abs(double(got.data()[j]) - double(want.data()[j])));
    }
    record(blur, worst, 1.0);
  }
  out.push_back(blur);

  CheckResult erode{"erode vs min filter"};
  for (int i = 0; i < cases; ++i) {
    seedling::BinaryMask m(16, 16);
    const double density = 0.6 + 0.35 * rng.uniform();
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x) m.set(x, y, rng.uniform() < density);
    const int size = i % 4 == 3 ? 5 : 3;
    const auto got = seedling::erode(m, size);
    const auto want = oracle::erode_minfilter(m, size);
    int diff = 0;
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x) diff += got.at(x, y) != want.at(x, y);
    record(erode, diff, 0.0);
  }
  out.push_back(erode);

  CheckResult knn{"knn vs exhaustive sort"};
  for (int i = 0; i < cases; ++i) {
    const std::size_t n = 50, d = pick(rng, 2, 5), q = 20, k_classes = 3;
    const bool integral = i % 2 == 0;  // integer grids produce exact distance ties
    Tensor train({n, d}), queries({q, d});
    for (auto* t : {&train, &queries}) {
      for (auto& v : t->data()) v = integral ? static_cast<float>(rng.bounded(4)) : static_cast<float>(rng.uniform());
    }
    std::vector<int> labels(n);
    for (auto& y : labels) y = static_cast<int>(rng.bounded(k_classes));
    const auto ks = seedling::knn_grid(n);
    const auto got = seedling::knn_predict_multi(seedling::knn_fit(train, labels, k_classes), queries, ks);
    int diff = 0;
    for (std::size_t j = 0; j < ks.size(); ++j) {
      const auto want = oracle::knn_exhaustive(train, labels, k_classes, queries, ks[j]);
      for (std::size_t r = 0; r < q; ++r) diff += got[j][r] != want[r];
    }
    record(knn, diff, 0.0);
  }
  out.push_back(knn);

  CheckResult cm{"confusion vs pairwise count"};
  for (int i = 0; i < cases; ++i) {
    const std::size_t k = pick(rng, 1, 8), n = pick(rng, 0, 200);
    std::vector<int> preds(n), labels(n);
    for (std::size_t j = 0; j < n; ++j) {
      preds[j] = static_cast<int>(rng.bounded(k));
      labels[j] = static_cast<int>(rng.bounded(k));
    }
    const auto got = seedling::confusion(preds, labels, k);
    const auto want = oracle::confusion_pairwise(preds, labels, k);
    int diff = 0;
    for (std::size_t j = 0; j < want.size(); ++j) diff += got.counts[j] != want[j];
    record(cm, diff, 0.0);
  }
  out.push_back(cm);
  return out;
}

}  // namespace suites
