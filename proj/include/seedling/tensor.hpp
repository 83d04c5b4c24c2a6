#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace seedling {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_str(const Shape& shape);

// Dense row-major array. T is float for training and double for gradient checks.
// 4-D tensors are laid out NCHW.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() = default;
  explicit BasicTensor(Shape shape, T fill = T{0});
  BasicTensor(Shape shape, std::vector<T> data);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  // Bounds-checked multi-index access.
  T& at(std::initializer_list<std::size_t> idx);
  const T& at(std::initializer_list<std::size_t> idx) const;

  // Same data, new shape of equal element count.
  BasicTensor reshaped(Shape shape) const&;
  BasicTensor reshaped(Shape shape) &&;

  void fill(T v);

  friend bool operator==(const BasicTensor&, const BasicTensor&) = default;

 private:
  std::size_t offset(std::initializer_list<std::size_t> idx) const;

  Shape shape_;
  std::vector<T> data_;
};

using Tensor = BasicTensor<float>;
using Tensor64 = BasicTensor<double>;

template <typename To, typename From>
BasicTensor<To> tensor_cast(const BasicTensor<From>& t) {
  std::vector<To> d(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) d[i] = static_cast<To>(t[i]);
  return BasicTensor<To>(t.shape(), std::move(d));
}

// splitmix64 generator.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next_u64();
  // [0, 1) from the 53 high bits.
  double uniform();
  // Uniform integer in [0, n); n > 0.
  std::uint64_t bounded(std::uint64_t n);

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

std::vector<double> rng_uniform(SeededRng& rng, std::size_t n);

// Box-Muller on consecutive uniform pairs; a zero first uniform is replaced by the
// smallest positive double so every draw is finite.
std::vector<double> rng_normal(SeededRng& rng, std::size_t n);

// Fisher-Yates with the given generator.
template <typename It>
void shuffle(It first, It last, SeededRng& rng) {
  const auto n = static_cast<std::uint64_t>(last - first);
  for (std::uint64_t i = n; i > 1; --i) {
    const auto j = rng.bounded(i);
    std::swap(first[static_cast<std::ptrdiff_t>(i - 1)], first[static_cast<std::ptrdiff_t>(j)]);
  }
}

enum class Trans { no, yes };

// C (m x n) = op(A) * op(B), or C += ... when accumulate is set. op(A) is m x k,
// op(B) is k x n; all buffers row-major and contiguous. Each output element is
// accumulated over k in increasing order, so results do not depend on blocking.
template <typename T>
void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
          bool accumulate);

template <typename T>
BasicTensor<T> matmul(const BasicTensor<T>& a, const BasicTensor<T>& b);

template <typename T>
BasicTensor<T> transpose2d(const BasicTensor<T>& a);

template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T>
BasicTensor<T> sub(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T>
BasicTensor<T> scale(const BasicTensor<T>& a, T s);
template <typename T>
BasicTensor<T> map(const BasicTensor<T>& a, const std::function<T(T)>& f);

}  // namespace seedling
