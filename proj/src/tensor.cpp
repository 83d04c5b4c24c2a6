#include "seedling/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>
#include <sstream>

#include "seedling/error.hpp"

namespace seedling {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, T fill) : shape_(std::move(shape)) {
  for (auto d : shape_) {
    if (d == 0) throw ShapeError("tensor extents must be positive, got " + shape_str(shape_));
  }
  data_.assign(shape_size(shape_), fill);
}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, std::vector<T> data) : BasicTensor(std::move(shape)) {
  if (data.size() != data_.size()) {
    throw ShapeError("data length " + std::to_string(data.size()) + " does not match shape " + shape_str(shape_));
  }
  data_ = std::move(data);
}

template <typename T>
std::size_t BasicTensor<T>::offset(std::initializer_list<std::size_t> idx) const {
  if (idx.size() != shape_.size()) {
    throw ShapeError("index rank " + std::to_string(idx.size()) + " for tensor of shape " + shape_str(shape_));
  }
  std::size_t off = 0;
  std::size_t i = 0;
  for (auto v : idx) {
    if (v >= shape_[i]) throw ShapeError("index out of range for shape " + shape_str(shape_));
    off = off * shape_[i] + v;
    ++i;
  }
  return off;
}

template <typename T>
T& BasicTensor<T>::at(std::initializer_list<std::size_t> idx) {
  return data_[offset(idx)];
}

template <typename T>
const T& BasicTensor<T>::at(std::initializer_list<std::size_t> idx) const {
  return data_[offset(idx)];
}

template <typename T>
BasicTensor<T> BasicTensor<T>::reshaped(Shape shape) const& {
  return BasicTensor(*this).reshaped(std::move(shape));
}

template <typename T>
BasicTensor<T> BasicTensor<T>::reshaped(Shape shape) && {
  if (shape_size(shape) != data_.size()) {
    throw ShapeError("cannot reshape " + shape_str(shape_) + " to " + shape_str(shape));
  }
  BasicTensor out;
  out.shape_ = std::move(shape);
  out.data_ = std::move(data_);
  return out;
}

template <typename T>
void BasicTensor<T>::fill(T v) {
  std::fill(data_.begin(), data_.end(), v);
}

// ---------------------------------------------------------------------------
// RNG

std::uint64_t SeededRng::next_u64() {
  state_ += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double SeededRng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t SeededRng::bounded(std::uint64_t n) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

std::vector<double> rng_uniform(SeededRng& rng, std::size_t n) {
  std::vector<double> out(n);
  for (auto& v : out) v = rng.uniform();
  return out;
}

std::vector<double> rng_normal(SeededRng& rng, std::size_t n) {
  std::vector<double> out;
  out.reserve(n + 1);
  while (out.size() < n) {
    double u1 = rng.uniform();
    const double u2 = rng.uniform();
    if (u1 == 0.0) u1 = std::numeric_limits<double>::denorm_min();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    out.push_back(r * std::cos(theta));
    out.push_back(r * std::sin(theta));
  }
  out.resize(n);
  return out;
}

// ---------------------------------------------------------------------------
// GEMM

namespace {

#if defined(__AVX512F__)
constexpr std::size_t kVectorBytes = 64;
#elif defined(__AVX__)
constexpr std::size_t kVectorBytes = 32;
#else
constexpr std::size_t kVectorBytes = 16;
#endif

template <typename T>
struct VecOf {
  typedef T type __attribute__((vector_size(kVectorBytes)));
};
template <typename T>
using vec_t = typename VecOf<T>::type;
template <typename T>
constexpr std::size_t kLanes = kVectorBytes / sizeof(T);

template <typename T>
inline vec_t<T> vload(const T* p) {
  vec_t<T> v;
  std::memcpy(&v, p, sizeof v);
  return v;
}
template <typename T>
inline void vstore(T* p, vec_t<T> v) {
  std::memcpy(p, &v, sizeof v);
}

// Register tile: kRows x (kVecs * lanes) outputs.
constexpr std::size_t kRows = 6;
constexpr std::size_t kVecs = 4;
template <typename T>
constexpr std::size_t kCols = kVecs * kLanes<T>;

// a_pack: k x kRows (row index fastest); b_pack: k x kCols. Writes a full tile
// to c with leading dimension ldc.
template <typename T>
inline void micro_kernel(std::size_t k, const T* a_pack, const T* b_pack, T* c, std::size_t ldc, bool accumulate) {
  constexpr std::size_t L = kLanes<T>;
  vec_t<T> acc[kRows][kVecs];
  for (std::size_t i = 0; i < kRows; ++i)
    for (std::size_t v = 0; v < kVecs; ++v) acc[i][v] = accumulate ? vload(c + i * ldc + v * L) : vec_t<T>{};

  for (std::size_t p = 0; p < k; ++p) {
    vec_t<T> b[kVecs];
    for (std::size_t v = 0; v < kVecs; ++v) b[v] = vload(b_pack + (p * kVecs + v) * L);
    for (std::size_t i = 0; i < kRows; ++i) {
      const T a = a_pack[p * kRows + i];
      for (std::size_t v = 0; v < kVecs; ++v) acc[i][v] += a * b[v];
    }
  }
  for (std::size_t i = 0; i < kRows; ++i)
    for (std::size_t v = 0; v < kVecs; ++v) vstore(c + i * ldc + v * L, acc[i][v]);
}

template <typename T>
std::vector<T> transposed_copy(const T* src, std::size_t rows, std::size_t cols) {
  std::vector<T> dst(rows * cols);
  constexpr std::size_t B = 32;
  for (std::size_t r0 = 0; r0 < rows; r0 += B) {
    for (std::size_t c0 = 0; c0 < cols; c0 += B) {
      const std::size_t r1 = std::min(rows, r0 + B);
      const std::size_t c1 = std::min(cols, c0 + B);
      for (std::size_t r = r0; r < r1; ++r)
        for (std::size_t cc = c0; cc < c1; ++cc) dst[cc * rows + r] = src[r * cols + cc];
    }
  }
  return dst;
}

template <typename T>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate) {
  constexpr std::size_t NR = kCols<T>;
  const std::size_t row_blocks = (m + kRows - 1) / kRows;

  // A is packed once into zero-padded kRows-row slivers.
  std::vector<T> a_pack(row_blocks * k * kRows, T{0});
  for (std::size_t blk = 0; blk < row_blocks; ++blk) {
    T* dst = a_pack.data() + blk * k * kRows;
    for (std::size_t r = 0; r < kRows && blk * kRows + r < m; ++r) {
      const T* src = a + (blk * kRows + r) * k;
      for (std::size_t p = 0; p < k; ++p) dst[p * kRows + r] = src[p];
    }
  }

  // Column panels outermost: each k x NR slice of B is packed (zero-padded) and
  // stays cache resident while every row sliver streams past it.
  std::vector<T> b_pack(k * NR);
  T edge[kRows * NR] = {};
  for (std::size_t j = 0; j < n; j += NR) {
    const std::size_t nr = std::min(NR, n - j);
    for (std::size_t p = 0; p < k; ++p) {
      T* dst = b_pack.data() + p * NR;
      std::copy_n(b + p * n + j, nr, dst);
      std::fill(dst + nr, dst + NR, T{0});
    }
    for (std::size_t blk = 0; blk < row_blocks; ++blk) {
      const std::size_t i = blk * kRows;
      const std::size_t mr = std::min(kRows, m - i);
      const T* ap = a_pack.data() + blk * k * kRows;
      if (mr == kRows && nr == NR) {
        micro_kernel<T>(k, ap, b_pack.data(), c + i * n + j, n, accumulate);
        continue;
      }
      for (std::size_t r = 0; r < mr; ++r) {
        if (accumulate) std::copy_n(c + (i + r) * n + j, nr, edge + r * NR);
      }
      micro_kernel<T>(k, ap, b_pack.data(), edge, NR, accumulate);
      for (std::size_t r = 0; r < mr; ++r) std::copy_n(edge + r * NR, nr, c + (i + r) * n + j);
    }
  }
}

}  // namespace

template <typename T>
void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
          bool accumulate) {
  if (m == 0 || n == 0) return;
  if (k == 0) {
    if (!accumulate) std::fill(c, c + m * n, T{0});
    return;
  }
  std::vector<T> a_buf;
  std::vector<T> b_buf;
  if (ta == Trans::yes) {
    a_buf = transposed_copy(a, k, m);
    a = a_buf.data();
  }
  if (tb == Trans::yes) {
    b_buf = transposed_copy(b, n, k);
    b = b_buf.data();
  }
  gemm_nn(m, n, k, a, b, c, accumulate);
}

template <typename T>
BasicTensor<T> matmul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul shape mismatch: " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  }
  BasicTensor<T> c({a.dim(0), b.dim(1)});
  gemm(Trans::no, Trans::no, a.dim(0), b.dim(1), a.dim(1), a.data().data(), b.data().data(), c.data().data(),
       false);
  return c;
}

template <typename T>
BasicTensor<T> transpose2d(const BasicTensor<T>& a) {
  if (a.rank() != 2) throw ShapeError("transpose2d expects a matrix, got " + shape_str(a.shape()));
  return BasicTensor<T>({a.dim(1), a.dim(0)}, transposed_copy(a.data().data(), a.dim(0), a.dim(1)));
}

namespace {

template <typename T, typename F>
BasicTensor<T> zip(const BasicTensor<T>& a, const BasicTensor<T>& b, const char* op, F f) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + " shape mismatch: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  BasicTensor<T> out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i], b[i]);
  return out;
}

}  // namespace

template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  return zip(a, b, "add", [](T x, T y) { return x + y; });
}
template <typename T>
BasicTensor<T> sub(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  return zip(a, b, "sub", [](T x, T y) { return x - y; });
}
template <typename T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  return zip(a, b, "mul", [](T x, T y) { return x * y; });
}
template <typename T>
BasicTensor<T> scale(const BasicTensor<T>& a, T s) {
  BasicTensor<T> out = a;
  for (auto& v : out.data()) v *= s;
  return out;
}
template <typename T>
BasicTensor<T> map(const BasicTensor<T>& a, const std::function<T(T)>& f) {
  BasicTensor<T> out = a;
  for (auto& v : out.data()) v = f(v);
  return out;
}

#define SEEDLING_INSTANTIATE(T)                                                                              \
  template class BasicTensor<T>;                                                                             \
  template void gemm<T>(Trans, Trans, std::size_t, std::size_t, std::size_t, const T*, const T*, T*, bool); \
  template BasicTensor<T> matmul(const BasicTensor<T>&, const BasicTensor<T>&);                             \
  template BasicTensor<T> transpose2d(const BasicTensor<T>&);                                               \
  template BasicTensor<T> add(const BasicTensor<T>&, const BasicTensor<T>&);                                \
  template BasicTensor<T> sub(const BasicTensor<T>&, const BasicTensor<T>&);                                \
  template BasicTensor<T> mul(const BasicTensor<T>&, const BasicTensor<T>&);                                \
  template BasicTensor<T> scale(const BasicTensor<T>&, T);                                                  \
  template BasicTensor<T> map(const BasicTensor<T>&, const std::function<T(T)>&);

SEEDLING_INSTANTIATE(float)
SEEDLING_INSTANTIATE(double)

#undef SEEDLING_INSTANTIATE

}  // namespace seedling
