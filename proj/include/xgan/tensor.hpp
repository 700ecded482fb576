#pragma once

#include <algorithm>
#include <cstddef>
#include <new>
#include <span>
#include <string>
#include <vector>

#include "xgan/errors.hpp"

namespace xgan {

/// 64-byte aligned storage. Vectorized reductions peel by address, so a fixed
/// alignment keeps results independent of where the allocator put a buffer.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlignment{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlignment)); }
  void deallocate(T* p, std::size_t) { ::operator delete(p, kAlignment); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const {
    return true;
  }
};

template <typename T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

/// Dense NCHW array. Vectors are stored as N x C x 1 x 1; parameters reuse the
/// same container (conv weights are Cout x Cin x K x K, linear weights Out x In).
template <typename T>
struct Tensor {
  int n = 0;
  int c = 0;
  int h = 1;
  int w = 1;
  AlignedVector<T> data;

  Tensor() = default;
  Tensor(int n_, int c_, int h_ = 1, int w_ = 1, T fill = T(0))
      : n(n_), c(c_), h(h_), w(w_), data(static_cast<std::size_t>(n_) * c_ * h_ * w_, fill) {}

  std::size_t size() const { return data.size(); }
  std::size_t sample_size() const { return static_cast<std::size_t>(c) * h * w; }
  bool empty() const { return data.empty(); }

  T* ptr() { return data.data(); }
  const T* ptr() const { return data.data(); }

  std::span<T> sample(int i) { return {data.data() + i * sample_size(), sample_size()}; }
  std::span<const T> sample(int i) const { return {data.data() + i * sample_size(), sample_size()}; }

  T& at(int i, int ch, int y, int x) {
    return data[((static_cast<std::size_t>(i) * c + ch) * h + y) * w + x];
  }
  const T& at(int i, int ch, int y, int x) const {
    return data[((static_cast<std::size_t>(i) * c + ch) * h + y) * w + x];
  }

  bool same_shape(const Tensor& o) const { return n == o.n && c == o.c && h == o.h && w == o.w; }

  std::string shape_string() const {
    return std::to_string(n) + "x" + std::to_string(c) + "x" + std::to_string(h) + "x" +
           std::to_string(w);
  }

  void zero() { std::fill(data.begin(), data.end(), T(0)); }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(n, c, h, w);
    std::transform(data.begin(), data.end(), out.data.begin(), [](T v) { return static_cast<U>(v); });
    return out;
  }
};

template <typename T>
using ImageBatch = Tensor<T>;
template <typename T>
using EmbeddingBatch = Tensor<T>;

template <typename T>
void require_shape(const Tensor<T>& t, int c, int h, int w, const char* what) {
  if (t.n < 1 || t.c != c || t.h != h || t.w != w) {
    throw DimensionError(std::string(what) + ": expected Nx" + std::to_string(c) + "x" +
                         std::to_string(h) + "x" + std::to_string(w) + ", got " + t.shape_string());
  }
}

/// Concatenates samples along N. All inputs must share C, H, W.
template <typename T>
Tensor<T> concat_batch(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.c != b.c || a.h != b.h || a.w != b.w) throw DimensionError("concat_batch: shape mismatch");
  Tensor<T> out(a.n + b.n, a.c, a.h, a.w);
  std::copy(a.data.begin(), a.data.end(), out.data.begin());
  std::copy(b.data.begin(), b.data.end(), out.data.begin() + a.size());
  return out;
}

template <typename T>
Tensor<T> concat_batch(const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) return {};
  int n = 0;
  for (const auto& p : parts) {
    if (p.c != parts[0].c || p.h != parts[0].h || p.w != parts[0].w)
      throw DimensionError("concat_batch: shape mismatch");
    n += p.n;
  }
  Tensor<T> out(n, parts[0].c, parts[0].h, parts[0].w);
  auto it = out.data.begin();
  for (const auto& p : parts) it = std::copy(p.data.begin(), p.data.end(), it);
  return out;
}

/// Gathers the listed samples into a new batch.
template <typename T>
Tensor<T> gather_batch(const Tensor<T>& src, std::span<const std::size_t> idx) {
  Tensor<T> out(static_cast<int>(idx.size()), src.c, src.h, src.w);
  const std::size_t s = src.sample_size();
  for (std::size_t k = 0; k < idx.size(); ++k) {
    auto in = src.sample(static_cast<int>(idx[k]));
    std::copy(in.begin(), in.end(), out.data.begin() + k * s);
  }
  return out;
}

template <typename T>
Tensor<T> slice_batch(const Tensor<T>& src, int begin, int end) {
  Tensor<T> out(end - begin, src.c, src.h, src.w);
  std::copy(src.data.begin() + begin * src.sample_size(), src.data.begin() + end * src.sample_size(),
            out.data.begin());
  return out;
}

}  // namespace xgan
