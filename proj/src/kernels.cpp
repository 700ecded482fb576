#include "xgan/kernels.hpp"

#include <Eigen/Core>
#include <cmath>
#include <cstddef>
#include <vector>

namespace xgan::kernels {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using CMapMat = Eigen::Map<const RowMat<T>>;

// Lowers one image (C x H x W) into rows of a K x ld column matrix starting at
// column col0, where the patch grid is Ho x Wo.
template <typename T>
void im2col_one(const T* img, int C, int H, int W, int Ho, int Wo, ConvGeometry g, T* cols,
                std::size_t ld, std::size_t col0) {
  const int k = g.kernel;
  for (int c = 0; c < C; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        T* row = cols + static_cast<std::size_t>((c * k + ky) * k + kx) * ld + col0;
        for (int oy = 0; oy < Ho; ++oy) {
          const int iy = oy * g.stride - g.pad + ky;
          T* out = row + static_cast<std::size_t>(oy) * Wo;
          if (iy < 0 || iy >= H) {
            for (int ox = 0; ox < Wo; ++ox) out[ox] = T(0);
            continue;
          }
          const T* in = img + (static_cast<std::size_t>(c) * H + iy) * W;
          for (int ox = 0; ox < Wo; ++ox) {
            const int ix = ox * g.stride - g.pad + kx;
            out[ox] = (ix >= 0 && ix < W) ? in[ix] : T(0);
          }
        }
      }
    }
  }
}

// Adjoint of im2col_one: scatters-adds columns back into the image.
template <typename T>
void col2im_one(const T* cols, std::size_t ld, std::size_t col0, int C, int H, int W, int Ho, int Wo,
                ConvGeometry g, T* img) {
  const int k = g.kernel;
  for (int c = 0; c < C; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const T* row = cols + static_cast<std::size_t>((c * k + ky) * k + kx) * ld + col0;
        for (int oy = 0; oy < Ho; ++oy) {
          const int iy = oy * g.stride - g.pad + ky;
          if (iy < 0 || iy >= H) continue;
          T* out = img + (static_cast<std::size_t>(c) * H + iy) * W;
          const T* in = row + static_cast<std::size_t>(oy) * Wo;
          for (int ox = 0; ox < Wo; ++ox) {
            const int ix = ox * g.stride - g.pad + kx;
            if (ix >= 0 && ix < W) out[ix] += in[ox];
          }
        }
      }
    }
  }
}

template <typename T>
void im2col_batch(const Tensor<T>& img, int Ho, int Wo, ConvGeometry g, AlignedVector<T>& cols) {
  const std::size_t P = static_cast<std::size_t>(Ho) * Wo;
  const std::size_t ld = P * img.n;
  cols.resize(static_cast<std::size_t>(img.c) * g.kernel * g.kernel * ld);
#pragma omp parallel for schedule(static)
  for (int n = 0; n < img.n; ++n) {
    im2col_one(img.ptr() + n * img.sample_size(), img.c, img.h, img.w, Ho, Wo, g, cols.data(), ld,
               n * P);
  }
}

template <typename T>
void col2im_batch(const AlignedVector<T>& cols, int Ho, int Wo, ConvGeometry g, Tensor<T>& img) {
  const std::size_t P = static_cast<std::size_t>(Ho) * Wo;
  const std::size_t ld = P * img.n;
  img.zero();
#pragma omp parallel for schedule(static)
  for (int n = 0; n < img.n; ++n) {
    col2im_one(cols.data(), ld, n * P, img.c, img.h, img.w, Ho, Wo, g, img.ptr() + n * img.sample_size());
  }
}

// N x C x P  <->  C x (N*P)
template <typename T>
void to_channel_major(const Tensor<T>& t, AlignedVector<T>& out) {
  const std::size_t P = static_cast<std::size_t>(t.h) * t.w;
  const std::size_t ld = P * t.n;
  out.resize(static_cast<std::size_t>(t.c) * ld);
#pragma omp parallel for schedule(static)
  for (int n = 0; n < t.n; ++n) {
    for (int c = 0; c < t.c; ++c) {
      const T* src = t.ptr() + (static_cast<std::size_t>(n) * t.c + c) * P;
      T* dst = out.data() + c * ld + n * P;
      for (std::size_t p = 0; p < P; ++p) dst[p] = src[p];
    }
  }
}

template <typename T>
void from_channel_major(const AlignedVector<T>& in, Tensor<T>& t, const T* bias) {
  const std::size_t P = static_cast<std::size_t>(t.h) * t.w;
  const std::size_t ld = P * t.n;
#pragma omp parallel for schedule(static)
  for (int n = 0; n < t.n; ++n) {
    for (int c = 0; c < t.c; ++c) {
      const T* src = in.data() + c * ld + n * P;
      T* dst = t.ptr() + (static_cast<std::size_t>(n) * t.c + c) * P;
      const T bc = bias ? bias[c] : T(0);
      for (std::size_t p = 0; p < P; ++p) dst[p] = src[p] + bc;
    }
  }
}

template <typename T>
void check_conv(const Tensor<T>& x, const Tensor<T>& w, int in_channels_of_w, const char* what) {
  if (x.c != in_channels_of_w || w.h != w.w) {
    throw DimensionError(std::string(what) + ": input " + x.shape_string() + " incompatible with weight " +
                         w.shape_string());
  }
}

}  // namespace

template <typename T>
void conv2d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, Tensor<T>& y,
                    ConvGeometry g) {
  check_conv(x, w, w.c, "conv2d_forward");
  g.kernel = w.h;
  const int Ho = g.conv_out(x.h), Wo = g.conv_out(x.w);
  const int K = w.c * g.kernel * g.kernel;
  const std::size_t NP = static_cast<std::size_t>(x.n) * Ho * Wo;
  AlignedVector<T> cols;
  im2col_batch(x, Ho, Wo, g, cols);
  AlignedVector<T> yt(static_cast<std::size_t>(w.n) * NP);
  MapMat<T>(yt.data(), w.n, NP).noalias() = CMapMat<T>(w.ptr(), w.n, K) * CMapMat<T>(cols.data(), K, NP);
  y = Tensor<T>(x.n, w.n, Ho, Wo);
  from_channel_major(yt, y, b.empty() ? nullptr : b.ptr());
}

template <typename T>
void conv2d_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& dy, Tensor<T>* dx,
                     Tensor<T>* dw, Tensor<T>* db, ConvGeometry g) {
  check_conv(x, w, w.c, "conv2d_backward");
  g.kernel = w.h;
  const int Ho = dy.h, Wo = dy.w;
  const int K = w.c * g.kernel * g.kernel;
  const std::size_t NP = static_cast<std::size_t>(x.n) * Ho * Wo;
  AlignedVector<T> dyt;
  to_channel_major(dy, dyt);
  CMapMat<T> dY(dyt.data(), w.n, NP);
  if (db) {
    for (int co = 0; co < w.n; ++co) {
      const T* row = dyt.data() + static_cast<std::size_t>(co) * NP;
      T s = 0;
      for (std::size_t k = 0; k < NP; ++k) s += row[k];
      db->data[co] += s;
    }
  }
  AlignedVector<T> cols;
  if (dw) {
    im2col_batch(x, Ho, Wo, g, cols);
    MapMat<T>(dw->ptr(), w.n, K).noalias() += dY * CMapMat<T>(cols.data(), K, NP).transpose();
  }
  if (dx) {
    cols.resize(static_cast<std::size_t>(K) * NP);
    MapMat<T>(cols.data(), K, NP).noalias() = CMapMat<T>(w.ptr(), w.n, K).transpose() * dY;
    *dx = Tensor<T>(x.n, x.c, x.h, x.w);
    col2im_batch(cols, Ho, Wo, g, *dx);
  }
}

template <typename T>
void deconv2d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, Tensor<T>& y,
                      ConvGeometry g) {
  check_conv(x, w, w.n, "deconv2d_forward");
  g.kernel = w.h;
  const int Cout = w.c;
  const int Ho = g.deconv_out(x.h), Wo = g.deconv_out(x.w);
  const int K = Cout * g.kernel * g.kernel;
  const std::size_t NP = static_cast<std::size_t>(x.n) * x.h * x.w;
  AlignedVector<T> xt;
  to_channel_major(x, xt);
  AlignedVector<T> cols(static_cast<std::size_t>(K) * NP);
  MapMat<T>(cols.data(), K, NP).noalias() =
      CMapMat<T>(w.ptr(), w.n, K).transpose() * CMapMat<T>(xt.data(), w.n, NP);
  y = Tensor<T>(x.n, Cout, Ho, Wo);
  col2im_batch(cols, x.h, x.w, g, y);
  if (!b.empty()) {
    const std::size_t P = static_cast<std::size_t>(Ho) * Wo;
#pragma omp parallel for schedule(static)
    for (int n = 0; n < y.n; ++n) {
      for (int c = 0; c < Cout; ++c) {
        T* dst = y.ptr() + (static_cast<std::size_t>(n) * Cout + c) * P;
        for (std::size_t p = 0; p < P; ++p) dst[p] += b.data[c];
      }
    }
  }
}

template <typename T>
void deconv2d_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& dy, Tensor<T>* dx,
                       Tensor<T>* dw, Tensor<T>* db, ConvGeometry g) {
  check_conv(x, w, w.n, "deconv2d_backward");
  g.kernel = w.h;
  const int Cin = w.n, Cout = w.c;
  const int K = Cout * g.kernel * g.kernel;
  const std::size_t NP = static_cast<std::size_t>(x.n) * x.h * x.w;
  if (db) {
    const std::size_t P = static_cast<std::size_t>(dy.h) * dy.w;
    for (int n = 0; n < dy.n; ++n) {
      for (int c = 0; c < Cout; ++c) {
        const T* src = dy.ptr() + (static_cast<std::size_t>(n) * Cout + c) * P;
        T s = 0;
        for (std::size_t p = 0; p < P; ++p) s += src[p];
        db->data[c] += s;
      }
    }
  }
  AlignedVector<T> dcols;
  im2col_batch(dy, x.h, x.w, g, dcols);
  CMapMat<T> dC(dcols.data(), K, NP);
  if (dw) {
    AlignedVector<T> xt;
    to_channel_major(x, xt);
    MapMat<T>(dw->ptr(), Cin, K).noalias() += CMapMat<T>(xt.data(), Cin, NP) * dC.transpose();
  }
  if (dx) {
    AlignedVector<T> dxt(static_cast<std::size_t>(Cin) * NP);
    MapMat<T>(dxt.data(), Cin, NP).noalias() = CMapMat<T>(w.ptr(), Cin, K) * dC;
    *dx = Tensor<T>(x.n, x.c, x.h, x.w);
    from_channel_major(dxt, *dx, static_cast<const T*>(nullptr));
  }
}

template <typename T>
void linear_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, Tensor<T>& y) {
  const int in = static_cast<int>(x.sample_size());
  if (in != w.c) {
    throw DimensionError("linear_forward: input width " + std::to_string(in) + " != weight width " +
                         std::to_string(w.c));
  }
  y = Tensor<T>(x.n, w.n);
  MapMat<T> Y(y.ptr(), x.n, w.n);
  Y.noalias() = CMapMat<T>(x.ptr(), x.n, in) * CMapMat<T>(w.ptr(), w.n, in).transpose();
  if (!b.empty()) Y.rowwise() += Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>(b.ptr(), w.n);
}

template <typename T>
void linear_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& dy, Tensor<T>* dx,
                     Tensor<T>* dw, Tensor<T>* db) {
  const int in = static_cast<int>(x.sample_size());
  CMapMat<T> dY(dy.ptr(), dy.n, w.n);
  if (db) {
    for (int i = 0; i < dy.n; ++i)
      for (int o = 0; o < w.n; ++o) db->data[o] += dy.data[static_cast<std::size_t>(i) * w.n + o];
  }
  if (dw) MapMat<T>(dw->ptr(), w.n, in).noalias() += dY.transpose() * CMapMat<T>(x.ptr(), x.n, in);
  if (dx) {
    *dx = Tensor<T>(x.n, x.c, x.h, x.w);
    MapMat<T>(dx->ptr(), x.n, in).noalias() = dY * CMapMat<T>(w.ptr(), w.n, in);
  }
}

template <typename T>
void leaky_relu_forward(const Tensor<T>& x, Tensor<T>& y, T slope) {
  y = Tensor<T>(x.n, x.c, x.h, x.w);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) y.data[i] = x.data[i] > 0 ? x.data[i] : slope * x.data[i];
}

template <typename T>
void leaky_relu_backward(const Tensor<T>& x, const Tensor<T>& dy, Tensor<T>& dx, T slope) {
  dx = Tensor<T>(x.n, x.c, x.h, x.w);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) dx.data[i] = x.data[i] > 0 ? dy.data[i] : slope * dy.data[i];
}

template <typename T>
void relu_forward(const Tensor<T>& x, Tensor<T>& y) {
  leaky_relu_forward(x, y, T(0));
}

template <typename T>
void relu_backward(const Tensor<T>& x, const Tensor<T>& dy, Tensor<T>& dx) {
  leaky_relu_backward(x, dy, dx, T(0));
}

template <typename T>
void tanh_forward(const Tensor<T>& x, Tensor<T>& y) {
  y = Tensor<T>(x.n, x.c, x.h, x.w);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) y.data[i] = std::tanh(x.data[i]);
}

template <typename T>
void tanh_backward(const Tensor<T>& y, const Tensor<T>& dy, Tensor<T>& dx) {
  dx = Tensor<T>(y.n, y.c, y.h, y.w);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(y.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) dx.data[i] = dy.data[i] * (T(1) - y.data[i] * y.data[i]);
}

template <typename T>
void instance_norm_forward(const Tensor<T>& x, Tensor<T>& y, T eps) {
  y = Tensor<T>(x.n, x.c, x.h, x.w);
  const std::size_t P = static_cast<std::size_t>(x.h) * x.w;
  const int planes = x.n * x.c;
#pragma omp parallel for schedule(static)
  for (int q = 0; q < planes; ++q) {
    const T* src = x.ptr() + q * P;
    T* dst = y.ptr() + q * P;
    T mean = 0;
    for (std::size_t p = 0; p < P; ++p) mean += src[p];
    mean /= static_cast<T>(P);
    T var = 0;
    for (std::size_t p = 0; p < P; ++p) var += (src[p] - mean) * (src[p] - mean);
    var /= static_cast<T>(P);
    const T inv = T(1) / std::sqrt(var + eps);
    for (std::size_t p = 0; p < P; ++p) dst[p] = (src[p] - mean) * inv;
  }
}

template <typename T>
void instance_norm_backward(const Tensor<T>& x, const Tensor<T>& dy, Tensor<T>& dx, T eps) {
  dx = Tensor<T>(x.n, x.c, x.h, x.w);
  const std::size_t P = static_cast<std::size_t>(x.h) * x.w;
  const int planes = x.n * x.c;
#pragma omp parallel for schedule(static)
  for (int q = 0; q < planes; ++q) {
    const T* src = x.ptr() + q * P;
    const T* g = dy.ptr() + q * P;
    T* dst = dx.ptr() + q * P;
    T mean = 0;
    for (std::size_t p = 0; p < P; ++p) mean += src[p];
    mean /= static_cast<T>(P);
    T var = 0;
    for (std::size_t p = 0; p < P; ++p) var += (src[p] - mean) * (src[p] - mean);
    var /= static_cast<T>(P);
    const T inv = T(1) / std::sqrt(var + eps);
    T mg = 0, mgx = 0;
    for (std::size_t p = 0; p < P; ++p) {
      const T xh = (src[p] - mean) * inv;
      mg += g[p];
      mgx += g[p] * xh;
    }
    mg /= static_cast<T>(P);
    mgx /= static_cast<T>(P);
    for (std::size_t p = 0; p < P; ++p) {
      const T xh = (src[p] - mean) * inv;
      dst[p] = inv * (g[p] - mg - xh * mgx);
    }
  }
}

#define XGAN_INSTANTIATE_KERNELS(T)                                                                       \
  template void conv2d_forward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Tensor<T>&,       \
                                  ConvGeometry);                                                          \
  template void conv2d_backward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Tensor<T>*,      \
                                   Tensor<T>*, Tensor<T>*, ConvGeometry);                                 \
  template void deconv2d_forward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Tensor<T>&,     \
                                    ConvGeometry);                                                        \
  template void deconv2d_backward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Tensor<T>*,    \
                                     Tensor<T>*, Tensor<T>*, ConvGeometry);                               \
  template void linear_forward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Tensor<T>&);      \
  template void linear_backward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Tensor<T>*,      \
                                   Tensor<T>*, Tensor<T>*);                                               \
  template void leaky_relu_forward<T>(const Tensor<T>&, Tensor<T>&, T);                                   \
  template void leaky_relu_backward<T>(const Tensor<T>&, const Tensor<T>&, Tensor<T>&, T);                \
  template void relu_forward<T>(const Tensor<T>&, Tensor<T>&);                                            \
  template void relu_backward<T>(const Tensor<T>&, const Tensor<T>&, Tensor<T>&);                         \
  template void tanh_forward<T>(const Tensor<T>&, Tensor<T>&);                                            \
  template void tanh_backward<T>(const Tensor<T>&, const Tensor<T>&, Tensor<T>&);                         \
  template void instance_norm_forward<T>(const Tensor<T>&, Tensor<T>&, T);                                \
  template void instance_norm_backward<T>(const Tensor<T>&, const Tensor<T>&, Tensor<T>&, T);

XGAN_INSTANTIATE_KERNELS(float)
XGAN_INSTANTIATE_KERNELS(double)

}  // namespace xgan::kernels
