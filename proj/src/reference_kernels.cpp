#include "xgan/reference_kernels.hpp"

namespace xgan::reference {

template <typename T>
void conv2d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, Tensor<T>& y,
                    ConvGeometry g) {
  g.kernel = w.h;
  const int Ho = g.conv_out(x.h), Wo = g.conv_out(x.w);
  y = Tensor<T>(x.n, w.n, Ho, Wo);
  for (int n = 0; n < x.n; ++n)
    for (int co = 0; co < w.n; ++co)
      for (int oy = 0; oy < Ho; ++oy)
        for (int ox = 0; ox < Wo; ++ox) {
          T acc = b.empty() ? T(0) : b.data[co];
          for (int ci = 0; ci < x.c; ++ci)
            for (int ky = 0; ky < g.kernel; ++ky)
              for (int kx = 0; kx < g.kernel; ++kx) {
                const int iy = oy * g.stride - g.pad + ky;
                const int ix = ox * g.stride - g.pad + kx;
                if (iy < 0 || iy >= x.h || ix < 0 || ix >= x.w) continue;
                acc += w.at(co, ci, ky, kx) * x.at(n, ci, iy, ix);
              }
          y.at(n, co, oy, ox) = acc;
        }
}

template <typename T>
void conv2d_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& dy, Tensor<T>* dx,
                     Tensor<T>* dw, Tensor<T>* db, ConvGeometry g) {
  g.kernel = w.h;
  if (dx) *dx = Tensor<T>(x.n, x.c, x.h, x.w);
  for (int n = 0; n < x.n; ++n)
    for (int co = 0; co < w.n; ++co)
      for (int oy = 0; oy < dy.h; ++oy)
        for (int ox = 0; ox < dy.w; ++ox) {
          const T gout = dy.at(n, co, oy, ox);
          if (db) db->data[co] += gout;
          for (int ci = 0; ci < x.c; ++ci)
            for (int ky = 0; ky < g.kernel; ++ky)
              for (int kx = 0; kx < g.kernel; ++kx) {
                const int iy = oy * g.stride - g.pad + ky;
                const int ix = ox * g.stride - g.pad + kx;
                if (iy < 0 || iy >= x.h || ix < 0 || ix >= x.w) continue;
                if (dw) dw->at(co, ci, ky, kx) += gout * x.at(n, ci, iy, ix);
                if (dx) dx->at(n, ci, iy, ix) += gout * w.at(co, ci, ky, kx);
              }
        }
}

template <typename T>
void deconv2d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, Tensor<T>& y,
                      ConvGeometry g) {
  g.kernel = w.h;
  const int Cout = w.c;
  const int Ho = g.deconv_out(x.h), Wo = g.deconv_out(x.w);
  y = Tensor<T>(x.n, Cout, Ho, Wo);
  for (int n = 0; n < x.n; ++n)
    for (int ci = 0; ci < x.c; ++ci)
      for (int iy = 0; iy < x.h; ++iy)
        for (int ix = 0; ix < x.w; ++ix) {
          const T v = x.at(n, ci, iy, ix);
          for (int co = 0; co < Cout; ++co)
            for (int ky = 0; ky < g.kernel; ++ky)
              for (int kx = 0; kx < g.kernel; ++kx) {
                const int oy = iy * g.stride - g.pad + ky;
                const int ox = ix * g.stride - g.pad + kx;
                if (oy < 0 || oy >= Ho || ox < 0 || ox >= Wo) continue;
                y.at(n, co, oy, ox) += v * w.at(ci, co, ky, kx);
              }
        }
  if (!b.empty())
    for (int n = 0; n < x.n; ++n)
      for (int co = 0; co < Cout; ++co)
        for (int oy = 0; oy < Ho; ++oy)
          for (int ox = 0; ox < Wo; ++ox) y.at(n, co, oy, ox) += b.data[co];
}

template <typename T>
void deconv2d_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& dy, Tensor<T>* dx,
                       Tensor<T>* dw, Tensor<T>* db, ConvGeometry g) {
  g.kernel = w.h;
  const int Cout = w.c;
  if (dx) *dx = Tensor<T>(x.n, x.c, x.h, x.w);
  if (db)
    for (int n = 0; n < dy.n; ++n)
      for (int co = 0; co < Cout; ++co)
        for (int oy = 0; oy < dy.h; ++oy)
          for (int ox = 0; ox < dy.w; ++ox) db->data[co] += dy.at(n, co, oy, ox);
  for (int n = 0; n < x.n; ++n)
    for (int ci = 0; ci < x.c; ++ci)
      for (int iy = 0; iy < x.h; ++iy)
        for (int ix = 0; ix < x.w; ++ix)
          for (int co = 0; co < Cout; ++co)
            for (int ky = 0; ky < g.kernel; ++ky)
              for (int kx = 0; kx < g.kernel; ++kx) {
                const int oy = iy * g.stride - g.pad + ky;
                const int ox = ix * g.stride - g.pad + kx;
                if (oy < 0 || oy >= dy.h || ox < 0 || ox >= dy.w) continue;
                const T gout = dy.at(n, co, oy, ox);
                if (dw) dw->at(ci, co, ky, kx) += gout * x.at(n, ci, iy, ix);
                if (dx) dx->at(n, ci, iy, ix) += gout * w.at(ci, co, ky, kx);
              }
}

template <typename T>
void linear_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, Tensor<T>& y) {
  const std::size_t in = x.sample_size();
  y = Tensor<T>(x.n, w.n);
  for (int n = 0; n < x.n; ++n)
    for (int o = 0; o < w.n; ++o) {
      T acc = b.empty() ? T(0) : b.data[o];
      for (std::size_t i = 0; i < in; ++i) acc += w.data[o * in + i] * x.data[n * in + i];
      y.data[static_cast<std::size_t>(n) * w.n + o] = acc;
    }
}

template <typename T>
void linear_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& dy, Tensor<T>* dx,
                     Tensor<T>* dw, Tensor<T>* db) {
  const std::size_t in = x.sample_size();
  if (dx) *dx = Tensor<T>(x.n, x.c, x.h, x.w);
  for (int n = 0; n < x.n; ++n)
    for (int o = 0; o < w.n; ++o) {
      const T gout = dy.data[static_cast<std::size_t>(n) * w.n + o];
      if (db) db->data[o] += gout;
      for (std::size_t i = 0; i < in; ++i) {
        if (dw) dw->data[o * in + i] += gout * x.data[n * in + i];
        if (dx) dx->data[n * in + i] += gout * w.data[o * in + i];
      }
    }
}

#define XGAN_INSTANTIATE_REFERENCE(T)                                                                     \
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
                                   Tensor<T>*, Tensor<T>*);

XGAN_INSTANTIATE_REFERENCE(float)
XGAN_INSTANTIATE_REFERENCE(double)

}  // namespace xgan::reference
