#pragma once

// Serial direct-loop implementations of the layer kernels. Slow, obviously
// correct, and kept only as the oracle for tests and the baseline for the
// kernel benchmark. Same contracts as xgan::kernels.

#include "xgan/kernels.hpp"

namespace xgan::reference {

using kernels::ConvGeometry;

template <typename T>
void conv2d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, Tensor<T>& y,
                    ConvGeometry g = {});
template <typename T>
void conv2d_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& dy, Tensor<T>* dx,
                     Tensor<T>* dw, Tensor<T>* db, ConvGeometry g = {});
template <typename T>
void deconv2d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, Tensor<T>& y,
                      ConvGeometry g = {});
template <typename T>
void deconv2d_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& dy, Tensor<T>* dx,
                       Tensor<T>* dw, Tensor<T>* db, ConvGeometry g = {});
template <typename T>
void linear_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, Tensor<T>& y);
template <typename T>
void linear_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& dy, Tensor<T>* dx,
                     Tensor<T>* dw, Tensor<T>* db);

}  // namespace xgan::reference
