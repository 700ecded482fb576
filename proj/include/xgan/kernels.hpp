#pragma once

// Parallel layer kernels. Convolutions are lowered to im2col + GEMM; the
// per-sample lowering loops run under OpenMP and the GEMMs go through Eigen.
// All kernels are deterministic for a fixed thread count, and the ones that
// reduce across the batch do so inside a single GEMM so the result does not
// depend on the thread count either.
//
// Gradient outputs for parameters (dw, db) are accumulated (+=), input
// gradients (dx) are overwritten.

#include "xgan/tensor.hpp"

namespace xgan::kernels {

/// Square-kernel convolution geometry shared by conv and transposed conv.
struct ConvGeometry {
  int kernel = 4;
  int stride = 2;
  int pad = 1;

  int conv_out(int in) const { return (in + 2 * pad - kernel) / stride + 1; }
  int deconv_out(int in) const { return (in - 1) * stride - 2 * pad + kernel; }
};

/// x: N x Cin x H x W, w: Cout x Cin x K x K, b: Cout. y is resized.
template <typename T>
void conv2d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, Tensor<T>& y,
                    ConvGeometry g = {});
template <typename T>
void conv2d_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& dy, Tensor<T>* dx,
                     Tensor<T>* dw, Tensor<T>* db, ConvGeometry g = {});

/// Transposed convolution. x: N x Cin x H x W, w: Cin x Cout x K x K, b: Cout.
template <typename T>
void deconv2d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, Tensor<T>& y,
                      ConvGeometry g = {});
template <typename T>
void deconv2d_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& dy, Tensor<T>* dx,
                       Tensor<T>* dw, Tensor<T>* db, ConvGeometry g = {});

/// Fully connected on the flattened sample. x: N x In (any C*H*W = In), w: Out x In, b: Out.
template <typename T>
void linear_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, Tensor<T>& y);
template <typename T>
void linear_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& dy, Tensor<T>* dx,
                     Tensor<T>* dw, Tensor<T>* db);

template <typename T>
void leaky_relu_forward(const Tensor<T>& x, Tensor<T>& y, T slope);
template <typename T>
void leaky_relu_backward(const Tensor<T>& x, const Tensor<T>& dy, Tensor<T>& dx, T slope);
template <typename T>
void relu_forward(const Tensor<T>& x, Tensor<T>& y);
template <typename T>
void relu_backward(const Tensor<T>& x, const Tensor<T>& dy, Tensor<T>& dx);
template <typename T>
void tanh_forward(const Tensor<T>& x, Tensor<T>& y);
/// Uses the forward output y.
template <typename T>
void tanh_backward(const Tensor<T>& y, const Tensor<T>& dy, Tensor<T>& dx);

/// Per-(sample, channel) normalization over H x W, no affine parameters.
template <typename T>
void instance_norm_forward(const Tensor<T>& x, Tensor<T>& y, T eps);
template <typename T>
void instance_norm_backward(const Tensor<T>& x, const Tensor<T>& dy, Tensor<T>& dx, T eps);

}  // namespace xgan::kernels
