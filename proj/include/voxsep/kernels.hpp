// include/voxsep/kernels.hpp
//
// Copyright 2026 The voxsep authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// This code is provided *as is*, without warranties or conditions of any kind.
//
// Dense NCHW kernels. Two implementations share these signatures:
//  - voxsep::kern::*        OpenMP-parallel versions used by the autodiff ops.
//                           Work is split over independent output regions only,
//                           so results do not depend on the thread count.
//  - voxsep::kern::serial:: naive reference versions written directly from the
//                           operator definitions. They stay in the tree as the
//                           oracle for the parallel kernels and as the baseline
//                           for the kernel benchmark.

#ifndef VOXSEP_KERNELS_HPP
#define VOXSEP_KERNELS_HPP

#include <cstdint>

namespace voxsep::kern {

// 2-D cross-correlation with zero padding, NCHW input, [Cout,Cin,kh,kw] kernel.
struct Conv2dDims {
  int64_t n = 0, cin = 0, h = 0, w = 0;
  int64_t cout = 0, kh = 0, kw = 0;
  int64_t stride = 1, pad = 0;

  int64_t out_h() const { return (h + 2 * pad - kh) / stride + 1; }
  int64_t out_w() const { return (w + 2 * pad - kw) / stride + 1; }
  void validate() const;  // throws ShapeError/ContractError on bad geometry
};

void conv2d_forward(const double* x, const double* k, const double* bias, double* y,
                    const Conv2dDims& d);
void conv2d_backward_input(const double* gy, const double* k, double* gx, const Conv2dDims& d);
void conv2d_backward_kernel(const double* gy, const double* x, double* gk, const Conv2dDims& d);
void conv2d_backward_bias(const double* gy, double* gb, const Conv2dDims& d);

// Per-(n,c)-plane normalization with learned per-channel gain/shift.
// mean/inv_std are [n*c] scratch outputs reused by the backward pass.
void instance_norm_forward(const double* x, const double* gain, const double* shift, double* y,
                           double* mean, double* inv_std, int64_t n, int64_t c, int64_t hw,
                           double eps);
void instance_norm_backward(const double* gy, const double* x, const double* gain,
                            const double* mean, const double* inv_std, double* gx, double* ggain,
                            double* gshift, int64_t n, int64_t c, int64_t hw);

// Nearest-neighbor 2x upsampling and 2x2/stride-2 average pooling (NCHW).
void upsample2x_forward(const double* x, double* y, int64_t nc, int64_t h, int64_t w);
void upsample2x_backward(const double* gy, double* gx, int64_t nc, int64_t h, int64_t w);
void avgpool2x_forward(const double* x, double* y, int64_t nc, int64_t h, int64_t w);
void avgpool2x_backward(const double* gy, double* gx, int64_t nc, int64_t h, int64_t w);

namespace serial {

void conv2d_forward(const double* x, const double* k, const double* bias, double* y,
                    const Conv2dDims& d);
// Single scatter pass mirroring the forward definition; any of gx/gk/gb may be null.
void conv2d_backward(const double* gy, const double* x, const double* k, double* gx, double* gk,
                     double* gb, const Conv2dDims& d);
void instance_norm_forward(const double* x, const double* gain, const double* shift, double* y,
                           int64_t n, int64_t c, int64_t hw, double eps);

}  // namespace serial

}  // namespace voxsep::kern

#endif  // VOXSEP_KERNELS_HPP
