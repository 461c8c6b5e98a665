// src/kernels_serial.cpp
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
// Reference kernels, written straight from the definitions with no blocking,
// no padding buffers and no threading. Tests hold the parallel kernels to
// these within 1e-12.

#include <cmath>
#include <string>

#include "voxsep/error.hpp"
#include "voxsep/kernels.hpp"

namespace voxsep::kern {

void Conv2dDims::validate() const {
  if (n < 1 || cin < 1 || h < 1 || w < 1 || cout < 1 || kh < 1 || kw < 1)
    throw ShapeError("conv2d: empty dimension (n=" + std::to_string(n) + " cin=" +
                     std::to_string(cin) + " h=" + std::to_string(h) + " w=" + std::to_string(w) +
                     " cout=" + std::to_string(cout) + " kh=" + std::to_string(kh) +
                     " kw=" + std::to_string(kw) + ")");
  if (stride < 1) throw ContractError("conv2d: stride must be positive, got " + std::to_string(stride));
  if (pad < 0) throw ContractError("conv2d: padding must be non-negative, got " + std::to_string(pad));
  if (kh > h + 2 * pad || kw > w + 2 * pad)
    throw ShapeError("conv2d: kernel " + std::to_string(kh) + "x" + std::to_string(kw) +
                     " exceeds padded input " + std::to_string(h + 2 * pad) + "x" +
                     std::to_string(w + 2 * pad));
}

namespace serial {

void conv2d_forward(const double* x, const double* k, const double* bias, double* y,
                    const Conv2dDims& d) {
  d.validate();
  const int64_t oh = d.out_h(), ow = d.out_w();
  for (int64_t in = 0; in < d.n; ++in)
    for (int64_t co = 0; co < d.cout; ++co)
      for (int64_t i = 0; i < oh; ++i)
        for (int64_t j = 0; j < ow; ++j) {
          double acc = bias ? bias[co] : 0.0;
          for (int64_t ci = 0; ci < d.cin; ++ci)
            for (int64_t r = 0; r < d.kh; ++r)
              for (int64_t s = 0; s < d.kw; ++s) {
                const int64_t ih = i * d.stride + r - d.pad;
                const int64_t iw = j * d.stride + s - d.pad;
                if (ih < 0 || ih >= d.h || iw < 0 || iw >= d.w) continue;
                acc += x[((in * d.cin + ci) * d.h + ih) * d.w + iw] *
                       k[((co * d.cin + ci) * d.kh + r) * d.kw + s];
              }
          y[((in * d.cout + co) * oh + i) * ow + j] = acc;
        }
}

void conv2d_backward(const double* gy, const double* x, const double* k, double* gx, double* gk,
                     double* gb, const Conv2dDims& d) {
  d.validate();
  const int64_t oh = d.out_h(), ow = d.out_w();
  for (int64_t in = 0; in < d.n; ++in)
    for (int64_t co = 0; co < d.cout; ++co)
      for (int64_t i = 0; i < oh; ++i)
        for (int64_t j = 0; j < ow; ++j) {
          const double g = gy[((in * d.cout + co) * oh + i) * ow + j];
          if (gb) gb[co] += g;
          for (int64_t ci = 0; ci < d.cin; ++ci)
            for (int64_t r = 0; r < d.kh; ++r)
              for (int64_t s = 0; s < d.kw; ++s) {
                const int64_t ih = i * d.stride + r - d.pad;
                const int64_t iw = j * d.stride + s - d.pad;
                if (ih < 0 || ih >= d.h || iw < 0 || iw >= d.w) continue;
                const int64_t xi = ((in * d.cin + ci) * d.h + ih) * d.w + iw;
                const int64_t ki = ((co * d.cin + ci) * d.kh + r) * d.kw + s;
                if (gx) gx[xi] += g * k[ki];
                if (gk) gk[ki] += g * x[xi];
              }
        }
}

void instance_norm_forward(const double* x, const double* gain, const double* shift, double* y,
                           int64_t n, int64_t c, int64_t hw, double eps) {
  for (int64_t in = 0; in < n; ++in)
    for (int64_t ic = 0; ic < c; ++ic) {
      const double* xp = x + (in * c + ic) * hw;
      double* yp = y + (in * c + ic) * hw;
      double mean = 0.0;
      for (int64_t i = 0; i < hw; ++i) mean += xp[i];
      mean /= static_cast<double>(hw);
      double var = 0.0;
      for (int64_t i = 0; i < hw; ++i) var += (xp[i] - mean) * (xp[i] - mean);
      var /= static_cast<double>(hw);
      const double inv_std = 1.0 / std::sqrt(var + eps);
      for (int64_t i = 0; i < hw; ++i) yp[i] = gain[ic] * (xp[i] - mean) * inv_std + shift[ic];
    }
}

}  // namespace serial
}  // namespace voxsep::kern
