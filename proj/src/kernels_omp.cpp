// src/kernels_omp.cpp
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
// OpenMP kernels. Every parallel loop runs over disjoint output regions (an
// output channel, an input plane, a kernel slice), and per-element accumulation
// order is fixed, so results are identical for any OMP_NUM_THREADS.

#include <cmath>
#include <cstring>
#include <vector>

#include "voxsep/error.hpp"
#include "voxsep/kernels.hpp"

namespace voxsep::kern {

namespace {

// Zero-padded copy of one input plane; removes bounds checks from inner loops.
void pad_plane(const double* src, double* dst, int64_t h, int64_t w, int64_t pad) {
  const int64_t pw = w + 2 * pad;
  std::memset(dst, 0, sizeof(double) * static_cast<size_t>((h + 2 * pad) * pw));
  for (int64_t i = 0; i < h; ++i)
    std::memcpy(dst + (i + pad) * pw + pad, src + i * w, sizeof(double) * static_cast<size_t>(w));
}

}  // namespace

void conv2d_forward(const double* x, const double* k, const double* bias, double* y,
                    const Conv2dDims& d) {
  d.validate();
  const int64_t oh = d.out_h(), ow = d.out_w();
  const int64_t ph = d.h + 2 * d.pad, pw = d.w + 2 * d.pad;
  // Shared padded input; each (n,ci) plane written by exactly one iteration.
  std::vector<double> xpad(static_cast<size_t>(d.n * d.cin * ph * pw));
#pragma omp parallel
  {
#pragma omp for collapse(2)
    for (int64_t in = 0; in < d.n; ++in)
      for (int64_t ci = 0; ci < d.cin; ++ci)
        pad_plane(x + (in * d.cin + ci) * d.h * d.w, xpad.data() + (in * d.cin + ci) * ph * pw,
                  d.h, d.w, d.pad);

#pragma omp for collapse(2)
    for (int64_t in = 0; in < d.n; ++in)
      for (int64_t co = 0; co < d.cout; ++co) {
        double* yp = y + (in * d.cout + co) * oh * ow;
        const double b = bias ? bias[co] : 0.0;
        for (int64_t i = 0; i < oh * ow; ++i) yp[i] = b;
        for (int64_t ci = 0; ci < d.cin; ++ci) {
          const double* plane = xpad.data() + (in * d.cin + ci) * ph * pw;
          for (int64_t r = 0; r < d.kh; ++r)
            for (int64_t s = 0; s < d.kw; ++s) {
              const double kv = k[((co * d.cin + ci) * d.kh + r) * d.kw + s];
              if (kv == 0.0) continue;
              for (int64_t i = 0; i < oh; ++i) {
                const double* row = plane + (i * d.stride + r) * pw + s;
                double* yrow = yp + i * ow;
                for (int64_t j = 0; j < ow; ++j) yrow[j] += kv * row[j * d.stride];
              }
            }
        }
      }
  }
}

void conv2d_backward_input(const double* gy, const double* k, double* gx, const Conv2dDims& d) {
  const int64_t oh = d.out_h(), ow = d.out_w();
  const int64_t ph = d.h + 2 * d.pad, pw = d.w + 2 * d.pad;
  std::vector<double> gpad(static_cast<size_t>(d.n * d.cin * ph * pw), 0.0);
  // Scatter into padded planes; each (n,ci) plane owned by one thread.
#pragma omp parallel for collapse(2)
  for (int64_t in = 0; in < d.n; ++in)
    for (int64_t ci = 0; ci < d.cin; ++ci) {
      double* plane = gpad.data() + (in * d.cin + ci) * ph * pw;
      for (int64_t co = 0; co < d.cout; ++co) {
        const double* gp = gy + (in * d.cout + co) * oh * ow;
        for (int64_t r = 0; r < d.kh; ++r)
          for (int64_t s = 0; s < d.kw; ++s) {
            const double kv = k[((co * d.cin + ci) * d.kh + r) * d.kw + s];
            if (kv == 0.0) continue;
            for (int64_t i = 0; i < oh; ++i) {
              double* row = plane + (i * d.stride + r) * pw + s;
              const double* grow = gp + i * ow;
              for (int64_t j = 0; j < ow; ++j) row[j * d.stride] += kv * grow[j];
            }
          }
      }
      double* out = gx + (in * d.cin + ci) * d.h * d.w;
      for (int64_t i = 0; i < d.h; ++i)
        for (int64_t j = 0; j < d.w; ++j) out[i * d.w + j] += plane[(i + d.pad) * pw + (j + d.pad)];
    }
}

void conv2d_backward_kernel(const double* gy, const double* x, double* gk, const Conv2dDims& d) {
  const int64_t oh = d.out_h(), ow = d.out_w();
  const int64_t ph = d.h + 2 * d.pad, pw = d.w + 2 * d.pad;
  std::vector<double> xpad(static_cast<size_t>(d.n * d.cin * ph * pw));
  for (int64_t in = 0; in < d.n; ++in)
    for (int64_t ci = 0; ci < d.cin; ++ci)
      pad_plane(x + (in * d.cin + ci) * d.h * d.w, xpad.data() + (in * d.cin + ci) * ph * pw, d.h,
                d.w, d.pad);
  // Each (co,ci) kernel slice owned by one thread.
#pragma omp parallel for collapse(2)
  for (int64_t co = 0; co < d.cout; ++co)
    for (int64_t ci = 0; ci < d.cin; ++ci)
      for (int64_t r = 0; r < d.kh; ++r)
        for (int64_t s = 0; s < d.kw; ++s) {
          double acc = 0.0;
          for (int64_t in = 0; in < d.n; ++in) {
            const double* plane = xpad.data() + (in * d.cin + ci) * ph * pw;
            const double* gp = gy + (in * d.cout + co) * oh * ow;
            for (int64_t i = 0; i < oh; ++i) {
              const double* row = plane + (i * d.stride + r) * pw + s;
              const double* grow = gp + i * ow;
              for (int64_t j = 0; j < ow; ++j) acc += grow[j] * row[j * d.stride];
            }
          }
          gk[((co * d.cin + ci) * d.kh + r) * d.kw + s] += acc;
        }
}

void conv2d_backward_bias(const double* gy, double* gb, const Conv2dDims& d) {
  const int64_t oh = d.out_h(), ow = d.out_w();
#pragma omp parallel for
  for (int64_t co = 0; co < d.cout; ++co) {
    double acc = 0.0;
    for (int64_t in = 0; in < d.n; ++in) {
      const double* gp = gy + (in * d.cout + co) * oh * ow;
      for (int64_t i = 0; i < oh * ow; ++i) acc += gp[i];
    }
    gb[co] += acc;
  }
}

void instance_norm_forward(const double* x, const double* gain, const double* shift, double* y,
                           double* mean, double* inv_std, int64_t n, int64_t c, int64_t hw,
                           double eps) {
  if (hw < 2) throw ContractError("instance_norm: plane has " + std::to_string(hw) +
                                  " elements, statistics are degenerate (need >= 2)");
#pragma omp parallel for collapse(2)
  for (int64_t in = 0; in < n; ++in)
    for (int64_t ic = 0; ic < c; ++ic) {
      const int64_t p = in * c + ic;
      const double* xp = x + p * hw;
      double* yp = y + p * hw;
      double m = 0.0;
      for (int64_t i = 0; i < hw; ++i) m += xp[i];
      m /= static_cast<double>(hw);
      double var = 0.0;
      for (int64_t i = 0; i < hw; ++i) var += (xp[i] - m) * (xp[i] - m);
      var /= static_cast<double>(hw);
      const double is = 1.0 / std::sqrt(var + eps);
      mean[p] = m;
      inv_std[p] = is;
      const double g = gain[ic], sh = shift[ic];
      for (int64_t i = 0; i < hw; ++i) yp[i] = g * (xp[i] - m) * is + sh;
    }
}

void instance_norm_backward(const double* gy, const double* x, const double* gain,
                            const double* mean, const double* inv_std, double* gx, double* ggain,
                            double* gshift, int64_t n, int64_t c, int64_t hw) {
  const double inv_hw = 1.0 / static_cast<double>(hw);
  // gain/shift gradients: one channel per thread, plane-major accumulation.
#pragma omp parallel for
  for (int64_t ic = 0; ic < c; ++ic) {
    double gg = 0.0, gs = 0.0;
    for (int64_t in = 0; in < n; ++in) {
      const int64_t p = in * c + ic;
      const double* gp = gy + p * hw;
      const double* xp = x + p * hw;
      for (int64_t i = 0; i < hw; ++i) {
        gg += gp[i] * (xp[i] - mean[p]) * inv_std[p];
        gs += gp[i];
      }
    }
    ggain[ic] += gg;
    gshift[ic] += gs;
  }
#pragma omp parallel for collapse(2)
  for (int64_t in = 0; in < n; ++in)
    for (int64_t ic = 0; ic < c; ++ic) {
      const int64_t p = in * c + ic;
      const double* gp = gy + p * hw;
      const double* xp = x + p * hw;
      double* gxp = gx + p * hw;
      double sum_g = 0.0, sum_gx = 0.0;
      for (int64_t i = 0; i < hw; ++i) {
        const double xhat = (xp[i] - mean[p]) * inv_std[p];
        sum_g += gp[i];
        sum_gx += gp[i] * xhat;
      }
      const double a = gain[ic] * inv_std[p];
      const double mg = sum_g * inv_hw, mgx = sum_gx * inv_hw;
      for (int64_t i = 0; i < hw; ++i) {
        const double xhat = (xp[i] - mean[p]) * inv_std[p];
        gxp[i] += a * (gp[i] - mg - xhat * mgx);
      }
    }
}

void upsample2x_forward(const double* x, double* y, int64_t nc, int64_t h, int64_t w) {
#pragma omp parallel for
  for (int64_t p = 0; p < nc; ++p) {
    const double* xp = x + p * h * w;
    double* yp = y + p * 4 * h * w;
    for (int64_t i = 0; i < 2 * h; ++i)
      for (int64_t j = 0; j < 2 * w; ++j) yp[i * 2 * w + j] = xp[(i / 2) * w + (j / 2)];
  }
}

void upsample2x_backward(const double* gy, double* gx, int64_t nc, int64_t h, int64_t w) {
#pragma omp parallel for
  for (int64_t p = 0; p < nc; ++p) {
    const double* gp = gy + p * 4 * h * w;
    double* gxp = gx + p * h * w;
    for (int64_t i = 0; i < 2 * h; ++i)
      for (int64_t j = 0; j < 2 * w; ++j) gxp[(i / 2) * w + (j / 2)] += gp[i * 2 * w + j];
  }
}

void avgpool2x_forward(const double* x, double* y, int64_t nc, int64_t h, int64_t w) {
  if (h % 2 != 0 || w % 2 != 0)
    throw ShapeError("avgpool2x: spatial dims must be even, got " + std::to_string(h) + "x" +
                     std::to_string(w));
  const int64_t oh = h / 2, ow = w / 2;
#pragma omp parallel for
  for (int64_t p = 0; p < nc; ++p) {
    const double* xp = x + p * h * w;
    double* yp = y + p * oh * ow;
    for (int64_t i = 0; i < oh; ++i)
      for (int64_t j = 0; j < ow; ++j)
        yp[i * ow + j] = 0.25 * (xp[(2 * i) * w + 2 * j] + xp[(2 * i) * w + 2 * j + 1] +
                                 xp[(2 * i + 1) * w + 2 * j] + xp[(2 * i + 1) * w + 2 * j + 1]);
  }
}

void avgpool2x_backward(const double* gy, double* gx, int64_t nc, int64_t h, int64_t w) {
  const int64_t oh = h / 2, ow = w / 2;
#pragma omp parallel for
  for (int64_t p = 0; p < nc; ++p) {
    const double* gp = gy + p * oh * ow;
    double* gxp = gx + p * h * w;
    for (int64_t i = 0; i < oh; ++i)
      for (int64_t j = 0; j < ow; ++j) {
        const double g = 0.25 * gp[i * ow + j];
        gxp[(2 * i) * w + 2 * j] += g;
        gxp[(2 * i) * w + 2 * j + 1] += g;
        gxp[(2 * i + 1) * w + 2 * j] += g;
        gxp[(2 * i + 1) * w + 2 * j + 1] += g;
      }
  }
}

}  // namespace voxsep::kern
