// tests/test_kernels.cpp
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
// Parity between the OpenMP kernels and the serial reference across
// randomized geometry, forward and backward.

#include <vector>

#include "doctest.h"
#include "test_util.hpp"
#include "voxsep/kernels.hpp"
#include "voxsep/rng.hpp"

using namespace voxsep;
using ad::Tensor;
using vtest::random_tensor;

namespace {

kern::Conv2dDims random_dims(std::mt19937_64& rng) {
  kern::Conv2dDims d;
  d.n = 1 + static_cast<int64_t>(uniform_index(rng, 2));
  d.cin = 1 + static_cast<int64_t>(uniform_index(rng, 4));
  d.cout = 1 + static_cast<int64_t>(uniform_index(rng, 4));
  d.kh = 1 + static_cast<int64_t>(uniform_index(rng, 5));
  d.kw = 1 + static_cast<int64_t>(uniform_index(rng, 5));
  d.stride = 1 + static_cast<int64_t>(uniform_index(rng, 2));
  d.pad = static_cast<int64_t>(uniform_index(rng, 3));
  // input large enough for the kernel under this padding
  const int64_t min_h = std::max<int64_t>(1, d.kh - 2 * d.pad);
  const int64_t min_w = std::max<int64_t>(1, d.kw - 2 * d.pad);
  d.h = min_h + static_cast<int64_t>(uniform_index(rng, 8));
  d.w = min_w + static_cast<int64_t>(uniform_index(rng, 8));
  return d;
}

}  // namespace

TEST_CASE("conv2d forward: parallel kernel equals naive reference on 50 random cases") {
  std::mt19937_64 rng = make_stream(31, 1);
  for (int iter = 0; iter < 50; ++iter) {
    const kern::Conv2dDims d = random_dims(rng);
    Tensor x = random_tensor({d.n, d.cin, d.h, d.w}, rng);
    Tensor k = random_tensor({d.cout, d.cin, d.kh, d.kw}, rng);
    Tensor b = random_tensor({d.cout}, rng);
    Tensor got({d.n, d.cout, d.out_h(), d.out_w()});
    Tensor want = got;
    kern::conv2d_forward(x.data(), k.data(), b.data(), got.data(), d);
    kern::serial::conv2d_forward(x.data(), k.data(), b.data(), want.data(), d);
    CHECK(vtest::max_abs_diff(got, want) < 1e-12);
  }
}

TEST_CASE("conv2d backward: parallel kernels equal the naive scatter reference") {
  std::mt19937_64 rng = make_stream(32, 1);
  for (int iter = 0; iter < 20; ++iter) {
    const kern::Conv2dDims d = random_dims(rng);
    Tensor x = random_tensor({d.n, d.cin, d.h, d.w}, rng);
    Tensor k = random_tensor({d.cout, d.cin, d.kh, d.kw}, rng);
    Tensor gy = random_tensor({d.n, d.cout, d.out_h(), d.out_w()}, rng);

    Tensor gx({d.n, d.cin, d.h, d.w}), gk({d.cout, d.cin, d.kh, d.kw}), gb({d.cout});
    kern::conv2d_backward_input(gy.data(), k.data(), gx.data(), d);
    kern::conv2d_backward_kernel(gy.data(), x.data(), gk.data(), d);
    kern::conv2d_backward_bias(gy.data(), gb.data(), d);

    Tensor rx({d.n, d.cin, d.h, d.w}), rk({d.cout, d.cin, d.kh, d.kw}), rb({d.cout});
    kern::serial::conv2d_backward(gy.data(), x.data(), k.data(), rx.data(), rk.data(), rb.data(),
                                  d);
    CHECK(vtest::max_abs_diff(gx, rx) < 1e-12);
    CHECK(vtest::max_abs_diff(gk, rk) < 1e-12);
    CHECK(vtest::max_abs_diff(gb, rb) < 1e-12);
  }
}

TEST_CASE("instance_norm forward parity with serial reference") {
  std::mt19937_64 rng = make_stream(33, 1);
  const int64_t n = 2, c = 3, h = 5, w = 4;
  Tensor x = random_tensor({n, c, h, w}, rng);
  Tensor gain = random_tensor({c}, rng, 0.5, 1.5);
  Tensor shift = random_tensor({c}, rng);
  Tensor got({n, c, h, w}), want({n, c, h, w});
  std::vector<double> mean(n * c), inv_std(n * c);
  kern::instance_norm_forward(x.data(), gain.data(), shift.data(), got.data(), mean.data(),
                              inv_std.data(), n, c, h * w, 1e-5);
  kern::serial::instance_norm_forward(x.data(), gain.data(), shift.data(), want.data(), n, c,
                                      h * w, 1e-5);
  CHECK(vtest::max_abs_diff(got, want) < 1e-12);
}
