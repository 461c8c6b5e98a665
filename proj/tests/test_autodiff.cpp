// tests/test_autodiff.cpp
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

#include <cmath>

#include "doctest.h"
#include "test_util.hpp"
#include "voxsep/adam.hpp"
#include "voxsep/error.hpp"
#include "voxsep/kernels.hpp"
#include "voxsep/tape.hpp"

using namespace voxsep;
using ad::Tape;
using ad::Tensor;
using ad::Var;
using vtest::grad_check;
using vtest::random_tensor;

TEST_CASE("tensor shape/value count invariant") {
  CHECK_NOTHROW(Tensor({2, 3}, std::vector<double>(6, 0.0)));
  CHECK_THROWS_AS(Tensor({2, 3}, std::vector<double>(5, 0.0)), ShapeError);
}

TEST_CASE("conv2d unit square of ones") {
  Tape t;
  Var x = t.leaf(Tensor::full({1, 1, 2, 2}, 1.0), false);
  Var k = t.leaf(Tensor::full({1, 1, 2, 2}, 1.0), false);
  Var b = t.leaf(Tensor({1}), false);
  Var y = ad::conv2d(x, k, b, 1, 0);
  REQUIRE(y.value().shape() == std::vector<int64_t>{1, 1, 1, 1});
  CHECK(y.value().at(0) == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("conv2d stride-2 identity kernel subsamples even indices") {
  Tape t;
  Tensor x({1, 1, 4, 4});
  for (int64_t i = 0; i < 16; ++i) x.at(i) = static_cast<double>(i);
  Var xv = t.leaf(x, false);
  Var k = t.leaf(Tensor::full({1, 1, 1, 1}, 1.0), false);
  Var b = t.leaf(Tensor({1}), false);
  Var y = ad::conv2d(xv, k, b, 2, 0);
  REQUIRE(y.value().shape() == std::vector<int64_t>{1, 1, 2, 2});
  CHECK(y.value().at(0) == 0.0);
  CHECK(y.value().at(1) == 2.0);
  CHECK(y.value().at(2) == 8.0);
  CHECK(y.value().at(3) == 10.0);
}

TEST_CASE("conv2d matches the naive nested-loop reference") {
  std::mt19937_64 rng = make_stream(11, 1);
  struct Case {
    int64_t n, cin, h, w, cout, kh, kw, stride, pad;
  };
  const Case cases[] = {
      {1, 2, 8, 8, 3, 3, 3, 2, 1},  // the documented example geometry
      {2, 3, 7, 5, 4, 3, 2, 1, 0},
      {1, 1, 9, 9, 2, 7, 7, 1, 3},
      {1, 4, 6, 6, 2, 4, 4, 2, 1},
      {2, 2, 5, 8, 3, 5, 5, 1, 2},
  };
  for (const Case& c : cases) {
    kern::Conv2dDims d{c.n, c.cin, c.h, c.w, c.cout, c.kh, c.kw, c.stride, c.pad};
    Tensor x = random_tensor({c.n, c.cin, c.h, c.w}, rng);
    Tensor k = random_tensor({c.cout, c.cin, c.kh, c.kw}, rng);
    Tensor b = random_tensor({c.cout}, rng);
    Tensor want({c.n, c.cout, d.out_h(), d.out_w()});
    kern::serial::conv2d_forward(x.data(), k.data(), b.data(), want.data(), d);

    Tape t;
    Var y = ad::conv2d(t.leaf(x, false), t.leaf(k, false), t.leaf(b, false), c.stride, c.pad);
    CHECK(vtest::max_abs_diff(y.value(), want) < 1e-12);
  }
}

TEST_CASE("conv2d rejects mismatched shapes with the offending axes") {
  Tape t;
  Var x = t.leaf(Tensor({1, 2, 4, 4}), false);
  Var k = t.leaf(Tensor({1, 3, 3, 3}), false);
  Var b = t.leaf(Tensor({1}), false);
  CHECK_THROWS_WITH_AS(ad::conv2d(x, k, b, 1, 1),
                       doctest::Contains("input channel axis 2 != kernel channel axis 3"),
                       ShapeError);
  Var k2 = t.leaf(Tensor({1, 2, 9, 9}), false);
  CHECK_THROWS_AS(ad::conv2d(x, k2, b, 1, 0), ShapeError);
}

TEST_CASE("instance_norm trivial planes") {
  Tape t;
  Var gain = t.leaf(Tensor::full({1}, 1.0), false);
  Var shift = t.leaf(Tensor({1}), false);

  SUBCASE("constant plane maps to zeros") {
    Var x = t.leaf(Tensor::full({1, 1, 2, 2}, 5.0), false);
    Var y = ad::instance_norm(x, gain, shift, 1e-5);
    for (int64_t i = 0; i < 4; ++i) CHECK(y.value().at(i) == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("zero-mean unit-variance plane is preserved as eps -> 0") {
    Var x = t.leaf(Tensor({1, 1, 1, 2}, {-1.0, 1.0}), false);
    Var y = ad::instance_norm(x, gain, shift, 1e-14);
    CHECK(y.value().at(0) == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(y.value().at(1) == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("degenerate single-element plane is rejected") {
    Var x = t.leaf(Tensor({1, 1, 1, 1}), false);
    CHECK_THROWS_AS(ad::instance_norm(x, gain, shift, 1e-5), ContractError);
  }
}

TEST_CASE("instance_norm output statistics") {
  std::mt19937_64 rng = make_stream(12, 1);
  Tape t;
  Var x = t.leaf(random_tensor({1, 2, 4, 4}, rng, -2.0, 2.0), false);
  Var gain = t.leaf(Tensor::full({2}, 1.0), false);
  Var shift = t.leaf(Tensor({2}), false);
  Var y = ad::instance_norm(x, gain, shift, 1e-10);
  for (int64_t c = 0; c < 2; ++c) {
    double mean = 0.0;
    for (int64_t i = 0; i < 16; ++i) mean += y.value().at(c * 16 + i);
    mean /= 16.0;
    double var = 0.0;
    for (int64_t i = 0; i < 16; ++i) {
      const double d = y.value().at(c * 16 + i) - mean;
      var += d * d;
    }
    var /= 16.0;
    CHECK(std::fabs(mean) < 1e-10);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("nearest_upsample2x values and gradient") {
  Tape t;
  SUBCASE("single value becomes a 2x2 block") {
    Var x = t.leaf(Tensor::full({1, 1, 1, 1}, 7.0), false);
    Var y = ad::nearest_upsample2x(x);
    REQUIRE(y.value().numel() == 4);
    for (int64_t i = 0; i < 4; ++i) CHECK(y.value().at(i) == 7.0);
  }
  SUBCASE("2x2 grid block-replicates") {
    Var x = t.leaf(Tensor({1, 1, 2, 2}, {1, 2, 3, 4}), false);
    Var y = ad::nearest_upsample2x(x);
    const std::vector<double> want = {1, 1, 2, 2, 1, 1, 2, 2, 3, 3, 4, 4, 3, 3, 4, 4};
    for (size_t i = 0; i < want.size(); ++i) CHECK(y.value().at(static_cast<int64_t>(i)) == want[i]);
  }
  SUBCASE("gradient of sum is 4 everywhere") {
    Tape t2;
    Var x = t2.leaf(Tensor({1, 1, 2, 3}), true);
    Var loss = ad::sum(ad::nearest_upsample2x(x));
    t2.backward(loss);
    for (int64_t i = 0; i < 6; ++i) CHECK(x.grad().at(i) == 4.0);
  }
}

TEST_CASE("activations") {
  Tape t;
  Var x = t.leaf(Tensor({5}, {-10.0, -3.0, 0.0, 3.0, 10.0}), false);
  Var r = ad::relu(x);
  CHECK(r.value().at(1) == 0.0);
  CHECK(r.value().at(3) == 3.0);
  Var l = ad::leaky_relu(x, 0.2);
  CHECK(l.value().at(0) == doctest::Approx(-2.0).epsilon(1e-15));
  CHECK(l.value().at(4) == 10.0);
  Var s = ad::sigmoid(x);
  CHECK(s.value().at(2) == doctest::Approx(0.5).epsilon(1e-15));
  // strict range even at huge magnitudes
  Var big = t.leaf(Tensor({2}, {-1e12, 1e12}), false);
  Var sb = ad::sigmoid(big);
  CHECK(sb.value().at(0) > 0.0);
  CHECK(sb.value().at(1) < 1.0);
}

TEST_CASE("backward basics") {
  SUBCASE("loss = sum(x) gives all-ones gradient") {
    Tape t;
    Var x = t.leaf(Tensor({2, 3}), true);
    Var loss = ad::sum(x);
    t.backward(loss);
    for (int64_t i = 0; i < 6; ++i) CHECK(x.grad().at(i) == 1.0);
  }
  SUBCASE("loss = sum(x*x)/2 gives gradient x") {
    std::mt19937_64 rng = make_stream(13, 1);
    Tape t;
    Tensor xt = random_tensor({4, 2}, rng);
    Var x = t.leaf(xt, true);
    Var loss = ad::scale(ad::sum(ad::mul(x, x)), 0.5);
    t.backward(loss);
    for (int64_t i = 0; i < 8; ++i) CHECK(x.grad().at(i) == doctest::Approx(xt.at(i)).epsilon(1e-14));
  }
  SUBCASE("non-scalar loss is a contract error") {
    Tape t;
    Var x = t.leaf(Tensor({2}), true);
    CHECK_THROWS_AS(t.backward(x), ContractError);
  }
  SUBCASE("second backward over the same tape is an error") {
    Tape t;
    Var x = t.leaf(Tensor({3}), true);
    Var loss = ad::sum(x);
    t.backward(loss);
    CHECK_THROWS_AS(t.backward(loss), ContractError);
  }
  SUBCASE("parameters unreachable from the loss keep zero gradients") {
    Tape t;
    Var x = t.leaf(Tensor::full({3}, 2.0), true);
    Var unused = t.leaf(Tensor::full({2}, 1.0), true);
    Var loss = ad::sum(x);
    t.backward(loss);
    CHECK(unused.grad().at(0) == 0.0);
    CHECK(unused.grad().at(1) == 0.0);
  }
}

TEST_CASE("adam behaviour") {
  SUBCASE("first-step magnitude is about the learning rate") {
    std::vector<Tensor> params{Tensor::full({3}, 1.0)};
    ad::AdamState st = ad::AdamState::init(params, 0.5, 0.999, 1e-8);
    Tensor g = Tensor::full({3}, 1.0);
    ad::adam_step({&params[0]}, {&g}, st, 1e-4);
    for (int64_t i = 0; i < 3; ++i)
      CHECK(params[0].at(i) == doctest::Approx(1.0 - 1e-4).epsilon(1e-6));
  }
  SUBCASE("zero gradients leave parameters unchanged") {
    std::vector<Tensor> params{Tensor::full({4}, 0.75)};
    ad::AdamState st = ad::AdamState::init(params, 0.5, 0.999, 1e-8);
    Tensor g({4});
    for (int step = 0; step < 10; ++step) ad::adam_step({&params[0]}, {&g}, st, 1e-2);
    for (int64_t i = 0; i < 4; ++i) CHECK(params[0].at(i) == 0.75);
  }
  SUBCASE("100 steps on (w-3)^2 converge near 3") {
    std::vector<Tensor> params{Tensor({1})};
    ad::AdamState st = ad::AdamState::init(params, 0.5, 0.999, 1e-8);
    for (int step = 0; step < 100; ++step) {
      Tensor g({1}, {2.0 * (params[0].at(0) - 3.0)});
      ad::adam_step({&params[0]}, {&g}, st, 0.1);
    }
    CHECK(std::fabs(params[0].at(0) - 3.0) < 0.5);
  }
}

TEST_CASE("forward evaluation is deterministic") {
  std::mt19937_64 rng = make_stream(21, 1);
  Tensor x = random_tensor({1, 2, 6, 6}, rng);
  Tensor k = random_tensor({3, 2, 3, 3}, rng);
  Tensor b = random_tensor({3}, rng);
  auto run = [&]() {
    Tape t;
    return ad::sigmoid(ad::conv2d(t.leaf(x, false), t.leaf(k, false), t.leaf(b, false), 1, 1))
        .value();
  };
  Tensor a = run(), c = run();
  CHECK(vtest::max_abs_diff(a, c) == 0.0);
}

TEST_CASE("finite-difference checks per operation, three shapes each") {
  std::mt19937_64 rng = make_stream(14, 1);
  const double tol = 1e-4;

  SUBCASE("conv2d") {
    struct Case {
      std::vector<int64_t> x, k;
      int64_t stride, pad;
    };
    const Case cases[] = {
        {{1, 1, 5, 5}, {2, 1, 3, 3}, 1, 1},
        {{1, 2, 6, 6}, {3, 2, 4, 4}, 2, 1},
        {{2, 2, 4, 4}, {1, 2, 2, 2}, 1, 0},
    };
    for (const Case& c : cases) {
      auto res = grad_check(
          [&](Tape& t, std::vector<Var>& in) {
            return ad::sum(ad::mul(ad::conv2d(in[0], in[1], in[2], c.stride, c.pad),
                                   ad::conv2d(in[0], in[1], in[2], c.stride, c.pad)));
          },
          {random_tensor(c.x, rng), random_tensor(c.k, rng),
           random_tensor({c.k[0]}, rng)});
      CHECK(res.max_rel_err < tol);
    }
  }
  SUBCASE("instance_norm") {
    // the probe loss must weigh elements asymmetrically: symmetric functions
    // of the normalized plane are invariant in x and leave FD pure noise
    for (auto shape : {std::vector<int64_t>{1, 1, 3, 3}, {1, 2, 4, 4}, {2, 2, 2, 3}}) {
      const int64_t c = shape[1];
      const Tensor w = random_tensor(shape, rng, 0.5, 1.5);
      auto res = grad_check(
          [&](Tape& t, std::vector<Var>& in) {
            Var y = ad::instance_norm(in[0], in[1], in[2], 1e-5);
            Var yw = ad::mul(y, t.constant(w));
            return ad::add(ad::sum(ad::mul(yw, yw)), ad::sum(yw));
          },
          {random_tensor(shape, rng), random_tensor({c}, rng, 0.5, 1.5),
           random_tensor({c}, rng)});
      CHECK(res.max_rel_err < tol);
    }
  }
  SUBCASE("upsample and avgpool") {
    for (auto shape : {std::vector<int64_t>{1, 1, 2, 2}, {1, 2, 4, 4}, {2, 1, 6, 4}}) {
      auto res = grad_check(
          [&](Tape& t, std::vector<Var>& in) {
            Var u = ad::nearest_upsample2x(in[0]);
            return ad::sum(ad::mul(ad::avgpool2x(u), ad::avgpool2x(u)));
          },
          {random_tensor(shape, rng)});
      CHECK(res.max_rel_err < tol);
    }
  }
  SUBCASE("activations") {
    for (auto shape : {std::vector<int64_t>{7}, {3, 4}, {2, 2, 2, 2}}) {
      auto res = grad_check(
          [&](Tape& t, std::vector<Var>& in) {
            Var y = ad::sigmoid(in[0]);
            y = ad::add(y, ad::leaky_relu(in[0], 0.2));
            y = ad::add(y, ad::relu(in[0]));
            return ad::sum(ad::mul(y, y));
          },
          {random_tensor(shape, rng, 0.1, 2.0)});  // stay clear of the ReLU kink
      CHECK(res.max_rel_err < tol);
    }
  }
  SUBCASE("elementwise, reductions and losses") {
    for (auto shape : {std::vector<int64_t>{5}, {2, 3}, {1, 2, 3, 2}}) {
      auto res = grad_check(
          [&](Tape& t, std::vector<Var>& in) {
            Var s = ad::sub(ad::mul(in[0], in[1]), in[1]);
            Var l = ad::l1_mean(s, in[1]);
            l = ad::add(l, ad::least_squares(in[0], 0.25));
            l = ad::add(l, ad::mean(ad::pow_shifted(ad::mul(in[0], in[0]), 0.3, 1e-9)));
            return l;
          },
          {random_tensor(shape, rng, 0.2, 1.2), random_tensor(shape, rng, 1.5, 2.5)});
      CHECK(res.max_rel_err < tol);
    }
  }
}
