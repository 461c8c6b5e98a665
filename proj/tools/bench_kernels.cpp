// tools/bench_kernels.cpp
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
// Times the OpenMP kernels against the serial reference on representative
// layer shapes. Run with OMP_NUM_THREADS set to taste.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <vector>

#include "voxsep/kernels.hpp"
#include "voxsep/rng.hpp"

using namespace voxsep;
using Clock = std::chrono::steady_clock;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warm-up
  const auto t0 = Clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto t1 = Clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

std::vector<double> randv(size_t n, std::mt19937_64& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = 2.0 * uniform_double(rng) - 1.0;
  return v;
}

}  // namespace

int main() {
  std::mt19937_64 rng = make_stream(1234, 0);

  struct Shape {
    const char* label;
    kern::Conv2dDims d;
    int reps;
  };
  const Shape shapes[] = {
      {"toy residual 3x3 32ch 8x8", {1, 32, 8, 8, 32, 3, 3, 1, 1}, 200},
      {"toy upsample 5x5 16->32ch 32x32", {1, 16, 32, 32, 32, 5, 5, 1, 2}, 50},
      {"mid 3x3 64ch 64x64", {1, 64, 64, 64, 64, 3, 3, 1, 1}, 5},
      {"default encoder 4x4/s2 128->256 128x128", {1, 128, 128, 128, 256, 4, 4, 2, 1}, 2},
  };

  std::printf("%-42s %12s %12s %8s\n", "conv2d forward", "serial (ms)", "omp (ms)", "speedup");
  for (const Shape& s : shapes) {
    const auto& d = s.d;
    std::vector<double> x = randv(static_cast<size_t>(d.n * d.cin * d.h * d.w), rng);
    std::vector<double> k = randv(static_cast<size_t>(d.cout * d.cin * d.kh * d.kw), rng);
    std::vector<double> b = randv(static_cast<size_t>(d.cout), rng);
    std::vector<double> y(static_cast<size_t>(d.n * d.cout * d.out_h() * d.out_w()));
    const double t_serial =
        time_ms([&] { kern::serial::conv2d_forward(x.data(), k.data(), b.data(), y.data(), d); },
                s.reps);
    const double t_omp =
        time_ms([&] { kern::conv2d_forward(x.data(), k.data(), b.data(), y.data(), d); }, s.reps);
    std::printf("%-42s %12.3f %12.3f %7.2fx\n", s.label, t_serial, t_omp, t_serial / t_omp);
  }

  std::printf("\n%-42s %12s %12s %8s\n", "conv2d backward (input+kernel+bias)", "serial (ms)",
              "omp (ms)", "speedup");
  for (const Shape& s : shapes) {
    const auto& d = s.d;
    std::vector<double> x = randv(static_cast<size_t>(d.n * d.cin * d.h * d.w), rng);
    std::vector<double> k = randv(static_cast<size_t>(d.cout * d.cin * d.kh * d.kw), rng);
    std::vector<double> gy(static_cast<size_t>(d.n * d.cout * d.out_h() * d.out_w()), 0.5);
    std::vector<double> gx(x.size()), gk(k.size()), gb(static_cast<size_t>(d.cout));
    const double t_serial = time_ms(
        [&] {
          std::fill(gx.begin(), gx.end(), 0.0);
          std::fill(gk.begin(), gk.end(), 0.0);
          std::fill(gb.begin(), gb.end(), 0.0);
          kern::serial::conv2d_backward(gy.data(), x.data(), k.data(), gx.data(), gk.data(),
                                        gb.data(), d);
        },
        s.reps);
    const double t_omp = time_ms(
        [&] {
          std::fill(gx.begin(), gx.end(), 0.0);
          std::fill(gk.begin(), gk.end(), 0.0);
          std::fill(gb.begin(), gb.end(), 0.0);
          kern::conv2d_backward_input(gy.data(), k.data(), gx.data(), d);
          kern::conv2d_backward_kernel(gy.data(), x.data(), gk.data(), d);
          kern::conv2d_backward_bias(gy.data(), gb.data(), d);
        },
        s.reps);
    std::printf("%-42s %12.3f %12.3f %7.2fx\n", s.label, t_serial, t_omp, t_serial / t_omp);
  }

  std::printf("\n%-42s %12s %12s %8s\n", "instance_norm forward", "serial (ms)", "omp (ms)",
              "speedup");
  {
    const int64_t n = 1, c = 64, h = 64, w = 64;
    std::vector<double> x = randv(static_cast<size_t>(n * c * h * w), rng);
    std::vector<double> gain(static_cast<size_t>(c), 1.0), shift(static_cast<size_t>(c), 0.0);
    std::vector<double> y(x.size()), mean(static_cast<size_t>(n * c)),
        inv_std(static_cast<size_t>(n * c));
    const double t_serial = time_ms(
        [&] {
          kern::serial::instance_norm_forward(x.data(), gain.data(), shift.data(), y.data(), n, c,
                                              h * w, 1e-5);
        },
        100);
    const double t_omp = time_ms(
        [&] {
          kern::instance_norm_forward(x.data(), gain.data(), shift.data(), y.data(), mean.data(),
                                      inv_std.data(), n, c, h * w, 1e-5);
        },
        100);
    std::printf("%-42s %12.3f %12.3f %7.2fx\n", "64ch 64x64", t_serial, t_omp, t_serial / t_omp);
  }
  return 0;
}
