// src/resample.cpp
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

#include "voxsep/resample.hpp"

#include <cmath>

#include "voxsep/error.hpp"

namespace voxsep::dsp {

namespace {

constexpr int kHalfTaps = 32;  // 64 taps per output phase
constexpr double kKaiserBeta = 8.6;

// Modified Bessel function of the first kind, order zero (power series).
double bessel_i0(double x) {
  double sum = 1.0, term = 1.0;
  const double q = x * x / 4.0;
  for (int k = 1; k < 64; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

double kaiser(double frac, double beta) {  // frac in [-1, 1]
  const double a = 1.0 - frac * frac;
  if (a <= 0.0) return 0.0;
  return bessel_i0(beta * std::sqrt(a)) / bessel_i0(beta);
}

double sinc(double x) {
  if (std::fabs(x) < 1e-12) return 1.0;
  const double px = M_PI * x;
  return std::sin(px) / px;
}

}  // namespace

AudioClip resample(const AudioClip& audio, double target_rate) {
  if (target_rate <= 0) throw ContractError("resample: target rate must be positive");
  if (audio.sample_rate <= 0) throw ContractError("resample: source rate must be positive");
  if (audio.sample_rate == target_rate) return audio;

  AudioClip out;
  out.sample_rate = target_rate;
  if (audio.samples.empty()) return out;

  const double ratio = target_rate / audio.sample_rate;
  const double cutoff = std::min(1.0, ratio);  // relative to source Nyquist
  const int64_t src_len = audio.length();
  const int64_t out_len = static_cast<int64_t>(std::llround(src_len * ratio));
  out.samples.resize(static_cast<size_t>(out_len));

  const double* src = audio.samples.data();
  double* dst = out.samples.data();

#pragma omp parallel for
  for (int64_t n = 0; n < out_len; ++n) {
    const double t = static_cast<double>(n) / ratio;  // position in source samples
    const int64_t m0 = static_cast<int64_t>(std::floor(t)) - (kHalfTaps - 1);
    double acc = 0.0, wsum = 0.0;
    for (int64_t m = m0; m < m0 + 2 * kHalfTaps; ++m) {
      const double dt = t - static_cast<double>(m);
      const double w = cutoff * sinc(cutoff * dt) * kaiser(dt / kHalfTaps, kKaiserBeta);
      wsum += w;
      if (m >= 0 && m < src_len) acc += w * src[m];
    }
    dst[n] = wsum != 0.0 ? acc / wsum : 0.0;
  }
  return out;
}

}  // namespace voxsep::dsp
