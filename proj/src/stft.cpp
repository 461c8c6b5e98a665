// src/stft.cpp
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

#include "voxsep/stft.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "voxsep/error.hpp"

namespace voxsep::dsp {

namespace {
constexpr double kOlaFloor = 1e-12;

bool is_pow2(int64_t n) { return n > 0 && (n & (n - 1)) == 0; }
}  // namespace

void StftConfig::validate() const {
  if (!is_pow2(fft_size)) throw ContractError("fft_size must be a power of two, got " + std::to_string(fft_size));
  if (hop <= 0 || hop > fft_size)
    throw ContractError("hop must satisfy 0 < hop <= fft_size, got " + std::to_string(hop));
  if (frames < 1) throw ContractError("frames must be >= 1, got " + std::to_string(frames));
  if (compression_p <= 0.0 || compression_p > 1.0)
    throw ContractError("compression exponent must be in (0,1], got " + std::to_string(compression_p));
  if (sample_rate <= 0) throw ContractError("sample rate must be positive");
}

void fft(std::vector<std::complex<double>>& a, bool inverse) {
  const size_t n = a.size();
  if (!is_pow2(static_cast<int64_t>(n))) throw ContractError("fft: size must be a power of two");
  // bit-reversal permutation
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse) {
    const double inv_n = 1.0 / static_cast<double>(n);
    for (auto& v : a) v *= inv_n;
  }
}

std::vector<double> hann_window(int64_t n) {
  std::vector<double> w(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i)
    w[static_cast<size_t>(i)] =
        0.5 - 0.5 * std::cos(2.0 * M_PI * (static_cast<double>(i) + 0.5) / static_cast<double>(n));
  return w;
}

std::vector<Segment> segment(const AudioClip& audio, const StftConfig& cfg) {
  cfg.validate();
  const int64_t clip_len = cfg.clip_samples();
  std::vector<Segment> out;
  const int64_t total = audio.length();
  if (total == 0) return out;
  for (int64_t start = 0; start < total; start += clip_len) {
    Segment seg;
    seg.clip.sample_rate = audio.sample_rate;
    seg.clip.samples.assign(static_cast<size_t>(clip_len), 0.0);
    const int64_t avail = std::min(clip_len, total - start);
    std::copy(audio.samples.begin() + start, audio.samples.begin() + start + avail,
              seg.clip.samples.begin());
    seg.true_length = avail;
    out.push_back(std::move(seg));
  }
  return out;
}

ComplexSpectrogram stft(const AudioClip& clip, const StftConfig& cfg) {
  cfg.validate();
  if (clip.length() != cfg.clip_samples())
    throw ContractError("stft: clip must have exactly " + std::to_string(cfg.clip_samples()) +
                        " samples, got " + std::to_string(clip.length()));
  const int64_t nfft = cfg.fft_size;
  const int64_t bins = cfg.spectrum_bins();
  const int64_t frames = cfg.frames;
  const std::vector<double> window = hann_window(nfft);

  ComplexSpectrogram spec;
  spec.bins = bins;
  spec.frames = frames;
  spec.values.assign(static_cast<size_t>(bins * frames), {0.0, 0.0});

#pragma omp parallel for
  for (int64_t t = 0; t < frames; ++t) {
    std::vector<std::complex<double>> buf(static_cast<size_t>(nfft));
    const double* x = clip.samples.data() + t * cfg.hop;
    for (int64_t i = 0; i < nfft; ++i)
      buf[static_cast<size_t>(i)] = {x[i] * window[static_cast<size_t>(i)], 0.0};
    fft(buf, false);
    for (int64_t b = 0; b < bins; ++b) spec.at(b, t) = buf[static_cast<size_t>(b)];
  }
  return spec;
}

CompressedFrame compress(const ComplexSpectrogram& spec, double p) {
  CompressedFrame out;
  out.magnitude.bins = spec.bins - 1;  // top bin trimmed
  out.magnitude.frames = spec.frames;
  out.magnitude.values.resize(static_cast<size_t>(out.magnitude.numel()));
  out.phase.bins = spec.bins;
  out.phase.frames = spec.frames;
  out.phase.phasors.resize(static_cast<size_t>(spec.bins * spec.frames));

  for (int64_t b = 0; b < spec.bins; ++b)
    for (int64_t t = 0; t < spec.frames; ++t) {
      const std::complex<double> v = spec.at(b, t);
      const double mag = std::abs(v);
      out.phase.phasors[static_cast<size_t>(b * spec.frames + t)] =
          mag > 0.0 ? v / mag : std::complex<double>(1.0, 0.0);
      if (b < out.magnitude.bins) out.magnitude.at(b, t) = std::pow(mag, p);
    }
  return out;
}

AudioClip reconstruct(const CompressedMagnitude& est, const PhaseGrid& mixture_phase,
                      const StftConfig& cfg, int64_t true_length) {
  cfg.validate();
  if (est.bins != cfg.model_bins() || est.frames != cfg.frames)
    throw ShapeError("reconstruct: estimate grid " + std::to_string(est.bins) + "x" +
                     std::to_string(est.frames) + " does not match config " +
                     std::to_string(cfg.model_bins()) + "x" + std::to_string(cfg.frames));
  if (mixture_phase.bins != cfg.spectrum_bins() || mixture_phase.frames != cfg.frames)
    throw ShapeError("reconstruct: phase grid does not match config");
  if (true_length < 0 || true_length > cfg.clip_samples())
    throw ContractError("reconstruct: true_length out of range");

  const int64_t nfft = cfg.fft_size;
  const int64_t bins = cfg.spectrum_bins();
  const int64_t frames = cfg.frames;
  const int64_t clip_len = cfg.clip_samples();
  const std::vector<double> window = hann_window(nfft);
  const double inv_p = 1.0 / cfg.compression_p;

  std::vector<double> num(static_cast<size_t>(clip_len), 0.0);
  std::vector<double> den(static_cast<size_t>(clip_len), 0.0);

  for (int64_t t = 0; t < frames; ++t) {
    std::vector<std::complex<double>> buf(static_cast<size_t>(nfft), {0.0, 0.0});
    for (int64_t b = 0; b < bins; ++b) {
      // top bin (b == bins-1) restored as zero
      const double mag = b < est.bins ? std::pow(std::max(0.0, est.at(b, t)), inv_p) : 0.0;
      const std::complex<double> v =
          mag * mixture_phase.phasors[static_cast<size_t>(b * frames + t)];
      buf[static_cast<size_t>(b)] = v;
      if (b > 0 && b < nfft - b) buf[static_cast<size_t>(nfft - b)] = std::conj(v);
    }
    fft(buf, true);
    double* n = num.data() + t * cfg.hop;
    double* d = den.data() + t * cfg.hop;
    for (int64_t i = 0; i < nfft; ++i) {
      const double w = window[static_cast<size_t>(i)];
      n[i] += w * buf[static_cast<size_t>(i)].real();
      d[i] += w * w;
    }
  }

  AudioClip out;
  out.sample_rate = cfg.sample_rate;
  out.samples.resize(static_cast<size_t>(true_length));
  for (int64_t i = 0; i < true_length; ++i)
    out.samples[static_cast<size_t>(i)] =
        num[static_cast<size_t>(i)] / std::max(den[static_cast<size_t>(i)], kOlaFloor);
  return out;
}

AudioClip concatenate_track(const std::vector<AudioClip>& clips) {
  AudioClip out;
  if (clips.empty()) return out;
  out.sample_rate = clips.front().sample_rate;
  size_t total = 0;
  for (const AudioClip& c : clips) {
    if (c.sample_rate != out.sample_rate)
      throw ContractError("concatenate_track: sample rate mismatch (" +
                          std::to_string(c.sample_rate) + " vs " +
                          std::to_string(out.sample_rate) + ")");
    total += c.samples.size();
  }
  out.samples.reserve(total);
  for (const AudioClip& c : clips)
    out.samples.insert(out.samples.end(), c.samples.begin(), c.samples.end());
  return out;
}

}  // namespace voxsep::dsp
