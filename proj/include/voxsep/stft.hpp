// include/voxsep/stft.hpp
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
// Analysis/synthesis front end. Tracks are split into fixed-length,
// non-overlapping clips; each clip maps to a (fft_size/2) x frames grid of
// power-compressed magnitudes (top bin trimmed) plus the full-resolution
// phase, and back.

#ifndef VOXSEP_STFT_HPP
#define VOXSEP_STFT_HPP

#include <complex>
#include <cstdint>
#include <vector>

#include "voxsep/audio.hpp"

namespace voxsep::dsp {

struct StftConfig {
  int64_t fft_size = 512;  // power of two
  int64_t hop = 64;
  int64_t frames = 256;  // frames per clip
  double compression_p = 0.3;
  double sample_rate = 20480.0;

  int64_t clip_samples() const { return fft_size + (frames - 1) * hop; }
  int64_t spectrum_bins() const { return fft_size / 2 + 1; }
  int64_t model_bins() const { return fft_size / 2; }  // top bin trimmed
  void validate() const;

  static StftConfig toy() {
    StftConfig c;
    c.fft_size = 64;
    c.hop = 8;
    c.frames = 32;
    return c;
  }
};

struct ComplexSpectrogram {
  int64_t bins = 0;    // fft_size/2 + 1
  int64_t frames = 0;
  std::vector<std::complex<double>> values;  // [bin][frame] row-major

  std::complex<double>& at(int64_t b, int64_t f) { return values[static_cast<size_t>(b * frames + f)]; }
  std::complex<double> at(int64_t b, int64_t f) const { return values[static_cast<size_t>(b * frames + f)]; }
};

// Power-compressed magnitude grid, top frequency bin trimmed.
struct CompressedMagnitude {
  int64_t bins = 0;  // fft_size/2
  int64_t frames = 0;
  std::vector<double> values;  // [bin][frame] row-major

  double& at(int64_t b, int64_t f) { return values[static_cast<size_t>(b * frames + f)]; }
  double at(int64_t b, int64_t f) const { return values[static_cast<size_t>(b * frames + f)]; }
  int64_t numel() const { return bins * frames; }
};

// Unit phasors of the mixture STFT at full bin resolution.
struct PhaseGrid {
  int64_t bins = 0;  // fft_size/2 + 1
  int64_t frames = 0;
  std::vector<std::complex<double>> phasors;
};

struct Segment {
  AudioClip clip;        // exactly cfg.clip_samples() long
  int64_t true_length;   // samples that came from the source (rest is padding)
};

// Non-overlapping fixed-length segmentation; the trailing remainder is
// zero-padded into a final segment.
std::vector<Segment> segment(const AudioClip& audio, const StftConfig& cfg);

// Clip must be exactly cfg.clip_samples() long; frames never cross the end.
ComplexSpectrogram stft(const AudioClip& clip, const StftConfig& cfg);

struct CompressedFrame {
  CompressedMagnitude magnitude;
  PhaseGrid phase;
};

CompressedFrame compress(const ComplexSpectrogram& spec, double p);

// Decompress by 1/p, restore the zero top bin, apply the given phase, then
// overlap-add ISTFT; output truncated to true_length.
AudioClip reconstruct(const CompressedMagnitude& est, const PhaseGrid& mixture_phase,
                      const StftConfig& cfg, int64_t true_length);

AudioClip concatenate_track(const std::vector<AudioClip>& clips);

// In-place radix-2 complex FFT (bit-reversal + butterflies); n a power of two.
void fft(std::vector<std::complex<double>>& a, bool inverse);

// Analysis window: half-sample-offset periodic Hann, so no coefficient is
// exactly zero and the overlap-add normalizer stays well above its floor.
std::vector<double> hann_window(int64_t n);

}  // namespace voxsep::dsp

#endif  // VOXSEP_STFT_HPP
