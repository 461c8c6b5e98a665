// src/dataset.cpp
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

#include "voxsep/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>

#include "voxsep/audio.hpp"
#include "voxsep/error.hpp"
#include "voxsep/resample.hpp"
#include "voxsep/rng.hpp"

namespace fs = std::filesystem;

namespace voxsep::data {

Dataset load_dataset(const std::string& directory, DatasetRole role, const dsp::StftConfig& cfg) {
  cfg.validate();
  Dataset out;
  out.role = role;
  if (!fs::is_directory(directory))
    throw IoError("dataset directory does not exist: " + directory);

  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().extension() == ".wav") files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());

  // Per-file decode in parallel; flattening afterwards keeps sample order
  // independent of scheduling.
  std::vector<std::vector<Sample>> per_file(files.size());
  std::vector<std::string> ok_files(files.size());
#pragma omp parallel for schedule(dynamic)
  for (size_t fi = 0; fi < files.size(); ++fi) {
    try {
      dsp::AudioClip clip = dsp::read_wav(files[fi]);
      clip = dsp::resample(clip, cfg.sample_rate);
      const std::vector<dsp::Segment> segs = dsp::segment(clip, cfg);
      std::vector<Sample> samples;
      samples.reserve(segs.size());
      for (size_t si = 0; si < segs.size(); ++si) {
        dsp::CompressedFrame frame = dsp::compress(dsp::stft(segs[si].clip, cfg), cfg.compression_p);
        Sample s;
        s.grid = std::move(frame.magnitude);
        s.phase = std::move(frame.phase);
        s.source_path = files[fi];
        s.clip_index = static_cast<int64_t>(si);
        s.true_length = segs[si].true_length;
        samples.push_back(std::move(s));
      }
      per_file[fi] = std::move(samples);
      ok_files[fi] = files[fi];
    } catch (const std::exception& e) {
#pragma omp critical
      std::cerr << "[dataset] warning: skipping unreadable file " << files[fi] << ": " << e.what()
                << "\n";
    }
  }
  for (size_t fi = 0; fi < files.size(); ++fi) {
    if (per_file[fi].empty()) continue;
    out.files.push_back(ok_files[fi]);
    for (Sample& s : per_file[fi]) out.samples.push_back(std::move(s));
  }
  if (out.samples.empty())
    throw IoError("dataset is empty: no decodable WAV clips under " + directory);
  return out;
}

Batch sample_batch(const Dataset& mixtures, const Dataset& sources, uint64_t seed, uint64_t step) {
  if (mixtures.samples.empty() || sources.samples.empty())
    throw ContractError("sample_batch: empty dataset");
  std::mt19937_64 rng = make_stream(seed, /*stream_id=*/0x62617463ULL, step);
  Batch b;
  b.mixture_index = uniform_index(rng, mixtures.samples.size());
  b.source_index = uniform_index(rng, sources.samples.size());
  b.cross_source_index = uniform_index(rng, sources.samples.size());
  return b;
}

ad::Tensor grid_to_tensor(const dsp::CompressedMagnitude& grid) {
  return ad::Tensor({1, 1, grid.bins, grid.frames}, grid.values);
}

dsp::CompressedMagnitude tensor_to_grid(const ad::Tensor& t) {
  if (t.rank() != 4 || t.dim(0) != 1 || t.dim(1) != 1)
    throw ShapeError("tensor_to_grid: expected [1,1,F,T], got " + ad::shape_str(t.shape()));
  dsp::CompressedMagnitude g;
  g.bins = t.dim(2);
  g.frames = t.dim(3);
  g.values = t.values();
  return g;
}

ad::Var vocal_estimate(ad::Tape& tape, const model::MaskNetwork& g, const model::Lease& gp,
                       ad::Var mixture) {
  return ad::sub(mixture, g.apply(tape, gp, mixture));
}

namespace {
// Keeps pow gradients finite when both magnitudes vanish.
constexpr double kPowEps = 1e-9;
}  // namespace

loss::CrossVars make_cross(ad::Tape& tape, ad::Var b_est, ad::Var c, CrossDomain domain,
                           double compression_p, bool detach_b) {
  ad::require_same_shape(b_est.value(), c.value(), "make_cross");
  ad::Var b = detach_b ? tape.constant(b_est.value()) : b_est;
  loss::CrossVars out;
  out.component_b = b;
  out.component_c = c;
  if (domain == CrossDomain::Representation) {
    out.cross = ad::add(b, c);
  } else {
    const double inv_p = 1.0 / compression_p;
    ad::Var lin = ad::add(ad::pow_shifted(b, inv_p, kPowEps), ad::pow_shifted(c, inv_p, kPowEps));
    out.cross = ad::pow_shifted(lin, compression_p, kPowEps);
  }
  return out;
}

CrossSample make_cross(const dsp::CompressedMagnitude& b_est, const dsp::CompressedMagnitude& c,
                       CrossDomain domain, double compression_p) {
  if (b_est.bins != c.bins || b_est.frames != c.frames)
    throw ShapeError("make_cross: grid mismatch " + std::to_string(b_est.bins) + "x" +
                     std::to_string(b_est.frames) + " vs " + std::to_string(c.bins) + "x" +
                     std::to_string(c.frames));
  CrossSample s;
  s.component_b = b_est;
  s.component_c = c;
  s.cross = b_est;
  for (size_t i = 0; i < s.cross.values.size(); ++i) {
    if (domain == CrossDomain::Representation) {
      s.cross.values[i] = b_est.values[i] + c.values[i];
    } else {
      const double inv_p = 1.0 / compression_p;
      const double lin = std::pow(b_est.values[i] + kPowEps, inv_p) +
                         std::pow(c.values[i] + kPowEps, inv_p);
      s.cross.values[i] = std::pow(lin + kPowEps, compression_p);
    }
  }
  return s;
}

// ---- toy data --------------------------------------------------------------

namespace {

double quantize12(double x) { return std::round(x * 4096.0) / 4096.0; }

void scale_to_peak(std::vector<double>& x, double peak) {
  double maxabs = 0.0;
  for (double v : x) maxabs = std::max(maxabs, std::fabs(v));
  if (maxabs == 0.0) return;
  const double s = peak / maxabs;
  for (double& v : x) v *= s;
}

// Vibrato sine melody confined to the vocal band.
std::vector<double> toy_vocal(std::mt19937_64& rng, int64_t n, double rate) {
  std::vector<double> x(static_cast<size_t>(n), 0.0);
  const double note_len = 0.21;  // seconds
  const int64_t note_samples = std::max<int64_t>(1, static_cast<int64_t>(note_len * rate));
  double phase = 0.0;
  double freq = 0.0;
  const double lo = kToyVocalBandLowHz + 300.0, hi = kToyVocalBandHighHz - 500.0;
  for (int64_t i = 0; i < n; ++i) {
    if (i % note_samples == 0) freq = lo + (hi - lo) * uniform_double(rng);
    const double t = static_cast<double>(i) / rate;
    const double vib = 1.0 + 0.008 * std::sin(2.0 * M_PI * 5.5 * t);
    phase += 2.0 * M_PI * freq * vib / rate;
    // soft note envelope to avoid clicks
    const double pos = static_cast<double>(i % note_samples) / static_cast<double>(note_samples);
    const double env = std::min(1.0, 12.0 * std::min(pos, 1.0 - pos));
    x[static_cast<size_t>(i)] = env * std::sin(phase);
  }
  scale_to_peak(x, 0.35);
  return x;
}

// Chord tones plus a sinusoid-bank noise bed, all below the instrument cutoff.
std::vector<double> toy_instrumental(std::mt19937_64& rng, int64_t n, double rate) {
  std::vector<double> x(static_cast<size_t>(n), 0.0);
  static const double chord[] = {220.0, 275.0, 330.0, 440.0, 550.0, 660.0};
  const int tones = 3 + static_cast<int>(uniform_index(rng, 3));
  std::vector<double> freqs, phases, amps;
  for (int k = 0; k < tones; ++k) {
    freqs.push_back(chord[uniform_index(rng, 6)] * (1.0 + 0.002 * (uniform_double(rng) - 0.5)));
    phases.push_back(2.0 * M_PI * uniform_double(rng));
    amps.push_back(0.09 + 0.05 * uniform_double(rng));
  }
  const int bank = 48;  // dense random sinusoids emulate band-limited noise
  for (int k = 0; k < bank; ++k) {
    freqs.push_back(100.0 + (kToyInstrumentBandHighHz - 250.0) * uniform_double(rng));
    phases.push_back(2.0 * M_PI * uniform_double(rng));
    amps.push_back(0.16 / std::sqrt(static_cast<double>(bank)));
  }
  for (int64_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    double v = 0.0;
    for (size_t k = 0; k < freqs.size(); ++k) v += amps[k] * std::sin(2.0 * M_PI * freqs[k] * t + phases[k]);
    x[static_cast<size_t>(i)] = v;
  }
  scale_to_peak(x, 0.4);
  return x;
}

}  // namespace

ToyDatasets make_toy_datasets(uint64_t seed, ToyCounts counts, const dsp::StftConfig& cfg,
                              double duration_seconds) {
  cfg.validate();
  if (counts.mixtures < 0 || counts.sources < 0)
    throw ContractError("make_toy_datasets: negative counts");
  const int64_t n = static_cast<int64_t>(duration_seconds * cfg.sample_rate);
  if (cfg.sample_rate < 2.0 * kToyVocalBandHighHz)
    throw ContractError("make_toy_datasets: sample rate too low for the vocal band");

  ToyDatasets out;
  for (int64_t i = 0; i < counts.mixtures; ++i) {
    std::mt19937_64 rng = make_stream(seed, /*stream_id=*/0x746f796dULL, static_cast<uint64_t>(i));
    std::vector<double> voc = toy_vocal(rng, n, cfg.sample_rate);
    std::vector<double> ins = toy_instrumental(rng, n, cfg.sample_rate);
    dsp::AudioClip vocal{{}, cfg.sample_rate}, mix{{}, cfg.sample_rate};
    vocal.samples.resize(static_cast<size_t>(n));
    mix.samples.resize(static_cast<size_t>(n));
    for (int64_t s = 0; s < n; ++s) {
      const double v = quantize12(voc[static_cast<size_t>(s)]);
      const double a = quantize12(ins[static_cast<size_t>(s)]);
      vocal.samples[static_cast<size_t>(s)] = v;
      mix.samples[static_cast<size_t>(s)] = v + a;  // exact in float32 (both on 2^-12 grid)
    }
    out.vocal_references.push_back(std::move(vocal));
    out.mixtures.push_back(std::move(mix));
  }
  for (int64_t i = 0; i < counts.sources; ++i) {
    std::mt19937_64 rng = make_stream(seed, /*stream_id=*/0x746f7973ULL, static_cast<uint64_t>(i));
    std::vector<double> ins = toy_instrumental(rng, n, cfg.sample_rate);
    dsp::AudioClip clip{{}, cfg.sample_rate};
    clip.samples.resize(static_cast<size_t>(n));
    for (int64_t s = 0; s < n; ++s)
      clip.samples[static_cast<size_t>(s)] = quantize12(ins[static_cast<size_t>(s)]);
    out.instrumentals.push_back(std::move(clip));
  }
  return out;
}

}  // namespace voxsep::data
