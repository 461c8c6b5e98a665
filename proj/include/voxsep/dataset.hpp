// include/voxsep/dataset.hpp
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
// Dataset ingestion, batch sampling, synthetic crosses and the toy data
// generator. Directory layout:
//   <root>/mixtures/*.wav        vocal + accompaniment mixes
//   <root>/instrumentals/*.wav   accompaniment-only material (unmatched)
//   <root>/references/*.wav      hidden vocal references, evaluation only

#ifndef VOXSEP_DATASET_HPP
#define VOXSEP_DATASET_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "voxsep/losses.hpp"
#include "voxsep/model.hpp"
#include "voxsep/stft.hpp"

namespace voxsep::data {

struct Sample {
  dsp::CompressedMagnitude grid;
  dsp::PhaseGrid phase;
  std::string source_path;
  int64_t clip_index = 0;
  int64_t true_length = 0;
};

enum class DatasetRole { Mixtures, Sources };

struct Dataset {
  DatasetRole role = DatasetRole::Mixtures;
  std::vector<Sample> samples;
  std::vector<std::string> files;  // lexicographically sorted source files
};

// Reads, resamples, segments and compresses every WAV under `directory`.
// Unreadable files are skipped with a warning on stderr; an empty result is
// fatal. Sample order is file order (sorted) then clip order, so it is
// reproducible regardless of filesystem enumeration.
Dataset load_dataset(const std::string& directory, DatasetRole role, const dsp::StftConfig& cfg);

struct Batch {
  size_t mixture_index = 0;
  size_t source_index = 0;       // for the identity and d_C real terms
  size_t cross_source_index = 0; // independently drawn for the synthetic cross
};

// Uniform with-replacement draws; a pure function of (seed, step).
Batch sample_batch(const Dataset& mixtures, const Dataset& sources, uint64_t seed, uint64_t step);

// Tensor view of a compressed grid as [1,1,F,T] and back.
ad::Tensor grid_to_tensor(const dsp::CompressedMagnitude& grid);
dsp::CompressedMagnitude tensor_to_grid(const ad::Tensor& t);

// a - g(a) recorded on the tape; non-negative because the mask is in (0,1).
ad::Var vocal_estimate(ad::Tape& tape, const model::MaskNetwork& g, const model::Lease& gp,
                       ad::Var mixture);

// How synthetic crosses combine the two components.
//  Representation: cross = b + c directly in the compressed-magnitude domain.
//  Physical: decompress by 1/p, add, recompress; the memorized components
//  stay in the representation domain.
enum class CrossDomain { Representation, Physical };

// Tape-level cross; gradient flows through b_est unless detach_b is set.
loss::CrossVars make_cross(ad::Tape& tape, ad::Var b_est, ad::Var c, CrossDomain domain,
                           double compression_p, bool detach_b);

// Value-level cross for tests and offline tooling.
struct CrossSample {
  dsp::CompressedMagnitude cross;
  dsp::CompressedMagnitude component_b;
  dsp::CompressedMagnitude component_c;
};

CrossSample make_cross(const dsp::CompressedMagnitude& b_est, const dsp::CompressedMagnitude& c,
                       CrossDomain domain, double compression_p);

// ---- toy data --------------------------------------------------------------

struct ToyCounts {
  int64_t mixtures = 0;
  int64_t sources = 0;
};

struct ToyDatasets {
  std::vector<dsp::AudioClip> mixtures;
  std::vector<dsp::AudioClip> instrumentals;
  std::vector<dsp::AudioClip> vocal_references;  // aligned with mixtures
};

// Synthetic desk-scale material: "vocals" are vibrato sine melodies confined
// to kToyVocalBand, "instrumentals" are chord tones plus a sinusoid-bank noise
// bed confined to kToyInstrumentBand, mixtures are exact waveform sums.
// Samples are quantized to 2^-12 so mixes stay exact in float32 WAV files.
constexpr double kToyVocalBandLowHz = 2000.0;
constexpr double kToyVocalBandHighHz = 5000.0;
constexpr double kToyInstrumentBandHighHz = 1900.0;

ToyDatasets make_toy_datasets(uint64_t seed, ToyCounts counts, const dsp::StftConfig& cfg,
                              double duration_seconds = 1.0);

}  // namespace voxsep::data

#endif  // VOXSEP_DATASET_HPP
