// include/voxsep/resample.hpp
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

#ifndef VOXSEP_RESAMPLE_HPP
#define VOXSEP_RESAMPLE_HPP

#include "voxsep/audio.hpp"

namespace voxsep::dsp {

// Band-limited arbitrary-ratio resampler: 64-tap Kaiser-windowed sinc
// (beta = 8.6) evaluated at each output phase, with the cutoff lowered to the
// output Nyquist when downsampling. Tap weights are normalized per output
// sample so DC passes exactly. Output length is round(len * target / source).
AudioClip resample(const AudioClip& audio, double target_rate);

}  // namespace voxsep::dsp

#endif  // VOXSEP_RESAMPLE_HPP
