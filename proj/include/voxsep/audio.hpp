// include/voxsep/audio.hpp
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

#ifndef VOXSEP_AUDIO_HPP
#define VOXSEP_AUDIO_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace voxsep::dsp {

struct AudioClip {
  std::vector<double> samples;  // nominal range [-1, 1]
  double sample_rate = 0.0;     // Hz

  int64_t length() const { return static_cast<int64_t>(samples.size()); }
  double duration_seconds() const { return sample_rate > 0 ? length() / sample_rate : 0.0; }
};

enum class WavFormat { Pcm16, Float32 };

// Mono WAV reader. PCM 16-bit and IEEE float-32 are accepted; multichannel
// files are averaged down to mono. Unknown RIFF chunks are skipped.
AudioClip read_wav(const std::string& path);

void write_wav(const std::string& path, const AudioClip& clip,
               WavFormat format = WavFormat::Float32);

}  // namespace voxsep::dsp

#endif  // VOXSEP_AUDIO_HPP
