// src/audio.cpp
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

#include "voxsep/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "voxsep/error.hpp"

namespace voxsep::dsp {

namespace {

// All multi-byte fields in RIFF/WAVE are little-endian; this code assumes a
// little-endian host (checked nowhere else in the tree).

template <typename T>
T read_le(std::istream& in, const std::string& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw CorruptFileError("unexpected end of WAV file: " + path);
  return v;
}

template <typename T>
void write_le(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

struct FmtChunk {
  uint16_t format = 0;
  uint16_t channels = 0;
  uint32_t sample_rate = 0;
  uint16_t bits = 0;
};

}  // namespace

AudioClip read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open WAV file: " + path);

  char riff[4], wave[4];
  in.read(riff, 4);
  if (!in || std::memcmp(riff, "RIFF", 4) != 0)
    throw CorruptFileError("not a RIFF file: " + path);
  read_le<uint32_t>(in, path);  // riff size, unused
  in.read(wave, 4);
  if (!in || std::memcmp(wave, "WAVE", 4) != 0)
    throw CorruptFileError("not a WAVE file: " + path);

  FmtChunk fmt;
  bool have_fmt = false;
  std::vector<char> data;
  bool have_data = false;

  while (in && !have_data) {
    char id[4];
    in.read(id, 4);
    if (!in) break;
    const uint32_t size = read_le<uint32_t>(in, path);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      fmt.format = read_le<uint16_t>(in, path);
      fmt.channels = read_le<uint16_t>(in, path);
      fmt.sample_rate = read_le<uint32_t>(in, path);
      read_le<uint32_t>(in, path);  // byte rate
      read_le<uint16_t>(in, path);  // block align
      fmt.bits = read_le<uint16_t>(in, path);
      if (size > 16) in.seekg(size - 16, std::ios::cur);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data.resize(size);
      in.read(data.data(), size);
      if (!in) throw CorruptFileError("truncated data chunk: " + path);
      have_data = true;
    } else {
      in.seekg(size + (size & 1), std::ios::cur);  // chunks are word-aligned
    }
  }
  if (!have_fmt || !have_data) throw CorruptFileError("missing fmt/data chunk: " + path);
  if (fmt.channels == 0) throw CorruptFileError("zero channels: " + path);

  const bool pcm16 = fmt.format == 1 && fmt.bits == 16;
  const bool f32 = fmt.format == 3 && fmt.bits == 32;
  if (!pcm16 && !f32)
    throw IoError("unsupported WAV encoding (format=" + std::to_string(fmt.format) +
                  ", bits=" + std::to_string(fmt.bits) + "): " + path +
                  " — only PCM 16-bit and IEEE float-32 are handled");

  const size_t bytes_per_sample = pcm16 ? 2 : 4;
  const size_t frame_bytes = bytes_per_sample * fmt.channels;
  const size_t frames = data.size() / frame_bytes;

  AudioClip clip;
  clip.sample_rate = static_cast<double>(fmt.sample_rate);
  clip.samples.resize(frames);
  const double ch_scale = 1.0 / fmt.channels;
  for (size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (uint16_t c = 0; c < fmt.channels; ++c) {
      const char* p = data.data() + f * frame_bytes + c * bytes_per_sample;
      if (pcm16) {
        int16_t v;
        std::memcpy(&v, p, 2);
        acc += static_cast<double>(v) / 32768.0;
      } else {
        float v;
        std::memcpy(&v, p, 4);
        acc += static_cast<double>(v);
      }
    }
    clip.samples[f] = acc * ch_scale;
  }
  return clip;
}

void write_wav(const std::string& path, const AudioClip& clip, WavFormat format) {
  if (clip.sample_rate <= 0) throw ContractError("write_wav: sample rate must be positive");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create WAV file: " + path);

  const uint16_t channels = 1;
  const uint16_t bits = format == WavFormat::Pcm16 ? 16 : 32;
  const uint16_t fmt_code = format == WavFormat::Pcm16 ? 1 : 3;
  const uint32_t rate = static_cast<uint32_t>(std::llround(clip.sample_rate));
  const uint32_t data_bytes =
      static_cast<uint32_t>(clip.samples.size() * (bits / 8));

  out.write("RIFF", 4);
  write_le<uint32_t>(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_le<uint32_t>(out, 16);
  write_le<uint16_t>(out, fmt_code);
  write_le<uint16_t>(out, channels);
  write_le<uint32_t>(out, rate);
  write_le<uint32_t>(out, rate * channels * (bits / 8));
  write_le<uint16_t>(out, static_cast<uint16_t>(channels * (bits / 8)));
  write_le<uint16_t>(out, bits);
  out.write("data", 4);
  write_le<uint32_t>(out, data_bytes);

  for (double s : clip.samples) {
    if (format == WavFormat::Pcm16) {
      const double clamped = std::clamp(s, -1.0, 1.0);
      const int32_t q = static_cast<int32_t>(std::lrint(clamped * 32767.0));
      write_le<int16_t>(out, static_cast<int16_t>(std::clamp(q, -32768, 32767)));
    } else {
      write_le<float>(out, static_cast<float>(s));
    }
  }
  if (!out) throw IoError("failed writing WAV file: " + path);
}

}  // namespace voxsep::dsp
