// include/voxsep/rng.hpp
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
// Seeded randomness helpers. Distribution sampling is hand-rolled on top of
// mt19937_64 because the std:: distributions are implementation-defined and
// artifacts here must be byte-reproducible.

#ifndef VOXSEP_RNG_HPP
#define VOXSEP_RNG_HPP

#include <cstdint>
#include <random>

namespace voxsep {

uint64_t splitmix64(uint64_t x);

// Independent stream derived from (seed, stream_id, step); used so that batch
// sampling is a pure function of the training step.
std::mt19937_64 make_stream(uint64_t seed, uint64_t stream_id, uint64_t step = 0);

// Uniform in [0,1) with 53 random bits.
double uniform_double(std::mt19937_64& rng);

// Unbiased uniform index in [0, n) via rejection sampling.
uint64_t uniform_index(std::mt19937_64& rng, uint64_t n);

// Standard normal via Box-Muller (one value per call, no caching).
double normal_double(std::mt19937_64& rng);

}  // namespace voxsep

#endif  // VOXSEP_RNG_HPP
