// include/voxsep/model.hpp
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
// The masking generator and the multi-scale patch discriminators.
//
// Generator layout (base width W, grid S divisible by 4):
//   encoder   7x7/s1 conv (1 -> W), 4x4/s2 conv (W -> 2W), 4x4/s2 conv
//             (2W -> 4W), each followed by instance norm + ReLU
//   bottleneck/decoder: 2 x residual_blocks residual blocks at 4W channels
//             (two 3x3 conv+norm+ReLU stages per block, additive skip)
//   decoder   2x nearest upsample + 5x5 conv (4W -> 2W), then (2W -> 4W),
//             each followed by instance norm + ReLU
//   head      7x7/s1 conv (4W -> 1) + sigmoid
// The mask network output has the input's shape and lies strictly in (0,1).
//
// Discriminator (per scale): num_layers 4x4/s2 convs widening W,2W,4W,... each
// followed by leaky ReLU (slope 0.2), no normalization, then a 4x4/s1
// single-channel patch head. Scale i sees the input average-pooled i times.

#ifndef VOXSEP_MODEL_HPP
#define VOXSEP_MODEL_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "voxsep/tape.hpp"
#include "voxsep/tensor.hpp"

namespace voxsep::model {

using ad::Tape;
using ad::Tensor;
using ad::Var;

// Named parameter set owned outside any tape.
class ParamStore {
 public:
  int add(const std::string& name, Tensor init);
  size_t size() const { return values_.size(); }
  Tensor& value(size_t i) { return values_[i]; }
  const Tensor& value(size_t i) const { return values_[i]; }
  const std::string& name(size_t i) const { return names_[i]; }
  int find(const std::string& name) const;  // -1 when absent
  int64_t total_parameters() const;
  std::vector<Tensor>& values() { return values_; }
  const std::vector<Tensor>& values() const { return values_; }

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
};

// Parameters leased onto a tape as leaf vars for one recording.
struct Lease {
  std::vector<Var> vars;
  Var operator[](size_t i) const { return vars[i]; }
};

Lease lease(Tape& tape, const ParamStore& store, bool requires_grad);

struct MaskNetworkConfig {
  int64_t grid = 256;            // input is grid x grid
  int64_t base_width = 64;
  int64_t residual_blocks = 4;   // per side (bottleneck + decoder)
  double norm_eps = 1e-5;

  static MaskNetworkConfig toy() { return {32, 8, 2, 1e-5}; }
  void validate() const;
  bool operator==(const MaskNetworkConfig&) const = default;
};

struct DiscriminatorConfig {
  int64_t grid = 256;
  int64_t base_width = 64;   // widths double per layer: W, 2W, 4W, 8W
  int64_t num_layers = 4;    // stride-2 convs before the patch head
  int64_t scales = 2;

  // Toy grids only have room for two stride-2 convs on the coarsest scale.
  static DiscriminatorConfig toy() { return {32, 8, 2, 2}; }
  void validate() const;
  bool operator==(const DiscriminatorConfig&) const = default;
};

// g(a) = a * m(a); m is the encoder/decoder mask network above.
class MaskNetwork {
 public:
  MaskNetwork(const MaskNetworkConfig& cfg, uint64_t seed);

  // Input [1,1,S,S]; returns the mask, same shape, values in (0,1).
  Var mask(Tape& tape, const Lease& p, Var input) const;
  // Convenience: mask computed then applied, g(a) = a * m(a).
  Var apply(Tape& tape, const Lease& p, Var input) const;

  const MaskNetworkConfig& config() const { return cfg_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

 private:
  struct Conv {
    int w = -1, b = -1;
    int64_t stride = 1, pad = 0;
  };
  struct Norm {
    int gain = -1, shift = -1;
  };
  struct Block {
    Conv conv;
    Norm norm;
    bool normed = true;
  };

  Var conv_block(Tape& t, const Lease& p, Var x, const Block& blk, bool relu_after) const;

  MaskNetworkConfig cfg_;
  ParamStore params_;
  std::vector<Block> encoder_;
  std::vector<std::pair<Block, Block>> residuals_;
  std::vector<Block> upsample_;  // conv applied after nearest upsample
  Block head_;
};

class MultiScaleDiscriminator {
 public:
  MultiScaleDiscriminator(const DiscriminatorConfig& cfg, uint64_t seed);

  // One patch-score grid per scale, coarsest input last.
  std::vector<Var> scores(Tape& tape, const Lease& p, Var input) const;

  const DiscriminatorConfig& config() const { return cfg_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

 private:
  struct Conv {
    int w = -1, b = -1;
    int64_t stride = 1, pad = 0;
  };

  DiscriminatorConfig cfg_;
  ParamStore params_;
  std::vector<std::vector<Conv>> stacks_;  // per scale: num_layers convs + head
};

// Kernel entries ~ N(0, sqrt(2/fan_in)); biases/shifts 0, gains 1.
Tensor he_normal_kernel(std::vector<int64_t> shape, std::mt19937_64& rng);

}  // namespace voxsep::model

#endif  // VOXSEP_MODEL_HPP
