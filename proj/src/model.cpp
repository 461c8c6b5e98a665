// src/model.cpp
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

#include "voxsep/model.hpp"

#include <cmath>

#include "voxsep/error.hpp"
#include "voxsep/rng.hpp"

namespace voxsep::model {

int ParamStore::add(const std::string& name, Tensor init) {
  if (find(name) >= 0) throw ContractError("ParamStore: duplicate parameter name " + name);
  names_.push_back(name);
  values_.push_back(std::move(init));
  return static_cast<int>(values_.size() - 1);
}

int ParamStore::find(const std::string& name) const {
  for (size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return static_cast<int>(i);
  return -1;
}

int64_t ParamStore::total_parameters() const {
  int64_t n = 0;
  for (const Tensor& t : values_) n += t.numel();
  return n;
}

Lease lease(Tape& tape, const ParamStore& store, bool requires_grad) {
  Lease l;
  l.vars.reserve(store.size());
  for (size_t i = 0; i < store.size(); ++i) l.vars.push_back(tape.leaf(store.value(i), requires_grad));
  return l;
}

Tensor he_normal_kernel(std::vector<int64_t> shape, std::mt19937_64& rng) {
  const int64_t fan_in = shape[1] * shape[2] * shape[3];
  const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
  Tensor t(std::move(shape));
  for (int64_t i = 0; i < t.numel(); ++i) t.at(i) = stddev * normal_double(rng);
  return t;
}

void MaskNetworkConfig::validate() const {
  if (grid < 4 || grid % 4 != 0)
    throw ContractError("mask network grid must be divisible by 4 (two stride-2 stages), got " +
                        std::to_string(grid));
  if (base_width < 1) throw ContractError("base_width must be positive");
  if (residual_blocks < 1) throw ContractError("residual_blocks must be positive");
}

void DiscriminatorConfig::validate() const {
  if (grid < 2) throw ContractError("discriminator grid too small");
  if (base_width < 1 || num_layers < 1 || scales < 1)
    throw ContractError("discriminator config must have positive width/layers/scales");
  // Every scale halves the grid first, then each stride-2 conv halves again;
  // the 4x4 head needs at least a 2x2 map (with pad 1) to produce output.
  int64_t size = grid;
  for (int64_t s = 0; s < scales; ++s) {
    if (size % 2 != 0)
      throw ContractError("discriminator: grid not divisible by 2 at scale " + std::to_string(s));
    size /= 2;
    int64_t g = size;
    for (int64_t l = 0; l < num_layers; ++l) {
      if (g % 2 != 0)
        throw ContractError("discriminator: odd feature map at scale " + std::to_string(s) +
                            " layer " + std::to_string(l));
      g /= 2;
    }
    if (g < 2)
      throw ContractError("discriminator: grid " + std::to_string(grid) + " too small for " +
                          std::to_string(num_layers) + " stride-2 layers at scale " +
                          std::to_string(s));
  }
}

namespace {
// Padding per kernel size keeps stride-1 shapes fixed and makes stride-2
// stages halve exactly: 7->3, 5->2, 4->1, 3->1.
int64_t pad_for(int64_t k) { return (k - 1) / 2; }
}  // namespace

MaskNetwork::MaskNetwork(const MaskNetworkConfig& cfg, uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  std::mt19937_64 rng = make_stream(seed, /*stream_id=*/0x6d61736bULL);
  const int64_t w1 = cfg.base_width, w2 = 2 * cfg.base_width, w4 = 4 * cfg.base_width;

  auto add_conv = [&](const std::string& name, int64_t cout, int64_t cin, int64_t k,
                      int64_t stride) {
    Conv c;
    c.w = params_.add(name + ".weight", he_normal_kernel({cout, cin, k, k}, rng));
    c.b = params_.add(name + ".bias", Tensor({cout}));
    c.stride = stride;
    c.pad = pad_for(k);
    return c;
  };
  auto add_norm = [&](const std::string& name, int64_t c) {
    Norm n;
    n.gain = params_.add(name + ".gain", Tensor::full({c}, 1.0));
    n.shift = params_.add(name + ".shift", Tensor({c}));
    return n;
  };

  encoder_.push_back({add_conv("enc0", w1, 1, 7, 1), add_norm("enc0.norm", w1), true});
  encoder_.push_back({add_conv("enc1", w2, w1, 4, 2), add_norm("enc1.norm", w2), true});
  encoder_.push_back({add_conv("enc2", w4, w2, 4, 2), add_norm("enc2.norm", w4), true});

  for (int64_t r = 0; r < 2 * cfg.residual_blocks; ++r) {
    const std::string base = "res" + std::to_string(r);
    Block b1{add_conv(base + ".0", w4, w4, 3, 1), add_norm(base + ".0.norm", w4), true};
    Block b2{add_conv(base + ".1", w4, w4, 3, 1), add_norm(base + ".1.norm", w4), true};
    residuals_.emplace_back(b1, b2);
  }

  upsample_.push_back({add_conv("up0", w2, w4, 5, 1), add_norm("up0.norm", w2), true});
  upsample_.push_back({add_conv("up1", w4, w2, 5, 1), add_norm("up1.norm", w4), true});

  head_ = Block{add_conv("head", 1, w4, 7, 1), Norm{}, false};
}

Var MaskNetwork::conv_block(Tape&, const Lease& p, Var x, const Block& blk,
                            bool relu_after) const {
  Var y = ad::conv2d(x, p[blk.conv.w], p[blk.conv.b], blk.conv.stride, blk.conv.pad);
  if (blk.normed) y = ad::instance_norm(y, p[blk.norm.gain], p[blk.norm.shift], cfg_.norm_eps);
  if (relu_after) y = ad::relu(y);
  return y;
}

Var MaskNetwork::mask(Tape& t, const Lease& p, Var input) const {
  (void)t;
  const Tensor& v = input.value();
  if (v.rank() != 4 || v.dim(1) != 1 || v.dim(2) != cfg_.grid || v.dim(3) != cfg_.grid)
    throw ShapeError("mask network expects [N,1," + std::to_string(cfg_.grid) + "," +
                     std::to_string(cfg_.grid) + "], got " + ad::shape_str(v.shape()));
  Var x = input;
  for (const Block& blk : encoder_) x = conv_block(t, p, x, blk, true);
  for (const auto& [b1, b2] : residuals_) {
    Var y = conv_block(t, p, x, b1, true);
    y = conv_block(t, p, y, b2, true);
    x = ad::add(x, y);
  }
  for (const Block& blk : upsample_) {
    x = ad::nearest_upsample2x(x);
    x = conv_block(t, p, x, blk, true);
  }
  x = conv_block(t, p, x, head_, false);
  return ad::sigmoid(x);
}

Var MaskNetwork::apply(Tape& t, const Lease& p, Var input) const {
  return ad::mul(input, mask(t, p, input));
}

MultiScaleDiscriminator::MultiScaleDiscriminator(const DiscriminatorConfig& cfg, uint64_t seed)
    : cfg_(cfg) {
  cfg_.validate();
  std::mt19937_64 rng = make_stream(seed, /*stream_id=*/0x64697363ULL);
  for (int64_t s = 0; s < cfg.scales; ++s) {
    std::vector<Conv> stack;
    int64_t cin = 1;
    for (int64_t l = 0; l < cfg.num_layers; ++l) {
      const int64_t cout = cfg.base_width << l;
      const std::string name = "scale" + std::to_string(s) + ".conv" + std::to_string(l);
      Conv c;
      c.w = params_.add(name + ".weight", he_normal_kernel({cout, cin, 4, 4}, rng));
      c.b = params_.add(name + ".bias", Tensor({cout}));
      c.stride = 2;
      c.pad = 1;
      stack.push_back(c);
      cin = cout;
    }
    const std::string name = "scale" + std::to_string(s) + ".head";
    Conv head;
    head.w = params_.add(name + ".weight", he_normal_kernel({1, cin, 4, 4}, rng));
    head.b = params_.add(name + ".bias", Tensor({1}));
    head.stride = 1;
    head.pad = 1;
    stack.push_back(head);
    stacks_.push_back(std::move(stack));
  }
}

std::vector<Var> MultiScaleDiscriminator::scores(Tape& t, const Lease& p, Var input) const {
  (void)t;
  const Tensor& v = input.value();
  if (v.rank() != 4 || v.dim(1) != 1 || v.dim(2) != cfg_.grid || v.dim(3) != cfg_.grid)
    throw ShapeError("discriminator expects [N,1," + std::to_string(cfg_.grid) + "," +
                     std::to_string(cfg_.grid) + "], got " + ad::shape_str(v.shape()));
  std::vector<Var> out;
  Var x = input;
  for (size_t s = 0; s < stacks_.size(); ++s) {
    x = ad::avgpool2x(x);  // every scale halves the input before its stack
    Var y = x;
    const std::vector<Conv>& stack = stacks_[s];
    for (size_t l = 0; l + 1 < stack.size(); ++l) {
      const Conv& c = stack[l];
      y = ad::conv2d(y, p[c.w], p[c.b], c.stride, c.pad);
      y = ad::leaky_relu(y, 0.2);
    }
    const Conv& head = stack.back();
    out.push_back(ad::conv2d(y, p[head.w], p[head.b], head.stride, head.pad));
  }
  return out;
}

}  // namespace voxsep::model
