// src/adam.cpp
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

#include "voxsep/adam.hpp"

#include <cmath>
#include <string>

#include "voxsep/error.hpp"

namespace voxsep::ad {

AdamState AdamState::init(const std::vector<Tensor>& params, double beta1, double beta2,
                          double eps) {
  AdamState s;
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.eps = eps;
  s.m.reserve(params.size());
  s.v.reserve(params.size());
  for (const Tensor& p : params) {
    s.m.emplace_back(p.shape());
    s.v.emplace_back(p.shape());
  }
  return s;
}

void adam_step(std::vector<Tensor*> params, const std::vector<const Tensor*>& grads,
               AdamState& state, double lr) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw ContractError("adam_step: parameter/gradient/state count mismatch (" +
                        std::to_string(params.size()) + "/" + std::to_string(grads.size()) + "/" +
                        std::to_string(state.m.size()) + ")");
  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Tensor& g = *grads[i];
    require_same_shape(p, g, "adam_step");
    Tensor& m = state.m[i];
    Tensor& v = state.v[i];
    const int64_t n = p.numel();
    for (int64_t j = 0; j < n; ++j) {
      const double gj = g.at(j);
      m.at(j) = state.beta1 * m.at(j) + (1.0 - state.beta1) * gj;
      v.at(j) = state.beta2 * v.at(j) + (1.0 - state.beta2) * gj * gj;
      const double mhat = m.at(j) / bc1;
      const double vhat = v.at(j) / bc2;
      p.at(j) -= lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

}  // namespace voxsep::ad
