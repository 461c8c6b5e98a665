// include/voxsep/adam.hpp
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

#ifndef VOXSEP_ADAM_HPP
#define VOXSEP_ADAM_HPP

#include <cstdint>
#include <vector>

#include "voxsep/tensor.hpp"

namespace voxsep::ad {

// Adam state for one parameter group. Moment tensors are kept in the order of
// the parameters they belong to; shapes always match.
struct AdamState {
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
  uint64_t t = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;

  static AdamState init(const std::vector<Tensor>& params, double beta1, double beta2, double eps);
};

// Bias-corrected Adam update, in place: t += 1, then each parameter moves by
// -lr * m_hat / (sqrt(v_hat) + eps). Parameters and gradients must align with
// the state one to one.
void adam_step(std::vector<Tensor*> params, const std::vector<const Tensor*>& grads,
               AdamState& state, double lr);

}  // namespace voxsep::ad

#endif  // VOXSEP_ADAM_HPP
