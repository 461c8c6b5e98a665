// include/voxsep/tape.hpp
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
// Reverse-mode tape. Nodes are appended in evaluation order, which is already
// a topological order, so backward() is a single reverse sweep that visits
// each node once. A tape can be differentiated exactly once; calling
// backward() again without re-recording throws ContractError.

#ifndef VOXSEP_TAPE_HPP
#define VOXSEP_TAPE_HPP

#include <functional>
#include <vector>

#include "voxsep/tensor.hpp"

namespace voxsep::ad {

class Tape;

// Lightweight handle to a tape node.
struct Var {
  Tape* tape = nullptr;
  int32_t id = -1;

  const Tensor& value() const;
  const Tensor& grad() const;
  bool requires_grad() const;
};

class Tape {
 public:
  struct Node {
    Tensor value;
    Tensor grad;  // allocated by backward()
    bool requires_grad = false;
    // Accumulates into the parents' grads; reads this node's grad and any
    // saved forward values it needs out of the tape.
    std::function<void(Tape&, int32_t self)> backward;
  };

  Var leaf(Tensor value, bool requires_grad);
  Var constant(Tensor value) { return leaf(std::move(value), false); }

  // Used by op implementations.
  Var emit(Tensor value, bool requires_grad, std::function<void(Tape&, int32_t)> backward);

  void backward(Var loss);

  Tensor& value(int32_t id) { return nodes_[static_cast<size_t>(id)].value; }
  const Tensor& value(int32_t id) const { return nodes_[static_cast<size_t>(id)].value; }
  Tensor& grad(int32_t id) { return nodes_[static_cast<size_t>(id)].grad; }
  const Node& node(int32_t id) const { return nodes_[static_cast<size_t>(id)]; }
  size_t size() const { return nodes_.size(); }
  bool consumed() const { return consumed_; }

 private:
  std::vector<Node> nodes_;
  bool consumed_ = false;
};

// ---- Recorded operations -------------------------------------------------

// conv2d: x [N,Cin,H,W], kernel [Cout,Cin,kh,kw], bias [Cout].
Var conv2d(Var x, Var kernel, Var bias, int64_t stride, int64_t pad);
// instance_norm: x [N,C,H,W], gain/shift [C].
Var instance_norm(Var x, Var gain, Var shift, double eps);
Var nearest_upsample2x(Var x);
Var avgpool2x(Var x);

Var relu(Var x);
Var leaky_relu(Var x, double slope);
Var sigmoid(Var x);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var add_const(Var a, const Tensor& c);

// (x + shift)^p elementwise, for non-negative x; shift keeps the derivative
// finite at zero. Used by the physical-domain cross construction.
Var pow_shifted(Var x, double p, double shift);

// Reductions; all return scalar ([1]) vars.
Var sum(Var x);
Var mean(Var x);
Var l1_mean(Var a, Var b);              // mean |a - b|
Var least_squares(Var x, double target);  // mean (x - target)^2

}  // namespace voxsep::ad

#endif  // VOXSEP_TAPE_HPP
