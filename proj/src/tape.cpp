// src/tape.cpp
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

#include "voxsep/tape.hpp"

#include <cmath>
#include <memory>
#include <string>
#include <utility>

#include "voxsep/error.hpp"
#include "voxsep/kernels.hpp"

namespace voxsep::ad {

const Tensor& Var::value() const { return tape->value(id); }
const Tensor& Var::grad() const { return tape->node(id).grad; }
bool Var::requires_grad() const { return tape->node(id).requires_grad; }

Var Tape::leaf(Tensor value, bool requires_grad) {
  return emit(std::move(value), requires_grad, nullptr);
}

Var Tape::emit(Tensor value, bool requires_grad, std::function<void(Tape&, int32_t)> backward) {
  if (finite_checks_enabled() && !value.all_finite())
    throw ContractError("non-finite values produced at tape node " + std::to_string(nodes_.size()));
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int32_t>(nodes_.size() - 1)};
}

void Tape::backward(Var loss) {
  if (loss.tape != this) throw ContractError("backward: loss recorded on a different tape");
  if (consumed_)
    throw ContractError("backward: tape already differentiated; re-record before calling again");
  if (value(loss.id).numel() != 1)
    throw ContractError("backward: loss must be scalar, has shape " +
                        shape_str(value(loss.id).shape()));
  consumed_ = true;
  for (Node& n : nodes_) n.grad = Tensor(n.value.shape());
  nodes_[static_cast<size_t>(loss.id)].grad.at(0) = 1.0;
  for (int32_t id = loss.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (n.backward && n.requires_grad) n.backward(*this, id);
  }
}

// ---- op helpers ------------------------------------------------------------

namespace {

void check_same_tape(Var a, Var b, const char* what) {
  if (a.tape != b.tape) throw ContractError(std::string(what) + ": vars on different tapes");
}

using kern::Conv2dDims;

}  // namespace

Var conv2d(Var x, Var kernel, Var bias, int64_t stride, int64_t pad) {
  check_same_tape(x, kernel, "conv2d");
  check_same_tape(x, bias, "conv2d");
  const Tensor& xv = x.value();
  const Tensor& kv = kernel.value();
  const Tensor& bv = bias.value();
  if (xv.rank() != 4) throw ShapeError("conv2d: input must be [N,Cin,H,W], got " + shape_str(xv.shape()));
  if (kv.rank() != 4) throw ShapeError("conv2d: kernel must be [Cout,Cin,kh,kw], got " + shape_str(kv.shape()));
  if (xv.dim(1) != kv.dim(1))
    throw ShapeError("conv2d: input channel axis " + std::to_string(xv.dim(1)) +
                     " != kernel channel axis " + std::to_string(kv.dim(1)));
  if (bv.rank() != 1 || bv.dim(0) != kv.dim(0))
    throw ShapeError("conv2d: bias must be [Cout=" + std::to_string(kv.dim(0)) + "], got " +
                     shape_str(bv.shape()));
  Conv2dDims d;
  d.n = xv.dim(0); d.cin = xv.dim(1); d.h = xv.dim(2); d.w = xv.dim(3);
  d.cout = kv.dim(0); d.kh = kv.dim(2); d.kw = kv.dim(3);
  d.stride = stride; d.pad = pad;
  d.validate();
  Tensor out({d.n, d.cout, d.out_h(), d.out_w()});
  kern::conv2d_forward(xv.data(), kv.data(), bv.data(), out.data(), d);
  const bool rg = x.requires_grad() || kernel.requires_grad() || bias.requires_grad();
  const int32_t xi = x.id, ki = kernel.id, bi = bias.id;
  return x.tape->emit(std::move(out), rg, [=](Tape& t, int32_t self) {
    const double* gy = t.grad(self).data();
    if (t.node(xi).requires_grad)
      kern::conv2d_backward_input(gy, t.value(ki).data(), t.grad(xi).data(), d);
    if (t.node(ki).requires_grad)
      kern::conv2d_backward_kernel(gy, t.value(xi).data(), t.grad(ki).data(), d);
    if (t.node(bi).requires_grad) kern::conv2d_backward_bias(gy, t.grad(bi).data(), d);
  });
}

Var instance_norm(Var x, Var gain, Var shift, double eps) {
  check_same_tape(x, gain, "instance_norm");
  check_same_tape(x, shift, "instance_norm");
  const Tensor& xv = x.value();
  if (xv.rank() != 4)
    throw ShapeError("instance_norm: input must be [N,C,H,W], got " + shape_str(xv.shape()));
  const int64_t n = xv.dim(0), c = xv.dim(1), hw = xv.dim(2) * xv.dim(3);
  if (gain.value().numel() != c || shift.value().numel() != c)
    throw ShapeError("instance_norm: gain/shift must have C=" + std::to_string(c) + " entries");
  Tensor out(xv.shape());
  auto mean = std::make_shared<std::vector<double>>(static_cast<size_t>(n * c));
  auto inv_std = std::make_shared<std::vector<double>>(static_cast<size_t>(n * c));
  kern::instance_norm_forward(xv.data(), gain.value().data(), shift.value().data(), out.data(),
                              mean->data(), inv_std->data(), n, c, hw, eps);
  const bool rg = x.requires_grad() || gain.requires_grad() || shift.requires_grad();
  const int32_t xi = x.id, gi = gain.id, si = shift.id;
  return x.tape->emit(std::move(out), rg, [=](Tape& t, int32_t self) {
    // gain/shift grads come for free from the same pass; scratch buffers are
    // discarded when the input does not need a gradient itself.
    Tensor gx_scratch;
    Tensor* gx = nullptr;
    if (t.node(xi).requires_grad) {
      gx = &t.grad(xi);
    } else {
      gx_scratch = Tensor(t.value(xi).shape());
      gx = &gx_scratch;
    }
    Tensor ggain_scratch({c}), gshift_scratch({c});
    double* gg = t.node(gi).requires_grad ? t.grad(gi).data() : ggain_scratch.data();
    double* gs = t.node(si).requires_grad ? t.grad(si).data() : gshift_scratch.data();
    kern::instance_norm_backward(t.grad(self).data(), t.value(xi).data(), t.value(gi).data(),
                                 mean->data(), inv_std->data(), gx->data(), gg, gs, n, c, hw);
  });
}

Var nearest_upsample2x(Var x) {
  const Tensor& xv = x.value();
  if (xv.rank() != 4)
    throw ShapeError("nearest_upsample2x: input must be [N,C,H,W], got " + shape_str(xv.shape()));
  const int64_t nc = xv.dim(0) * xv.dim(1), h = xv.dim(2), w = xv.dim(3);
  Tensor out({xv.dim(0), xv.dim(1), 2 * h, 2 * w});
  kern::upsample2x_forward(xv.data(), out.data(), nc, h, w);
  const int32_t xi = x.id;
  return x.tape->emit(std::move(out), x.requires_grad(), [=](Tape& t, int32_t self) {
    if (t.node(xi).requires_grad)
      kern::upsample2x_backward(t.grad(self).data(), t.grad(xi).data(), nc, h, w);
  });
}

Var avgpool2x(Var x) {
  const Tensor& xv = x.value();
  if (xv.rank() != 4)
    throw ShapeError("avgpool2x: input must be [N,C,H,W], got " + shape_str(xv.shape()));
  const int64_t nc = xv.dim(0) * xv.dim(1), h = xv.dim(2), w = xv.dim(3);
  Tensor out({xv.dim(0), xv.dim(1), h / 2, w / 2});
  kern::avgpool2x_forward(xv.data(), out.data(), nc, h, w);
  const int32_t xi = x.id;
  return x.tape->emit(std::move(out), x.requires_grad(), [=](Tape& t, int32_t self) {
    if (t.node(xi).requires_grad)
      kern::avgpool2x_backward(t.grad(self).data(), t.grad(xi).data(), nc, h, w);
  });
}

namespace {

// Elementwise op with derivative expressed from the *output* value.
template <typename Fwd, typename Dydx>
Var unary_elementwise(Var x, Fwd fwd, Dydx dydx) {
  const Tensor& xv = x.value();
  Tensor out(xv.shape());
  const int64_t n = xv.numel();
  const double* xp = xv.data();
  double* yp = out.data();
#pragma omp parallel for if (n > (1 << 14))
  for (int64_t i = 0; i < n; ++i) yp[i] = fwd(xp[i]);
  const int32_t xi = x.id;
  return x.tape->emit(std::move(out), x.requires_grad(), [=](Tape& t, int32_t self) {
    if (!t.node(xi).requires_grad) return;
    const double* g = t.grad(self).data();
    const double* xin = t.value(xi).data();
    const double* yout = t.value(self).data();
    double* gx = t.grad(xi).data();
#pragma omp parallel for if (n > (1 << 14))
    for (int64_t i = 0; i < n; ++i) gx[i] += g[i] * dydx(xin[i], yout[i]);
  });
}

}  // namespace

Var relu(Var x) {
  return unary_elementwise(
      x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Var leaky_relu(Var x, double slope) {
  return unary_elementwise(
      x, [slope](double v) { return v > 0.0 ? v : slope * v; },
      [slope](double v, double) { return v > 0.0 ? 1.0 : slope; });
}

Var sigmoid(Var x) {
  // Pre-activation clamped to +/-36: beyond that 1/(1+exp(-v)) rounds to
  // exactly 0 or 1 in double, and mask values must stay strictly inside (0,1).
  auto sig = [](double v) {
    if (v > 36.0) v = 36.0;
    if (v < -36.0) v = -36.0;
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  };
  return unary_elementwise(x, sig, [](double, double y) { return y * (1.0 - y); });
}

Var pow_shifted(Var x, double p, double shift) {
  return unary_elementwise(
      x, [=](double v) { return std::pow(v + shift, p); },
      [=](double v, double) { return p * std::pow(v + shift, p - 1.0); });
}

namespace {

enum class BinKind { Add, Sub, Mul };

Var binary_elementwise(Var a, Var b, BinKind kind, const char* what) {
  check_same_tape(a, b, what);
  require_same_shape(a.value(), b.value(), what);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  Tensor out(av.shape());
  const int64_t n = av.numel();
  const double* ap = av.data();
  const double* bp = bv.data();
  double* yp = out.data();
#pragma omp parallel for if (n > (1 << 14))
  for (int64_t i = 0; i < n; ++i) {
    switch (kind) {
      case BinKind::Add: yp[i] = ap[i] + bp[i]; break;
      case BinKind::Sub: yp[i] = ap[i] - bp[i]; break;
      case BinKind::Mul: yp[i] = ap[i] * bp[i]; break;
    }
  }
  const bool rg = a.requires_grad() || b.requires_grad();
  const int32_t ai = a.id, bi = b.id;
  return a.tape->emit(std::move(out), rg, [=](Tape& t, int32_t self) {
    const double* g = t.grad(self).data();
    const bool need_a = t.node(ai).requires_grad;
    const bool need_b = t.node(bi).requires_grad;
    double* ga = need_a ? t.grad(ai).data() : nullptr;
    double* gb = need_b ? t.grad(bi).data() : nullptr;
    const double* apv = t.value(ai).data();
    const double* bpv = t.value(bi).data();
    for (int64_t i = 0; i < n; ++i) {
      switch (kind) {
        case BinKind::Add:
          if (ga) ga[i] += g[i];
          if (gb) gb[i] += g[i];
          break;
        case BinKind::Sub:
          if (ga) ga[i] += g[i];
          if (gb) gb[i] -= g[i];
          break;
        case BinKind::Mul:
          if (ga) ga[i] += g[i] * bpv[i];
          if (gb) gb[i] += g[i] * apv[i];
          break;
      }
    }
  });
}

}  // namespace

Var add(Var a, Var b) { return binary_elementwise(a, b, BinKind::Add, "add"); }
Var sub(Var a, Var b) { return binary_elementwise(a, b, BinKind::Sub, "sub"); }
Var mul(Var a, Var b) { return binary_elementwise(a, b, BinKind::Mul, "mul"); }

Var scale(Var a, double s) {
  return unary_elementwise(
      a, [s](double v) { return s * v; }, [s](double, double) { return s; });
}

Var add_const(Var a, const Tensor& c) {
  require_same_shape(a.value(), c, "add_const");
  const Tensor& av = a.value();
  Tensor out(av.shape());
  for (int64_t i = 0; i < av.numel(); ++i) out.at(i) = av.at(i) + c.at(i);
  const int32_t ai = a.id;
  const int64_t n = av.numel();
  return a.tape->emit(std::move(out), a.requires_grad(), [=](Tape& t, int32_t self) {
    if (!t.node(ai).requires_grad) return;
    const double* g = t.grad(self).data();
    double* ga = t.grad(ai).data();
    for (int64_t i = 0; i < n; ++i) ga[i] += g[i];
  });
}

Var sum(Var x) {
  const Tensor& xv = x.value();
  double s = 0.0;
  for (int64_t i = 0; i < xv.numel(); ++i) s += xv.at(i);
  const int32_t xi = x.id;
  const int64_t n = xv.numel();
  return x.tape->emit(Tensor::scalar(s), x.requires_grad(), [=](Tape& t, int32_t self) {
    if (!t.node(xi).requires_grad) return;
    const double g = t.grad(self).at(0);
    double* gx = t.grad(xi).data();
    for (int64_t i = 0; i < n; ++i) gx[i] += g;
  });
}

Var mean(Var x) { return scale(sum(x), 1.0 / static_cast<double>(x.value().numel())); }

Var l1_mean(Var a, Var b) {
  check_same_tape(a, b, "l1_mean");
  require_same_shape(a.value(), b.value(), "l1_mean");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const int64_t n = av.numel();
  double s = 0.0;
  for (int64_t i = 0; i < n; ++i) s += std::fabs(av.at(i) - bv.at(i));
  s /= static_cast<double>(n);
  const bool rg = a.requires_grad() || b.requires_grad();
  const int32_t ai = a.id, bi = b.id;
  // Subgradient at a == b is taken as 0.
  return a.tape->emit(Tensor::scalar(s), rg, [=](Tape& t, int32_t self) {
    const double g = t.grad(self).at(0) / static_cast<double>(n);
    const double* ap = t.value(ai).data();
    const double* bp = t.value(bi).data();
    double* ga = t.node(ai).requires_grad ? t.grad(ai).data() : nullptr;
    double* gb = t.node(bi).requires_grad ? t.grad(bi).data() : nullptr;
    for (int64_t i = 0; i < n; ++i) {
      const double d = ap[i] - bp[i];
      const double sgn = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
      if (ga) ga[i] += g * sgn;
      if (gb) gb[i] -= g * sgn;
    }
  });
}

Var least_squares(Var x, double target) {
  const Tensor& xv = x.value();
  const int64_t n = xv.numel();
  double s = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const double d = xv.at(i) - target;
    s += d * d;
  }
  s /= static_cast<double>(n);
  const int32_t xi = x.id;
  return x.tape->emit(Tensor::scalar(s), x.requires_grad(), [=](Tape& t, int32_t self) {
    if (!t.node(xi).requires_grad) return;
    const double g = 2.0 * t.grad(self).at(0) / static_cast<double>(n);
    const double* xp = t.value(xi).data();
    double* gx = t.grad(xi).data();
    for (int64_t i = 0; i < n; ++i) gx[i] += g * (xp[i] - target);
  });
}

}  // namespace voxsep::ad
