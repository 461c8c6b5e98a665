// include/voxsep/losses.hpp
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
// Training objectives. All reconstruction terms are per-element L1 means, so
// their magnitudes do not depend on the grid resolution. The patch
// discriminators are scored with the least-squares loss averaged over all
// patches of a scale and then over scales.

#ifndef VOXSEP_LOSSES_HPP
#define VOXSEP_LOSSES_HPP

#include <vector>

#include "voxsep/model.hpp"
#include "voxsep/tape.hpp"

namespace voxsep::loss {

using ad::Tape;
using ad::Var;
using model::Lease;
using model::MaskNetwork;
using model::MultiScaleDiscriminator;

struct LossWeights {
  double w_r1 = 1.0, w_r2 = 1.0, w_r3 = 1.0, w_r4 = 1.0;
  double w_gan = 0.5;  // applied to gan_c + gan_a
  bool r1_enabled = true, r2_enabled = true, r3_enabled = true, r4_enabled = true;
  bool gan_c_enabled = true, gan_a_enabled = true;
};

// Generator adversarial form. `Standard` uses l(d(fake), 1), which is bounded
// below and has the same fixed point as the written form; `PaperLiteral` uses
// -l(d(fake), 0) exactly as printed, which is unbounded below.
enum class GanMode { Standard, PaperLiteral };

struct GeneratorLossReport {
  double r1 = 0, r2 = 0, r3 = 0, r4 = 0;
  double gan_c = 0, gan_a = 0;
  double total = 0;
};

// Synthetic cross recorded on a tape: cross = component_b + component_c in
// the representation domain (or the physical variant, see dataset.hpp).
struct CrossVars {
  Var cross;
  Var component_b;
  Var component_c;
};

// Mean of (x - target)^2 over every patch of every scale (equal scale weight).
Var multiscale_least_squares(Tape& tape, const std::vector<Var>& score_grids, double target);

struct ReconTerms {
  Var r1, r2, r3, r4;
};

// r1 = |g(c) - c|, r2 = |g(g(a)) - g(a)|, r3 = |g(cross) - c(cross)|,
// r4 = |(cross - g(cross)) - b(cross)|; all per-element means. `g_a` must be
// the already-recorded g(a) so the idempotence term shares its subgraph.
ReconTerms reconstruction_losses(Tape& tape, const MaskNetwork& g, const Lease& gp, Var c, Var a,
                                 Var g_a, const CrossVars& cross);

// Generator-side adversarial terms; the discriminator leases must be frozen
// (leased with requires_grad = false).
std::pair<Var, Var> generator_gan_losses(Tape& tape, const MultiScaleDiscriminator& d_c,
                                         const Lease& dcp, const MultiScaleDiscriminator& d_a,
                                         const Lease& dap, Var g_a, Var cross, GanMode mode);

// Weighted sum of the enabled terms, recorded on the tape.
Var generator_total(Tape& tape, const ReconTerms& recon, Var gan_c, Var gan_a,
                    const LossWeights& w);

// Same arithmetic on plain scalars (fills GeneratorLossReport::total).
double generator_total(const GeneratorLossReport& report, const LossWeights& w);

// l(d_C(g(a)), 0) + l(d_C(c), 1) and l(d_A(cross), 0) + l(d_A(a), 1).
// Fake inputs must already be detached from the generator.
std::pair<Var, Var> discriminator_losses(Tape& tape, const MultiScaleDiscriminator& d_c,
                                         const Lease& dcp, const MultiScaleDiscriminator& d_a,
                                         const Lease& dap, Var g_a_detached, Var cross_detached,
                                         Var c, Var a);

}  // namespace voxsep::loss

#endif  // VOXSEP_LOSSES_HPP
