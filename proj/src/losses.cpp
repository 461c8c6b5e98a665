// src/losses.cpp
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

#include "voxsep/losses.hpp"

#include "voxsep/error.hpp"

namespace voxsep::loss {

Var multiscale_least_squares(Tape&, const std::vector<Var>& score_grids, double target) {
  if (score_grids.empty()) throw ContractError("multiscale_least_squares: no score grids");
  Var acc = ad::least_squares(score_grids[0], target);
  for (size_t i = 1; i < score_grids.size(); ++i)
    acc = ad::add(acc, ad::least_squares(score_grids[i], target));
  return ad::scale(acc, 1.0 / static_cast<double>(score_grids.size()));
}

ReconTerms reconstruction_losses(Tape& tape, const MaskNetwork& g, const Lease& gp, Var c, Var a,
                                 Var g_a, const CrossVars& cross) {
  (void)a;
  ReconTerms t;
  Var g_c = g.apply(tape, gp, c);
  t.r1 = ad::l1_mean(g_c, c);
  Var g_g_a = g.apply(tape, gp, g_a);
  t.r2 = ad::l1_mean(g_g_a, g_a);
  Var g_cross = g.apply(tape, gp, cross.cross);
  t.r3 = ad::l1_mean(g_cross, cross.component_c);
  t.r4 = ad::l1_mean(ad::sub(cross.cross, g_cross), cross.component_b);
  return t;
}

std::pair<Var, Var> generator_gan_losses(Tape& tape, const MultiScaleDiscriminator& d_c,
                                         const Lease& dcp, const MultiScaleDiscriminator& d_a,
                                         const Lease& dap, Var g_a, Var cross, GanMode mode) {
  const std::vector<Var> sc = d_c.scores(tape, dcp, g_a);
  const std::vector<Var> sa = d_a.scores(tape, dap, cross);
  if (mode == GanMode::Standard) {
    return {multiscale_least_squares(tape, sc, 1.0), multiscale_least_squares(tape, sa, 1.0)};
  }
  return {ad::scale(multiscale_least_squares(tape, sc, 0.0), -1.0),
          ad::scale(multiscale_least_squares(tape, sa, 0.0), -1.0)};
}

Var generator_total(Tape& tape, const ReconTerms& recon, Var gan_c, Var gan_a,
                    const LossWeights& w) {
  Var total = tape.constant(ad::Tensor::scalar(0.0));
  if (w.r1_enabled) total = ad::add(total, ad::scale(recon.r1, w.w_r1));
  if (w.r2_enabled) total = ad::add(total, ad::scale(recon.r2, w.w_r2));
  if (w.r3_enabled) total = ad::add(total, ad::scale(recon.r3, w.w_r3));
  if (w.r4_enabled) total = ad::add(total, ad::scale(recon.r4, w.w_r4));
  if (w.gan_c_enabled) total = ad::add(total, ad::scale(gan_c, w.w_gan));
  if (w.gan_a_enabled) total = ad::add(total, ad::scale(gan_a, w.w_gan));
  return total;
}

double generator_total(const GeneratorLossReport& report, const LossWeights& w) {
  double total = 0.0;
  if (w.r1_enabled) total += w.w_r1 * report.r1;
  if (w.r2_enabled) total += w.w_r2 * report.r2;
  if (w.r3_enabled) total += w.w_r3 * report.r3;
  if (w.r4_enabled) total += w.w_r4 * report.r4;
  if (w.gan_c_enabled) total += w.w_gan * report.gan_c;
  if (w.gan_a_enabled) total += w.w_gan * report.gan_a;
  return total;
}

std::pair<Var, Var> discriminator_losses(Tape& tape, const MultiScaleDiscriminator& d_c,
                                         const Lease& dcp, const MultiScaleDiscriminator& d_a,
                                         const Lease& dap, Var g_a_detached, Var cross_detached,
                                         Var c, Var a) {
  Var loss_dc = ad::add(multiscale_least_squares(tape, d_c.scores(tape, dcp, g_a_detached), 0.0),
                        multiscale_least_squares(tape, d_c.scores(tape, dcp, c), 1.0));
  Var loss_da = ad::add(multiscale_least_squares(tape, d_a.scores(tape, dap, cross_detached), 0.0),
                        multiscale_least_squares(tape, d_a.scores(tape, dap, a), 1.0));
  return {loss_dc, loss_da};
}

}  // namespace voxsep::loss
