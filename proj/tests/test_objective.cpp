// tests/test_objective.cpp
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

#include <cmath>

#include "doctest.h"
#include "test_util.hpp"
#include "voxsep/dataset.hpp"
#include "voxsep/losses.hpp"
#include "voxsep/model.hpp"
#include "voxsep/rng.hpp"

using namespace voxsep;
using ad::Tape;
using ad::Tensor;
using ad::Var;
using model::MaskNetwork;
using model::MaskNetworkConfig;
using model::MultiScaleDiscriminator;
using vtest::random_tensor;

namespace {

MaskNetwork identity_like_generator(uint64_t seed) {
  MaskNetwork net(MaskNetworkConfig::toy(), seed);
  const int idx = net.params().find("head.bias");
  net.params().value(static_cast<size_t>(idx)).fill(1e6);  // mask ~ 1
  return net;
}

}  // namespace

TEST_CASE("least_squares examples") {
  Tape t;
  CHECK(ad::least_squares(t.constant(Tensor::scalar(0.0)), 0.0).value().at(0) == 0.0);
  CHECK(ad::least_squares(t.constant(Tensor::scalar(1.0)), 0.0).value().at(0) == 1.0);
  Var grid = t.constant(Tensor({2}, {0.5, 1.5}));
  CHECK(ad::least_squares(grid, 1.0).value().at(0) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("reconstruction losses: identity and saturation stubs") {
  std::mt19937_64 rng = make_stream(71, 1);
  MaskNetwork g = identity_like_generator(5);
  Tape t;
  model::Lease gp = model::lease(t, g.params(), false);
  Var a = t.constant(random_tensor({1, 1, 32, 32}, rng, 0.0, 1.0));
  Var c = t.constant(random_tensor({1, 1, 32, 32}, rng, 0.0, 1.0));
  Var g_a = g.apply(t, gp, a);
  // degenerate cross: b_est = a - g(a) ~ 0, so cross ~ c
  loss::CrossVars cross = data::make_cross(t, ad::sub(a, g_a), c,
                                           data::CrossDomain::Representation, 0.3, false);
  loss::ReconTerms terms = loss::reconstruction_losses(t, g, gp, c, a, g_a, cross);
  CHECK(terms.r1.value().at(0) < 1e-9);  // g acts as identity on c
  CHECK(terms.r2.value().at(0) < 1e-9);  // mask ~ 1 makes g idempotent
  CHECK(terms.r3.value().at(0) < 1e-9);  // cross ~ c and g(cross) ~ cross
  CHECK(terms.r4.value().at(0) < 1e-9);  // b_est ~ 0 recovered
}

TEST_CASE("discriminator loss arithmetic on stub score grids (Eqs. at optimum and worst)") {
  Tape t;
  auto grids = [&](double v) {
    return std::vector<Var>{t.constant(Tensor::full({1, 1, 2, 2}, v)),
                            t.constant(Tensor::full({1, 1, 1, 1}, v))};
  };
  auto dc_loss = [&](double fake_score, double real_score) {
    Var fake = loss::multiscale_least_squares(t, grids(fake_score), 0.0);
    Var real = loss::multiscale_least_squares(t, grids(real_score), 1.0);
    return ad::add(fake, real).value().at(0);
  };
  CHECK(dc_loss(0.0, 1.0) == 0.0);                                 // optimum
  CHECK(dc_loss(0.5, 0.5) == doctest::Approx(0.5).epsilon(1e-15)); // undecided
  CHECK(dc_loss(1.0, 0.0) == doctest::Approx(2.0).epsilon(1e-15)); // worst labeling
}

TEST_CASE("generator GAN losses on stub discriminators") {
  std::mt19937_64 rng = make_stream(72, 1);
  // zero heads make every score zero regardless of input
  MultiScaleDiscriminator d_c(model::DiscriminatorConfig::toy(), 31);
  MultiScaleDiscriminator d_a(model::DiscriminatorConfig::toy(), 32);
  for (auto* d : {&d_c, &d_a})
    for (size_t i = 0; i < d->params().size(); ++i)
      if (d->params().name(i).find("head") != std::string::npos)
        d->params().value(i).fill(0.0);

  Tape t;
  model::Lease dcp = model::lease(t, d_c.params(), false);
  model::Lease dap = model::lease(t, d_a.params(), false);
  Var g_a = t.constant(random_tensor({1, 1, 32, 32}, rng, 0.0, 1.0));
  Var cross = t.constant(random_tensor({1, 1, 32, 32}, rng, 0.0, 1.0));

  auto [pc, pa] = loss::generator_gan_losses(t, d_c, dcp, d_a, dap, g_a, cross,
                                             loss::GanMode::PaperLiteral);
  CHECK(pc.value().at(0) == 0.0);  // -l(0,0) = 0
  CHECK(pa.value().at(0) == 0.0);

  auto [sc, sa] = loss::generator_gan_losses(t, d_c, dcp, d_a, dap, g_a, cross,
                                             loss::GanMode::Standard);
  CHECK(sc.value().at(0) == doctest::Approx(1.0).epsilon(1e-15));  // l(0,1) = 1
  CHECK(sa.value().at(0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("paper-literal GAN scores of one give -1") {
  // all-scores-one via constant grids: -l(1,0) = -1
  Tape t;
  std::vector<Var> ones{t.constant(Tensor::full({1, 1, 2, 2}, 1.0))};
  Var ls = ad::scale(loss::multiscale_least_squares(t, ones, 0.0), -1.0);
  CHECK(ls.value().at(0) == doctest::Approx(-1.0).epsilon(1e-15));
  // standard mode with scores one: l(1,1) = 0
  Var std_ls = loss::multiscale_least_squares(t, ones, 1.0);
  CHECK(std_ls.value().at(0) == 0.0);
}

TEST_CASE("generator_total arithmetic") {
  loss::GeneratorLossReport rep;
  rep.r1 = rep.r2 = rep.r3 = rep.r4 = rep.gan_c = rep.gan_a = 1.0;
  loss::LossWeights w;
  CHECK(loss::generator_total(rep, w) == doctest::Approx(5.0).epsilon(1e-15));

  SUBCASE("disabling r2 drops its unit contribution") {
    w.r2_enabled = false;
    CHECK(loss::generator_total(rep, w) == doctest::Approx(4.0).epsilon(1e-15));
  }
  SUBCASE("all terms zero") {
    loss::GeneratorLossReport zero;
    CHECK(loss::generator_total(zero, w) == 0.0);
  }
  SUBCASE("disabling equals a zero weight") {
    loss::LossWeights disabled = w;
    disabled.r3_enabled = false;
    loss::LossWeights zeroed = w;
    zeroed.w_r3 = 0.0;
    CHECK(loss::generator_total(rep, disabled) == loss::generator_total(rep, zeroed));
  }
  SUBCASE("linearity in each term") {
    loss::GeneratorLossReport rep2 = rep;
    rep2.r4 = 3.0;
    CHECK(loss::generator_total(rep2, w) - loss::generator_total(rep, w) ==
          doctest::Approx(2.0 * w.w_r4).epsilon(1e-15));
  }
}

TEST_CASE("tape-level generator_total matches the scalar arithmetic") {
  Tape t;
  loss::ReconTerms terms{t.constant(Tensor::scalar(0.25)), t.constant(Tensor::scalar(0.5)),
                         t.constant(Tensor::scalar(0.125)), t.constant(Tensor::scalar(1.5))};
  Var gan_c = t.constant(Tensor::scalar(0.75));
  Var gan_a = t.constant(Tensor::scalar(0.3));
  loss::LossWeights w;
  w.w_r1 = 2.0;
  w.r2_enabled = false;
  Var total = loss::generator_total(t, terms, gan_c, gan_a, w);
  loss::GeneratorLossReport rep{0.25, 0.5, 0.125, 1.5, 0.75, 0.3, 0.0};
  CHECK(total.value().at(0) == doctest::Approx(loss::generator_total(rep, w)).epsilon(1e-14));
}

TEST_CASE("representation-domain crosses make r3 and r4 coincide") {
  // cross = b + c exactly, so (cross - g(cross)) - b == c - g(cross); the two
  // reconstruction penalties are the same number on such crosses.
  std::mt19937_64 rng = make_stream(73, 1);
  MaskNetwork g(MaskNetworkConfig::toy(), 55);
  Tape t;
  model::Lease gp = model::lease(t, g.params(), false);
  Var a = t.constant(random_tensor({1, 1, 32, 32}, rng, 0.0, 1.0));
  Var c = t.constant(random_tensor({1, 1, 32, 32}, rng, 0.0, 1.0));
  Var g_a = g.apply(t, gp, a);
  loss::CrossVars cross = data::make_cross(t, ad::sub(a, g_a), c,
                                           data::CrossDomain::Representation, 0.3, false);
  loss::ReconTerms terms = loss::reconstruction_losses(t, g, gp, c, a, g_a, cross);
  CHECK(terms.r3.value().at(0) ==
        doctest::Approx(terms.r4.value().at(0)).epsilon(1e-9));
}

TEST_CASE("loss terms pass finite-difference checks through the generator") {
  std::mt19937_64 rng = make_stream(74, 1);
  MaskNetworkConfig cfg;
  cfg.grid = 8;
  cfg.base_width = 2;
  cfg.residual_blocks = 1;
  MaskNetwork g(cfg, 77);
  const Tensor a = random_tensor({1, 1, 8, 8}, rng, 0.1, 1.0);
  const Tensor c = random_tensor({1, 1, 8, 8}, rng, 0.1, 1.0);

  // check d(total)/d(theta) for a few parameters of every layer kind
  Tape tape;
  model::Lease gp = model::lease(tape, g.params(), true);
  Var av = tape.constant(a);
  Var cv = tape.constant(c);
  Var g_a = g.apply(tape, gp, av);
  loss::CrossVars cross = data::make_cross(tape, ad::sub(av, g_a), cv,
                                           data::CrossDomain::Representation, 0.3, false);
  loss::ReconTerms terms = loss::reconstruction_losses(tape, g, gp, cv, av, g_a, cross);
  Var total = loss::generator_total(tape, terms, tape.constant(Tensor::scalar(0.0)),
                                    tape.constant(Tensor::scalar(0.0)), loss::LossWeights{});
  tape.backward(total);

  auto eval = [&](const model::ParamStore& params) {
    Tape t2;
    model::Lease p2 = model::lease(t2, params, false);
    Var a2 = t2.constant(a);
    Var c2 = t2.constant(c);
    Var ga2 = g.apply(t2, p2, a2);
    loss::CrossVars cr2 = data::make_cross(t2, ad::sub(a2, ga2), c2,
                                           data::CrossDomain::Representation, 0.3, false);
    loss::ReconTerms tm2 = loss::reconstruction_losses(t2, g, p2, c2, a2, ga2, cr2);
    return loss::generator_total(t2, tm2, t2.constant(Tensor::scalar(0.0)),
                                 t2.constant(Tensor::scalar(0.0)), loss::LossWeights{})
        .value()
        .at(0);
  };

  std::mt19937_64 pick = make_stream(75, 1);
  const double h = 1e-5;
  double max_rel = 0.0;
  for (size_t pi = 0; pi < g.params().size(); ++pi) {
    for (int probe = 0; probe < 2; ++probe) {
      const int64_t j =
          static_cast<int64_t>(uniform_index(pick, static_cast<uint64_t>(g.params().value(pi).numel())));
      const double orig = g.params().value(pi).at(j);
      g.params().value(pi).at(j) = orig + h;
      const double fp = eval(g.params());
      g.params().value(pi).at(j) = orig - h;
      const double fm = eval(g.params());
      g.params().value(pi).at(j) = orig;
      const double fd = (fp - fm) / (2.0 * h);
      const double an = tape.grad(gp[pi].id).at(j);
      const double scale = std::max(std::fabs(fd), std::fabs(an));
      if (scale > 1e-8) max_rel = std::max(max_rel, std::fabs(fd - an) / scale);
    }
  }
  CHECK(max_rel < 1e-3);
}
