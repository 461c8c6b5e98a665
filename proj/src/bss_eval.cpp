// src/bss_eval.cpp
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

#include "voxsep/bss_eval.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "voxsep/error.hpp"

namespace voxsep::bss {

namespace {

// Delay convention: "r delayed by tau" is the length-n sequence
// t -> r[t - tau], zero for t < tau. The Gram entries are therefore plain
// lag correlations minus a short boundary tail, which lets each stripe of
// the block-Toeplitz-like matrix be filled from one O(n) pass.

// <a, b delayed by tau> over the length-n window.
double delayed_dot(const std::vector<double>& a, const std::vector<double>& b, int64_t tau) {
  const int64_t n = static_cast<int64_t>(a.size());
  double s = 0.0;
  for (int64_t t = tau; t < n; ++t) s += a[static_cast<size_t>(t)] * b[static_cast<size_t>(t - tau)];
  return s;
}

// Fills G[(a,ta),(b,tb)] for one reference pair and one lag d = tb - ta >= 0.
// S(m) = sum_{u=0}^{m} ra[u+d]*rb[u]; the entry at tb is S(n-1-tb).
void fill_lag_stripe(std::vector<double>& gram, int64_t dim, int64_t L,
                     const std::vector<double>& ra, const std::vector<double>& rb, int64_t a,
                     int64_t b, int64_t d) {
  const int64_t n = static_cast<int64_t>(ra.size());
  double s = 0.0;
  for (int64_t u = 0; u + d < n; ++u) s += ra[static_cast<size_t>(u + d)] * rb[static_cast<size_t>(u)];
  // Walk tb from d upward: entry(tb) = S(n-1-tb); peel one product per step.
  for (int64_t tb = d; tb < L; ++tb) {
    if (tb > d) {
      const int64_t m = n - tb;  // index dropped when shrinking to S(n-1-tb)
      if (m + d < n && m >= 0) s -= ra[static_cast<size_t>(m + d)] * rb[static_cast<size_t>(m)];
    }
    const int64_t ta = tb - d;
    const int64_t row = a * L + ta, col = b * L + tb;
    gram[static_cast<size_t>(row * dim + col)] = s;
    gram[static_cast<size_t>(col * dim + row)] = s;
  }
}

// Cholesky solve of the symmetric positive definite system G x = b (in
// place); returns false if a pivot collapses.
bool cholesky_solve(std::vector<double>& g, std::vector<double>& x, int64_t n) {
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t j = 0; j <= i; ++j) {
      double s = g[static_cast<size_t>(i * n + j)];
      for (int64_t k = 0; k < j; ++k)
        s -= g[static_cast<size_t>(i * n + k)] * g[static_cast<size_t>(j * n + k)];
      if (i == j) {
        if (s <= 0.0) return false;
        g[static_cast<size_t>(i * n + i)] = std::sqrt(s);
      } else {
        g[static_cast<size_t>(i * n + j)] = s / g[static_cast<size_t>(j * n + j)];
      }
    }
  }
  for (int64_t i = 0; i < n; ++i) {
    double s = x[static_cast<size_t>(i)];
    for (int64_t k = 0; k < i; ++k) s -= g[static_cast<size_t>(i * n + k)] * x[static_cast<size_t>(k)];
    x[static_cast<size_t>(i)] = s / g[static_cast<size_t>(i * n + i)];
  }
  for (int64_t i = n - 1; i >= 0; --i) {
    double s = x[static_cast<size_t>(i)];
    for (int64_t k = i + 1; k < n; ++k) s -= g[static_cast<size_t>(k * n + i)] * x[static_cast<size_t>(k)];
    x[static_cast<size_t>(i)] = s / g[static_cast<size_t>(i * n + i)];
  }
  return true;
}

std::vector<double> project(const std::vector<double>& estimate,
                            const std::vector<const std::vector<double>*>& refs, int64_t L,
                            bool* regularized) {
  const int64_t k = static_cast<int64_t>(refs.size());
  const int64_t dim = k * L;
  const int64_t n = static_cast<int64_t>(estimate.size());

  std::vector<double> gram(static_cast<size_t>(dim * dim));
#pragma omp parallel for collapse(2)
  for (int64_t a = 0; a < k; ++a)
    for (int64_t b = 0; b < k; ++b)
      for (int64_t d = 0; d < L; ++d) {
        // (a,b,d) covers pairs with tb-ta = d >= 0; the opposite-sign lags come
        // from (b,a,d). Each stripe also writes its mirror cells, so d == 0
        // needs only the a <= b half.
        if (d == 0 && a > b) continue;
        fill_lag_stripe(gram, dim, L, *refs[static_cast<size_t>(a)],
                        *refs[static_cast<size_t>(b)], a, b, d);
      }

  std::vector<double> coef(static_cast<size_t>(dim));
#pragma omp parallel for collapse(2)
  for (int64_t a = 0; a < k; ++a)
    for (int64_t ta = 0; ta < L; ++ta)
      coef[static_cast<size_t>(a * L + ta)] =
          delayed_dot(estimate, *refs[static_cast<size_t>(a)], ta);

  std::vector<double> chol = gram;
  std::vector<double> sol = coef;
  if (!cholesky_solve(chol, sol, dim)) {
    if (regularized) *regularized = true;
    std::cerr << "[bss] warning: singular Gram matrix, applying 1e-10 diagonal load\n";
    chol = gram;
    for (int64_t i = 0; i < dim; ++i) chol[static_cast<size_t>(i * dim + i)] += 1e-10;
    sol = coef;
    if (!cholesky_solve(chol, sol, dim))
      throw ContractError("bss decompose: Gram system unsolvable even after regularization");
  }

  std::vector<double> proj(static_cast<size_t>(n), 0.0);
  for (int64_t a = 0; a < k; ++a)
    for (int64_t ta = 0; ta < L; ++ta) {
      const double c = sol[static_cast<size_t>(a * L + ta)];
      if (c == 0.0) continue;
      const std::vector<double>& r = *refs[static_cast<size_t>(a)];
      for (int64_t t = ta; t < n; ++t)
        proj[static_cast<size_t>(t)] += c * r[static_cast<size_t>(t - ta)];
    }
  return proj;
}

double energy(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

}  // namespace

BssDecomposition decompose(const std::vector<double>& estimate,
                           const std::vector<std::vector<double>>& references,
                           int64_t filter_len) {
  if (references.empty()) throw ContractError("bss decompose: need at least one reference");
  if (filter_len < 1) throw ContractError("bss decompose: filter_len must be >= 1");
  if (estimate.empty()) throw ContractError("bss decompose: empty estimate");
  if (filter_len > static_cast<int64_t>(estimate.size()))
    throw ContractError("bss decompose: filter_len exceeds signal length");
  for (const auto& r : references)
    if (r.size() != estimate.size())
      throw ShapeError("bss decompose: reference length " + std::to_string(r.size()) +
                       " != estimate length " + std::to_string(estimate.size()));

  BssDecomposition dec;
  std::vector<const std::vector<double>*> target_only{&references[0]};
  std::vector<const std::vector<double>*> all;
  all.reserve(references.size());
  for (const auto& r : references) all.push_back(&r);

  dec.s_target = project(estimate, target_only, filter_len, &dec.gram_regularized);
  const std::vector<double> p_all =
      references.size() > 1 ? project(estimate, all, filter_len, &dec.gram_regularized)
                            : dec.s_target;

  const size_t n = estimate.size();
  dec.e_interf.resize(n);
  dec.e_artif.resize(n);
  for (size_t i = 0; i < n; ++i) {
    dec.e_interf[i] = p_all[i] - dec.s_target[i];
    dec.e_artif[i] = estimate[i] - p_all[i];
  }
  return dec;
}

namespace {
double ratio_db(double num, double den, bool* capped) {
  if (num <= 0.0) {
    *capped = true;
    return -kDbCap;
  }
  if (den <= 0.0) {
    *capped = true;
    return kDbCap;
  }
  const double db = 10.0 * std::log10(num / den);
  if (db > kDbCap || db < -kDbCap) *capped = true;
  return std::clamp(db, -kDbCap, kDbCap);
}
}  // namespace

SdrSir sdr_sir(const BssDecomposition& dec) {
  SdrSir out;
  const double et = energy(dec.s_target);
  std::vector<double> noise(dec.e_interf.size());
  for (size_t i = 0; i < noise.size(); ++i) noise[i] = dec.e_interf[i] + dec.e_artif[i];
  out.sdr_db = ratio_db(et, energy(noise), &out.capped);
  out.sir_db = ratio_db(et, energy(dec.e_interf), &out.capped);
  return out;
}

double median_lower(std::vector<double> values) {
  if (values.empty()) throw ContractError("median of empty set");
  std::sort(values.begin(), values.end());
  return values[(values.size() - 1) / 2];
}

MetricReport median_report(std::vector<TrackMetric> items) {
  if (items.empty()) throw ContractError("median_report: no items");
  MetricReport rep;
  std::vector<double> sdrs, sirs;
  sdrs.reserve(items.size());
  sirs.reserve(items.size());
  for (const TrackMetric& t : items) {
    sdrs.push_back(t.sdr_db);
    sirs.push_back(t.sir_db);
  }
  rep.median_sdr_db = median_lower(std::move(sdrs));
  rep.median_sir_db = median_lower(std::move(sirs));
  rep.per_track = std::move(items);
  return rep;
}

}  // namespace voxsep::bss
