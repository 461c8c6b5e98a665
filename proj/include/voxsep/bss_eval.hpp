// include/voxsep/bss_eval.hpp
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
// Whole-track SDR/SIR from the classical decomposition of an estimate into
// target, interference and artifact parts. The target projection spans delays
// 0..L-1 of references[0]; the interference space spans all references'
// delays. Projections are solved through the Gram system of the delayed
// references.

#ifndef VOXSEP_BSS_EVAL_HPP
#define VOXSEP_BSS_EVAL_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace voxsep::bss {

constexpr double kDbCap = 200.0;  // +/- cap so medians stay finite

struct BssDecomposition {
  std::vector<double> s_target;
  std::vector<double> e_interf;
  std::vector<double> e_artif;
  bool gram_regularized = false;  // singular Gram system was diagonally loaded
};

// references[0] is the target source; remaining entries are interferers.
// All sequences must share the estimate's length. filter_len >= 1.
BssDecomposition decompose(const std::vector<double>& estimate,
                           const std::vector<std::vector<double>>& references,
                           int64_t filter_len);

struct SdrSir {
  double sdr_db = 0.0;
  double sir_db = 0.0;
  bool capped = false;  // a ratio hit the +/-200 dB cap
};

SdrSir sdr_sir(const BssDecomposition& dec);

struct TrackMetric {
  std::string id;
  double sdr_db = 0.0;
  double sir_db = 0.0;
};

struct MetricReport {
  std::vector<TrackMetric> per_track;
  double median_sdr_db = 0.0;
  double median_sir_db = 0.0;
};

// Median with the lower-middle convention for even counts: the element at
// index (n-1)/2 of the sorted values.
double median_lower(std::vector<double> values);

MetricReport median_report(std::vector<TrackMetric> items);

}  // namespace voxsep::bss

#endif  // VOXSEP_BSS_EVAL_HPP
