// include/voxsep/trainer.hpp
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
// Alternating optimization: per step, the discriminators update once (or
// disc_updates_per_step times) on detached generator outputs, then the
// generator updates once on the composite objective with the discriminators
// frozen. Batch draws are a pure function of (seed, step), so resuming from a
// checkpoint replays the exact remaining trajectory.

#ifndef VOXSEP_TRAINER_HPP
#define VOXSEP_TRAINER_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "voxsep/adam.hpp"
#include "voxsep/dataset.hpp"
#include "voxsep/losses.hpp"
#include "voxsep/model.hpp"
#include "voxsep/stft.hpp"

namespace voxsep::train {

// Parameter storage precision. Arithmetic always runs in double; F32 rounds
// parameters and Adam moments to float32 after every update, which is also
// how they are stored in checkpoints.
enum class Precision { F32, F64 };

struct TrainingConfig {
  uint64_t seed = 7;
  int64_t total_steps = 2000;
  double lr_initial = 0.0001;
  int64_t lr_halving_step = -1;  // -1: half way through total_steps
  double beta1 = 0.5;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int64_t batch_size = 1;  // the pipeline is built around single-sample steps
  int64_t disc_updates_per_step = 1;
  int64_t checkpoint_interval = 500;
  Precision precision = Precision::F32;

  loss::LossWeights weights;
  loss::GanMode gan_mode = loss::GanMode::Standard;
  data::CrossDomain cross_domain = data::CrossDomain::Representation;
  bool cross_detach = false;

  model::MaskNetworkConfig gen = model::MaskNetworkConfig::toy();
  model::DiscriminatorConfig disc = model::DiscriminatorConfig::toy();
  dsp::StftConfig stft = dsp::StftConfig::toy();

  std::string data_dir;

  int64_t halving_step_effective() const {
    return lr_halving_step >= 0 ? lr_halving_step : total_steps / 2;
  }
  void validate() const;
};

// lr_initial before the halving step, lr_initial/2 from it onward (a single
// halving, never repeated).
double lr_at(int64_t step, const TrainingConfig& cfg);

struct TrainState {
  explicit TrainState(const TrainingConfig& cfg);

  int64_t step = 0;
  uint64_t seed = 0;
  model::MaskNetwork gen;
  model::MultiScaleDiscriminator d_c;
  model::MultiScaleDiscriminator d_a;
  ad::AdamState adam_g, adam_dc, adam_da;
};

struct StepReport {
  loss::GeneratorLossReport gen;
  double loss_dc = 0.0;
  double loss_da = 0.0;
};

StepReport train_step(TrainState& state, const TrainingConfig& cfg,
                      const data::Dataset& mixtures, const data::Dataset& sources);

// Loss log schema (one row per step).
std::string loss_log_header();  // "step,r1,r2,r3,r4,gan_c,gan_a,total"
std::string loss_log_row(int64_t step, const loss::GeneratorLossReport& rep);

// ---- checkpoints -----------------------------------------------------------

// Binary layout (little-endian throughout):
//   magic "VSEPCKPT", u32 version, u8 value dtype (4 = f32, 8 = f64),
//   u64 seed, i64 step,
//   model/stft geometry block,
//   3 parameter groups (generator, d_C, d_A):
//     u32 count, then per parameter: u16 name length, name bytes, u8 rank,
//     i64 dims, raw values; then Adam state (beta1, beta2, eps as f64,
//     u64 t, then m and v arrays per parameter),
//   u64 FNV-1a hash of everything before it.
void checkpoint_save(const TrainState& state, const TrainingConfig& cfg, const std::string& path);

// Rebuilds the state from `cfg` and overwrites it with the stored values.
// Model/stft geometry recorded in the file must match `cfg` exactly
// (ConfigMismatchError names both sides). Corrupt or truncated files raise
// CorruptFileError without touching any caller state.
TrainState checkpoint_load(const std::string& path, const TrainingConfig& cfg);

// Reads only the geometry/seed header so callers can construct a matching
// config before a full load.
void checkpoint_peek_config(const std::string& path, TrainingConfig& cfg);

// ---- config files ----------------------------------------------------------

// Text config: one `key = value` per line, '#' comments. Unknown keys raise
// ContractError listing every valid key.
TrainingConfig parse_config_file(const std::string& path);
void apply_config_entry(TrainingConfig& cfg, const std::string& key, const std::string& value);
std::string config_to_text(const TrainingConfig& cfg);

}  // namespace voxsep::train

#endif  // VOXSEP_TRAINER_HPP
