// tests/test_training.cpp
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
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "test_util.hpp"
#include "voxsep/dataset.hpp"
#include "voxsep/error.hpp"
#include "voxsep/trainer.hpp"

namespace fs = std::filesystem;
using namespace voxsep;
using train::TrainingConfig;
using train::TrainState;

namespace {

// Small in-memory toy datasets shared by the tests in this file.
struct ToyFixture {
  TrainingConfig cfg;
  data::Dataset mixtures;
  data::Dataset sources;

  explicit ToyFixture(uint64_t seed = 7, int64_t tracks = 2, double duration = 0.25) {
    cfg.seed = seed;
    cfg.total_steps = 50;
    cfg.precision = train::Precision::F64;
    cfg.gen = model::MaskNetworkConfig::toy();
    cfg.disc = model::DiscriminatorConfig::toy();
    cfg.stft = dsp::StftConfig::toy();
    data::ToyDatasets toy = data::make_toy_datasets(seed, {tracks, tracks}, cfg.stft, duration);
    mixtures.role = data::DatasetRole::Mixtures;
    sources.role = data::DatasetRole::Sources;
    for (const auto& clip : toy.mixtures)
      for (const auto& seg : dsp::segment(clip, cfg.stft)) {
        dsp::CompressedFrame f = dsp::compress(dsp::stft(seg.clip, cfg.stft), cfg.stft.compression_p);
        mixtures.samples.push_back({std::move(f.magnitude), std::move(f.phase), "mem", 0, seg.true_length});
      }
    for (const auto& clip : toy.instrumentals)
      for (const auto& seg : dsp::segment(clip, cfg.stft)) {
        dsp::CompressedFrame f = dsp::compress(dsp::stft(seg.clip, cfg.stft), cfg.stft.compression_p);
        sources.samples.push_back({std::move(f.magnitude), std::move(f.phase), "mem", 0, seg.true_length});
      }
  }
};

double param_checksum(const model::ParamStore& store) {
  double s = 0.0;
  for (size_t i = 0; i < store.size(); ++i)
    for (int64_t j = 0; j < store.value(i).numel(); ++j) s += store.value(i).at(j) * (1.0 + 0.01 * (j % 7));
  return s;
}

}  // namespace

TEST_CASE("learning-rate schedule: a single halving") {
  TrainingConfig cfg;
  cfg.lr_initial = 0.0001;
  cfg.lr_halving_step = 100000;
  cfg.total_steps = 200000;
  CHECK(train::lr_at(0, cfg) == 0.0001);
  CHECK(train::lr_at(99999, cfg) == 0.0001);
  CHECK(train::lr_at(100000, cfg) == doctest::Approx(0.00005).epsilon(1e-15));

  SUBCASE("no further halvings after the first") {
    TrainingConfig toy;
    toy.lr_initial = 0.0001;
    toy.lr_halving_step = 1000;
    toy.total_steps = 10000;
    CHECK(train::lr_at(5000, toy) == doctest::Approx(0.00005).epsilon(1e-15));
    CHECK(train::lr_at(9999, toy) == doctest::Approx(0.00005).epsilon(1e-15));
  }
  SUBCASE("auto halving point sits at half the run") {
    TrainingConfig toy;
    toy.total_steps = 2000;
    toy.lr_halving_step = -1;
    CHECK(toy.halving_step_effective() == 1000);
    CHECK(train::lr_at(999, toy) == toy.lr_initial);
    CHECK(train::lr_at(1000, toy) == doctest::Approx(toy.lr_initial / 2).epsilon(1e-15));
  }
}

TEST_CASE("one toy step: all terms finite and reported") {
  ToyFixture fx;
  TrainState state(fx.cfg);
  const train::StepReport rep = train::train_step(state, fx.cfg, fx.mixtures, fx.sources);
  CHECK(state.step == 1);
  for (double v : {rep.gen.r1, rep.gen.r2, rep.gen.r3, rep.gen.r4, rep.gen.gan_c, rep.gen.gan_a,
                   rep.gen.total, rep.loss_dc, rep.loss_da})
    CHECK(std::isfinite(v));
  CHECK(rep.gen.total ==
        doctest::Approx(loss::generator_total(rep.gen, fx.cfg.weights)).epsilon(1e-12));
}

TEST_CASE("training is bit-deterministic under a fixed seed (f64 mode)") {
  ToyFixture fx;
  TrainState s1(fx.cfg), s2(fx.cfg);
  for (int step = 0; step < 5; ++step) {
    const train::StepReport r1 = train::train_step(s1, fx.cfg, fx.mixtures, fx.sources);
    const train::StepReport r2 = train::train_step(s2, fx.cfg, fx.mixtures, fx.sources);
    CHECK(r1.gen.total == r2.gen.total);  // bit-level
    CHECK(r1.loss_dc == r2.loss_dc);
    CHECK(r1.loss_da == r2.loss_da);
  }
  CHECK(param_checksum(s1.gen.params()) == param_checksum(s2.gen.params()));
}

TEST_CASE("update isolation between generator and discriminators") {
  ToyFixture fx;
  SUBCASE("with every generator term disabled, g does not move while d does") {
    TrainingConfig cfg = fx.cfg;
    cfg.weights.r1_enabled = cfg.weights.r2_enabled = false;
    cfg.weights.r3_enabled = cfg.weights.r4_enabled = false;
    cfg.weights.gan_c_enabled = cfg.weights.gan_a_enabled = false;
    TrainState state(cfg);
    const double g_before = param_checksum(state.gen.params());
    const double dc_before = param_checksum(state.d_c.params());
    train::train_step(state, cfg, fx.mixtures, fx.sources);
    CHECK(param_checksum(state.gen.params()) == g_before);
    CHECK(param_checksum(state.d_c.params()) != dc_before);
  }
  SUBCASE("with discriminator updates off, d does not move while g does") {
    TrainingConfig cfg = fx.cfg;
    cfg.disc_updates_per_step = 0;
    TrainState state(cfg);
    const double g_before = param_checksum(state.gen.params());
    const double dc_before = param_checksum(state.d_c.params());
    const double da_before = param_checksum(state.d_a.params());
    train::train_step(state, cfg, fx.mixtures, fx.sources);
    CHECK(param_checksum(state.gen.params()) != g_before);
    CHECK(param_checksum(state.d_c.params()) == dc_before);
    CHECK(param_checksum(state.d_a.params()) == da_before);
  }
}

TEST_CASE("r1 decreases over the first 50 toy steps without GAN terms") {
  double early_sum = 0.0, late_sum = 0.0;
  for (uint64_t seed : {21ULL, 22ULL, 23ULL}) {
    ToyFixture fx(seed);
    TrainingConfig cfg = fx.cfg;
    cfg.weights.gan_c_enabled = cfg.weights.gan_a_enabled = false;
    cfg.lr_initial = 0.001;
    TrainState state(cfg);
    // start near the identity mask
    state.gen.params()
        .value(static_cast<size_t>(state.gen.params().find("head.bias")))
        .fill(4.0);
    std::vector<double> r1;
    for (int step = 0; step < 50; ++step)
      r1.push_back(train::train_step(state, cfg, fx.mixtures, fx.sources).gen.r1);
    for (int i = 0; i < 10; ++i) early_sum += r1[static_cast<size_t>(i)];
    for (int i = 40; i < 50; ++i) late_sum += r1[static_cast<size_t>(i)];
  }
  CHECK(late_sum < early_sum);
}

TEST_CASE("checkpoint round trip: byte-identical files, identical resumed losses") {
  const fs::path dir = fs::temp_directory_path() / "voxsep_ckpt_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  ToyFixture fx;

  // uninterrupted reference run: 10 + 10 steps
  TrainState ref(fx.cfg);
  std::vector<double> ref_losses;
  for (int step = 0; step < 20; ++step)
    ref_losses.push_back(train::train_step(ref, fx.cfg, fx.mixtures, fx.sources).gen.total);

  // interrupted run, checkpointed at step 10
  TrainState run(fx.cfg);
  for (int step = 0; step < 10; ++step) train::train_step(run, fx.cfg, fx.mixtures, fx.sources);
  const std::string ckpt = (dir / "step10.ckpt").string();
  train::checkpoint_save(run, fx.cfg, ckpt);

  TrainState resumed = train::checkpoint_load(ckpt, fx.cfg);
  CHECK(resumed.step == 10);
  for (int step = 10; step < 20; ++step) {
    const double loss = train::train_step(resumed, fx.cfg, fx.mixtures, fx.sources).gen.total;
    CHECK(loss == ref_losses[static_cast<size_t>(step)]);  // bit-identical
  }

  SUBCASE("save -> load -> save is byte-identical") {
    const std::string ckpt2 = (dir / "step10_again.ckpt").string();
    train::checkpoint_save(train::checkpoint_load(ckpt, fx.cfg), fx.cfg, ckpt2);
    std::ifstream a(ckpt, std::ios::binary), b(ckpt2, std::ios::binary);
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
    CHECK(!sa.empty());
  }
  SUBCASE("mismatched model config errors, naming both geometries") {
    TrainingConfig other = fx.cfg;
    other.gen.base_width = 16;
    CHECK_THROWS_WITH_AS(train::checkpoint_load(ckpt, other), doctest::Contains("width=16"),
                         ConfigMismatchError);
  }
  SUBCASE("truncated checkpoint raises a corrupt-file error") {
    std::ifstream in(ckpt, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    std::ofstream out(dir / "trunc.ckpt", std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
    out.close();
    CHECK_THROWS_AS(train::checkpoint_load((dir / "trunc.ckpt").string(), fx.cfg),
                    CorruptFileError);
  }
  SUBCASE("flipped payload byte raises a corrupt-file error") {
    std::ifstream in(ckpt, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    bytes[bytes.size() / 2] = static_cast<char>(bytes[bytes.size() / 2] ^ 0x01);
    std::ofstream out(dir / "flip.ckpt", std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    CHECK_THROWS_AS(train::checkpoint_load((dir / "flip.ckpt").string(), fx.cfg),
                    CorruptFileError);
  }
  fs::remove_all(dir);
}

TEST_CASE("f32 precision mode keeps state exactly float-representable") {
  ToyFixture fx;
  TrainingConfig cfg = fx.cfg;
  cfg.precision = train::Precision::F32;
  TrainState state(cfg);
  for (int step = 0; step < 3; ++step) train::train_step(state, cfg, fx.mixtures, fx.sources);
  for (size_t i = 0; i < state.gen.params().size(); ++i) {
    const ad::Tensor& t = state.gen.params().value(i);
    for (int64_t j = 0; j < t.numel(); ++j)
      CHECK(t.at(j) == static_cast<double>(static_cast<float>(t.at(j))));
  }

  SUBCASE("f32 checkpoints round trip bit-exactly too") {
    const fs::path dir = fs::temp_directory_path() / "voxsep_ckpt_f32";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string ckpt = (dir / "s.ckpt").string();
    train::checkpoint_save(state, cfg, ckpt);
    TrainState loaded = train::checkpoint_load(ckpt, cfg);
    CHECK(param_checksum(loaded.gen.params()) == param_checksum(state.gen.params()));
    fs::remove_all(dir);
  }
}

TEST_CASE("config file parsing") {
  const fs::path dir = fs::temp_directory_path() / "voxsep_cfg_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "good.conf");
    out << "# toy run\n";
    out << "seed = 13\n";
    out << "total_steps = 123\n";
    out << "gan_mode = paper\n";
    out << "disable_losses = r2, gan_a\n";
    out << "w_r1 = 2.0\n";
  }
  TrainingConfig cfg = train::parse_config_file((dir / "good.conf").string());
  CHECK(cfg.seed == 13);
  CHECK(cfg.total_steps == 123);
  CHECK(cfg.gan_mode == loss::GanMode::PaperLiteral);
  CHECK_FALSE(cfg.weights.r2_enabled);
  CHECK_FALSE(cfg.weights.gan_a_enabled);
  CHECK(cfg.weights.w_r1 == 2.0);

  SUBCASE("round trip through config_to_text") {
    const std::string text = train::config_to_text(cfg);
    std::ofstream out(dir / "echo.conf");
    out << text;
    out.close();
    TrainingConfig cfg2 = train::parse_config_file((dir / "echo.conf").string());
    CHECK(cfg2.seed == cfg.seed);
    CHECK(cfg2.total_steps == cfg.total_steps);
    CHECK(cfg2.weights.r2_enabled == cfg.weights.r2_enabled);
    CHECK(cfg2.weights.w_r1 == cfg.weights.w_r1);
  }
  SUBCASE("unknown keys list the valid set") {
    std::ofstream out(dir / "bad.conf");
    out << "learning_rate = 3\n";
    out.close();
    CHECK_THROWS_WITH_AS(train::parse_config_file((dir / "bad.conf").string()),
                         doctest::Contains("lr_initial"), ContractError);
  }
  fs::remove_all(dir);
}

TEST_CASE("grid/stft mismatch is rejected by validate") {
  TrainingConfig cfg;
  cfg.gen = model::MaskNetworkConfig::toy();
  cfg.disc = model::DiscriminatorConfig::toy();
  cfg.stft = dsp::StftConfig();  // 256-grid STFT against a 32-grid model
  CHECK_THROWS_AS(cfg.validate(), ConfigMismatchError);
}
