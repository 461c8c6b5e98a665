// src/trainer.cpp
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

#include "voxsep/trainer.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "voxsep/error.hpp"

namespace voxsep::train {

void TrainingConfig::validate() const {
  if (total_steps <= 0) throw ContractError("total_steps must be positive");
  if (lr_initial <= 0) throw ContractError("lr_initial must be positive");
  if (batch_size != 1) throw ContractError("batch_size must be 1");
  if (disc_updates_per_step < 0) throw ContractError("disc_updates_per_step must be >= 0");
  gen.validate();
  disc.validate();
  stft.validate();
  if (gen.grid != stft.model_bins() || gen.grid != stft.frames)
    throw ConfigMismatchError("model grid " + std::to_string(gen.grid) +
                              " does not match the STFT grid " +
                              std::to_string(stft.model_bins()) + "x" +
                              std::to_string(stft.frames) +
                              " (need grid == fft_size/2 == frames)");
  if (disc.grid != gen.grid)
    throw ConfigMismatchError("discriminator grid " + std::to_string(disc.grid) +
                              " != generator grid " + std::to_string(gen.grid));
}

double lr_at(int64_t step, const TrainingConfig& cfg) {
  if (step < 0) throw ContractError("lr_at: negative step");
  return step < cfg.halving_step_effective() ? cfg.lr_initial : cfg.lr_initial * 0.5;
}

TrainState::TrainState(const TrainingConfig& cfg)
    : seed(cfg.seed),
      gen(cfg.gen, cfg.seed),
      d_c(cfg.disc, cfg.seed ^ 0x5f444301ULL),
      d_a(cfg.disc, cfg.seed ^ 0x5f444102ULL),
      adam_g(ad::AdamState::init(gen.params().values(), cfg.beta1, cfg.beta2, cfg.adam_eps)),
      adam_dc(ad::AdamState::init(d_c.params().values(), cfg.beta1, cfg.beta2, cfg.adam_eps)),
      adam_da(ad::AdamState::init(d_a.params().values(), cfg.beta1, cfg.beta2, cfg.adam_eps)) {}

namespace {

void quantize_f32(ad::Tensor& t) {
  for (int64_t i = 0; i < t.numel(); ++i)
    t.at(i) = static_cast<double>(static_cast<float>(t.at(i)));
}

void apply_adam(model::ParamStore& store, const model::Lease& leased, ad::Tape& tape,
                ad::AdamState& adam, double lr, Precision precision) {
  std::vector<ad::Tensor*> params;
  std::vector<const ad::Tensor*> grads;
  params.reserve(store.size());
  grads.reserve(store.size());
  for (size_t i = 0; i < store.size(); ++i) {
    params.push_back(&store.value(i));
    grads.push_back(&tape.grad(leased[i].id));
  }
  ad::adam_step(params, grads, adam, lr);
  if (precision == Precision::F32) {
    for (size_t i = 0; i < store.size(); ++i) {
      quantize_f32(store.value(i));
      quantize_f32(adam.m[i]);
      quantize_f32(adam.v[i]);
    }
  }
}

void check_finite(double v, const char* term, int64_t step) {
  if (!std::isfinite(v))
    throw DivergenceError("non-finite loss term '" + std::string(term) + "' = " +
                          std::to_string(v) + " at step " + std::to_string(step) +
                          "; aborting. With gan_mode=paper the generator objective is unbounded "
                          "below; consider gan_mode=standard or a lower learning rate.");
}

}  // namespace

StepReport train_step(TrainState& state, const TrainingConfig& cfg,
                      const data::Dataset& mixtures, const data::Dataset& sources) {
  using ad::Tape;
  using ad::Var;

  const data::Batch batch = data::sample_batch(mixtures, sources, state.seed,
                                               static_cast<uint64_t>(state.step));
  const ad::Tensor a_t = data::grid_to_tensor(mixtures.samples[batch.mixture_index].grid);
  const ad::Tensor c_t = data::grid_to_tensor(sources.samples[batch.source_index].grid);
  const ad::Tensor cx_t = data::grid_to_tensor(sources.samples[batch.cross_source_index].grid);

  const double lr = lr_at(state.step, cfg);
  StepReport report;

  // (1) generator forward with no gradients; its outputs are this step's
  // detached fakes for both discriminators.
  ad::Tensor ga_detached, cross_detached;
  {
    Tape t0;
    model::Lease g0 = model::lease(t0, state.gen.params(), false);
    Var a0 = t0.constant(a_t);
    Var ga0 = state.gen.apply(t0, g0, a0);
    loss::CrossVars cross0 = data::make_cross(t0, ad::sub(a0, ga0), t0.constant(cx_t),
                                              cfg.cross_domain, cfg.stft.compression_p,
                                              /*detach_b=*/false);
    ga_detached = ga0.value();
    cross_detached = cross0.cross.value();
  }

  // (2) discriminator updates, generator frozen.
  for (int64_t u = 0; u < cfg.disc_updates_per_step; ++u) {
    Tape td;
    model::Lease dcp = model::lease(td, state.d_c.params(), true);
    model::Lease dap = model::lease(td, state.d_a.params(), true);
    auto [loss_dc, loss_da] = loss::discriminator_losses(
        td, state.d_c, dcp, state.d_a, dap, td.constant(ga_detached), td.constant(cross_detached),
        td.constant(c_t), td.constant(a_t));
    report.loss_dc = loss_dc.value().at(0);
    report.loss_da = loss_da.value().at(0);
    check_finite(report.loss_dc, "loss_dC", state.step);
    check_finite(report.loss_da, "loss_dA", state.step);
    Var d_total = ad::add(loss_dc, loss_da);
    td.backward(d_total);
    apply_adam(state.d_c.params(), dcp, td, state.adam_dc, lr, cfg.precision);
    apply_adam(state.d_a.params(), dap, td, state.adam_da, lr, cfg.precision);
  }

  // (3) generator update, discriminators frozen; the tape is rebuilt so the
  // cross construction participates in the gradient.
  {
    Tape tg;
    model::Lease gp = model::lease(tg, state.gen.params(), true);
    model::Lease dcp = model::lease(tg, state.d_c.params(), false);
    model::Lease dap = model::lease(tg, state.d_a.params(), false);
    Var a = tg.constant(a_t);
    Var c = tg.constant(c_t);
    Var cx = tg.constant(cx_t);

    Var g_a = state.gen.apply(tg, gp, a);
    loss::CrossVars cross = data::make_cross(tg, ad::sub(a, g_a), cx, cfg.cross_domain,
                                             cfg.stft.compression_p, cfg.cross_detach);

    const loss::LossWeights& w = cfg.weights;
    Var zero = tg.constant(ad::Tensor::scalar(0.0));
    loss::ReconTerms recon{zero, zero, zero, zero};
    if (w.r1_enabled) recon.r1 = ad::l1_mean(state.gen.apply(tg, gp, c), c);
    if (w.r2_enabled) {
      Var g_g_a = state.gen.apply(tg, gp, g_a);
      recon.r2 = ad::l1_mean(g_g_a, g_a);
    }
    if (w.r3_enabled || w.r4_enabled) {
      Var g_cross = state.gen.apply(tg, gp, cross.cross);
      if (w.r3_enabled) recon.r3 = ad::l1_mean(g_cross, cross.component_c);
      if (w.r4_enabled) recon.r4 = ad::l1_mean(ad::sub(cross.cross, g_cross), cross.component_b);
    }
    Var gan_c = zero, gan_a = zero;
    if (w.gan_c_enabled) {
      Var ls = loss::multiscale_least_squares(
          tg, state.d_c.scores(tg, dcp, g_a), cfg.gan_mode == loss::GanMode::Standard ? 1.0 : 0.0);
      gan_c = cfg.gan_mode == loss::GanMode::Standard ? ls : ad::scale(ls, -1.0);
    }
    if (w.gan_a_enabled) {
      Var ls = loss::multiscale_least_squares(
          tg, state.d_a.scores(tg, dap, cross.cross),
          cfg.gan_mode == loss::GanMode::Standard ? 1.0 : 0.0);
      gan_a = cfg.gan_mode == loss::GanMode::Standard ? ls : ad::scale(ls, -1.0);
    }
    Var total = loss::generator_total(tg, recon, gan_c, gan_a, w);

    report.gen.r1 = recon.r1.value().at(0);
    report.gen.r2 = recon.r2.value().at(0);
    report.gen.r3 = recon.r3.value().at(0);
    report.gen.r4 = recon.r4.value().at(0);
    report.gen.gan_c = gan_c.value().at(0);
    report.gen.gan_a = gan_a.value().at(0);
    report.gen.total = total.value().at(0);
    check_finite(report.gen.r1, "r1", state.step);
    check_finite(report.gen.r2, "r2", state.step);
    check_finite(report.gen.r3, "r3", state.step);
    check_finite(report.gen.r4, "r4", state.step);
    check_finite(report.gen.gan_c, "gan_c", state.step);
    check_finite(report.gen.gan_a, "gan_a", state.step);

    tg.backward(total);
    apply_adam(state.gen.params(), gp, tg, state.adam_g, lr, cfg.precision);
  }

  state.step += 1;
  return report;
}

std::string loss_log_header() { return "step,r1,r2,r3,r4,gan_c,gan_a,total"; }

std::string loss_log_row(int64_t step, const loss::GeneratorLossReport& rep) {
  std::ostringstream os;
  os.precision(12);
  os << step << ',' << rep.r1 << ',' << rep.r2 << ',' << rep.r3 << ',' << rep.r4 << ','
     << rep.gan_c << ',' << rep.gan_a << ',' << rep.total;
  return os.str();
}

// ---- checkpoints -----------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'V', 'S', 'E', 'P', 'C', 'K', 'P', 'T'};
constexpr uint32_t kVersion = 1;

class HashingWriter {
 public:
  explicit HashingWriter(std::ostream& out) : out_(out) {}
  void write(const void* p, size_t n) {
    const unsigned char* b = static_cast<const unsigned char*>(p);
    for (size_t i = 0; i < n; ++i) {
      hash_ ^= b[i];
      hash_ *= 0x100000001B3ULL;
    }
    out_.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  template <typename T>
  void pod(T v) {
    write(&v, sizeof(T));
  }
  uint64_t hash() const { return hash_; }

 private:
  std::ostream& out_;
  uint64_t hash_ = 0xCBF29CE484222325ULL;  // FNV-1a 64 offset basis
};

class HashingReader {
 public:
  explicit HashingReader(std::istream& in, const std::string& path) : in_(in), path_(path) {}
  void read(void* p, size_t n) {
    in_.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in_) throw CorruptFileError("checkpoint truncated: " + path_);
    const unsigned char* b = static_cast<const unsigned char*>(p);
    for (size_t i = 0; i < n; ++i) {
      hash_ ^= b[i];
      hash_ *= 0x100000001B3ULL;
    }
  }
  template <typename T>
  T pod() {
    T v{};
    read(&v, sizeof(T));
    return v;
  }
  uint64_t hash() const { return hash_; }

 private:
  std::istream& in_;
  std::string path_;
  uint64_t hash_ = 0xCBF29CE484222325ULL;
};

void write_values(HashingWriter& w, const ad::Tensor& t, Precision precision) {
  if (precision == Precision::F32) {
    for (int64_t i = 0; i < t.numel(); ++i) w.pod<float>(static_cast<float>(t.at(i)));
  } else {
    for (int64_t i = 0; i < t.numel(); ++i) w.pod<double>(t.at(i));
  }
}

void read_values(HashingReader& r, ad::Tensor& t, Precision precision) {
  if (precision == Precision::F32) {
    for (int64_t i = 0; i < t.numel(); ++i) t.at(i) = static_cast<double>(r.pod<float>());
  } else {
    for (int64_t i = 0; i < t.numel(); ++i) t.at(i) = r.pod<double>();
  }
}

void write_group(HashingWriter& w, const model::ParamStore& store, const ad::AdamState& adam,
                 Precision precision) {
  w.pod<uint32_t>(static_cast<uint32_t>(store.size()));
  for (size_t i = 0; i < store.size(); ++i) {
    const std::string& name = store.name(i);
    w.pod<uint16_t>(static_cast<uint16_t>(name.size()));
    w.write(name.data(), name.size());
    const ad::Tensor& t = store.value(i);
    w.pod<uint8_t>(static_cast<uint8_t>(t.rank()));
    for (size_t ax = 0; ax < t.rank(); ++ax) w.pod<int64_t>(t.dim(ax));
    write_values(w, t, precision);
  }
  w.pod<double>(adam.beta1);
  w.pod<double>(adam.beta2);
  w.pod<double>(adam.eps);
  w.pod<uint64_t>(adam.t);
  for (size_t i = 0; i < store.size(); ++i) write_values(w, adam.m[i], precision);
  for (size_t i = 0; i < store.size(); ++i) write_values(w, adam.v[i], precision);
}

void read_group(HashingReader& r, model::ParamStore& store, ad::AdamState& adam,
                Precision precision, const std::string& path) {
  const uint32_t count = r.pod<uint32_t>();
  if (count != store.size())
    throw ConfigMismatchError("checkpoint " + path + " has " + std::to_string(count) +
                              " parameters where the configured model expects " +
                              std::to_string(store.size()));
  for (size_t i = 0; i < store.size(); ++i) {
    const uint16_t len = r.pod<uint16_t>();
    std::string name(len, '\0');
    r.read(name.data(), len);
    if (name != store.name(i))
      throw ConfigMismatchError("checkpoint parameter '" + name + "' does not match model's '" +
                                store.name(i) + "'");
    ad::Tensor& t = store.value(i);
    const uint8_t rank = r.pod<uint8_t>();
    if (rank != t.rank())
      throw ConfigMismatchError("checkpoint parameter '" + name + "' rank mismatch");
    for (size_t ax = 0; ax < t.rank(); ++ax) {
      const int64_t d = r.pod<int64_t>();
      if (d != t.dim(ax))
        throw ConfigMismatchError("checkpoint parameter '" + name + "' dim " +
                                  std::to_string(ax) + " is " + std::to_string(d) +
                                  ", model has " + std::to_string(t.dim(ax)));
    }
    read_values(r, t, precision);
  }
  adam.beta1 = r.pod<double>();
  adam.beta2 = r.pod<double>();
  adam.eps = r.pod<double>();
  adam.t = r.pod<uint64_t>();
  for (size_t i = 0; i < store.size(); ++i) read_values(r, adam.m[i], precision);
  for (size_t i = 0; i < store.size(); ++i) read_values(r, adam.v[i], precision);
}

struct GeometryBlock {
  int64_t gen_grid, gen_width, gen_blocks;
  double gen_eps;
  int64_t disc_grid, disc_width, disc_layers, disc_scales;
  int64_t fft_size, hop, frames;
  double compression_p, sample_rate;
};

GeometryBlock geometry_of(const TrainingConfig& cfg) {
  return {cfg.gen.grid,  cfg.gen.base_width,  cfg.gen.residual_blocks, cfg.gen.norm_eps,
          cfg.disc.grid, cfg.disc.base_width, cfg.disc.num_layers,     cfg.disc.scales,
          cfg.stft.fft_size, cfg.stft.hop,    cfg.stft.frames,
          cfg.stft.compression_p, cfg.stft.sample_rate};
}

std::string geometry_str(const GeometryBlock& g) {
  std::ostringstream os;
  os << "gen(grid=" << g.gen_grid << ",width=" << g.gen_width << ",blocks=" << g.gen_blocks
     << ") disc(grid=" << g.disc_grid << ",width=" << g.disc_width << ",layers=" << g.disc_layers
     << ",scales=" << g.disc_scales << ") stft(fft=" << g.fft_size << ",hop=" << g.hop
     << ",frames=" << g.frames << ",p=" << g.compression_p << ",rate=" << g.sample_rate << ")";
  return os.str();
}

}  // namespace

void checkpoint_save(const TrainState& state, const TrainingConfig& cfg, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  HashingWriter w(out);
  w.write(kMagic, sizeof(kMagic));
  w.pod<uint32_t>(kVersion);
  w.pod<uint8_t>(cfg.precision == Precision::F32 ? 4 : 8);
  w.pod<uint64_t>(state.seed);
  w.pod<int64_t>(state.step);
  const GeometryBlock g = geometry_of(cfg);
  w.write(&g, sizeof(g));
  write_group(w, state.gen.params(), state.adam_g, cfg.precision);
  write_group(w, state.d_c.params(), state.adam_dc, cfg.precision);
  write_group(w, state.d_a.params(), state.adam_da, cfg.precision);
  const uint64_t h = w.hash();
  out.write(reinterpret_cast<const char*>(&h), sizeof(h));
  if (!out) throw IoError("failed writing checkpoint: " + path);
}

namespace {

GeometryBlock read_header(HashingReader& r, const std::string& path, uint8_t& dtype,
                          uint64_t& seed, int64_t& step) {
  char magic[8];
  r.read(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw CorruptFileError("not a checkpoint file (bad magic): " + path);
  const uint32_t version = r.pod<uint32_t>();
  if (version != kVersion)
    throw CorruptFileError("checkpoint version " + std::to_string(version) +
                           " unsupported (expected " + std::to_string(kVersion) + "): " + path);
  dtype = r.pod<uint8_t>();
  if (dtype != 4 && dtype != 8)
    throw CorruptFileError("checkpoint has invalid value dtype: " + path);
  seed = r.pod<uint64_t>();
  step = r.pod<int64_t>();
  GeometryBlock g;
  r.read(&g, sizeof(g));
  return g;
}

}  // namespace

TrainState checkpoint_load(const std::string& path, const TrainingConfig& cfg) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  HashingReader r(in, path);
  uint8_t dtype;
  uint64_t seed;
  int64_t step;
  const GeometryBlock g = read_header(r, path, dtype, seed, step);

  const GeometryBlock expect = geometry_of(cfg);
  if (std::memcmp(&g, &expect, sizeof(g)) != 0)
    throw ConfigMismatchError("checkpoint geometry " + geometry_str(g) +
                              " does not match configured " + geometry_str(expect));
  const Precision stored = dtype == 4 ? Precision::F32 : Precision::F64;

  TrainState state(cfg);
  read_group(r, state.gen.params(), state.adam_g, stored, path);
  read_group(r, state.d_c.params(), state.adam_dc, stored, path);
  read_group(r, state.d_a.params(), state.adam_da, stored, path);
  const uint64_t computed = r.hash();
  uint64_t recorded;
  in.read(reinterpret_cast<char*>(&recorded), sizeof(recorded));
  if (!in) throw CorruptFileError("checkpoint truncated (missing hash): " + path);
  if (recorded != computed)
    throw CorruptFileError("checkpoint hash mismatch (corrupt file): " + path);
  char extra;
  if (in.read(&extra, 1)) throw CorruptFileError("trailing bytes after checkpoint hash: " + path);
  state.seed = seed;
  state.step = step;
  return state;
}

void checkpoint_peek_config(const std::string& path, TrainingConfig& cfg) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  HashingReader r(in, path);
  uint8_t dtype;
  uint64_t seed;
  int64_t step;
  const GeometryBlock g = read_header(r, path, dtype, seed, step);
  cfg.seed = seed;
  cfg.precision = dtype == 4 ? Precision::F32 : Precision::F64;
  cfg.gen.grid = g.gen_grid;
  cfg.gen.base_width = g.gen_width;
  cfg.gen.residual_blocks = g.gen_blocks;
  cfg.gen.norm_eps = g.gen_eps;
  cfg.disc.grid = g.disc_grid;
  cfg.disc.base_width = g.disc_width;
  cfg.disc.num_layers = g.disc_layers;
  cfg.disc.scales = g.disc_scales;
  cfg.stft.fft_size = g.fft_size;
  cfg.stft.hop = g.hop;
  cfg.stft.frames = g.frames;
  cfg.stft.compression_p = g.compression_p;
  cfg.stft.sample_rate = g.sample_rate;
}

// ---- config files ----------------------------------------------------------

namespace {

const char* kValidKeys[] = {
    "seed",          "total_steps",    "lr_initial",     "lr_halving_step",
    "beta1",         "beta2",          "adam_eps",       "batch_size",
    "disc_updates_per_step", "checkpoint_interval", "precision",
    "w_r1",          "w_r2",           "w_r3",           "w_r4",
    "w_gan",         "disable_losses", "gan_mode",       "cross_domain",
    "cross_detach",  "gen_grid",       "gen_base_width", "gen_residual_blocks",
    "disc_base_width", "disc_layers",  "disc_scales",
    "fft_size",      "hop",            "frames",         "compression_p",
    "sample_rate",   "data_dir",
};

std::string valid_keys_str() {
  std::string s;
  for (const char* k : kValidKeys) {
    if (!s.empty()) s += ", ";
    s += k;
  }
  return s;
}

std::string trim(const std::string& s) {
  const size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ContractError("config key '" + key + "' expects a boolean, got '" + v + "'");
}

void disable_loss_by_name(loss::LossWeights& w, const std::string& name) {
  if (name == "r1") w.r1_enabled = false;
  else if (name == "r2") w.r2_enabled = false;
  else if (name == "r3") w.r3_enabled = false;
  else if (name == "r4") w.r4_enabled = false;
  else if (name == "gan_c") w.gan_c_enabled = false;
  else if (name == "gan_a") w.gan_a_enabled = false;
  else if (name == "gan_both") { w.gan_c_enabled = false; w.gan_a_enabled = false; }
  else
    throw ContractError("unknown loss name '" + name +
                        "' (valid: r1, r2, r3, r4, gan_c, gan_a, gan_both)");
}

}  // namespace

void apply_config_entry(TrainingConfig& cfg, const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string value = trim(raw_value);
  try {
    if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "total_steps") cfg.total_steps = std::stoll(value);
    else if (key == "lr_initial") cfg.lr_initial = std::stod(value);
    else if (key == "lr_halving_step") cfg.lr_halving_step = std::stoll(value);
    else if (key == "beta1") cfg.beta1 = std::stod(value);
    else if (key == "beta2") cfg.beta2 = std::stod(value);
    else if (key == "adam_eps") cfg.adam_eps = std::stod(value);
    else if (key == "batch_size") cfg.batch_size = std::stoll(value);
    else if (key == "disc_updates_per_step") cfg.disc_updates_per_step = std::stoll(value);
    else if (key == "checkpoint_interval") cfg.checkpoint_interval = std::stoll(value);
    else if (key == "precision") {
      if (value == "f32") cfg.precision = Precision::F32;
      else if (value == "f64") cfg.precision = Precision::F64;
      else throw ContractError("precision must be f32 or f64, got '" + value + "'");
    } else if (key == "w_r1") cfg.weights.w_r1 = std::stod(value);
    else if (key == "w_r2") cfg.weights.w_r2 = std::stod(value);
    else if (key == "w_r3") cfg.weights.w_r3 = std::stod(value);
    else if (key == "w_r4") cfg.weights.w_r4 = std::stod(value);
    else if (key == "w_gan") cfg.weights.w_gan = std::stod(value);
    else if (key == "disable_losses") {
      std::stringstream ss(value);
      std::string name;
      while (std::getline(ss, name, ',')) {
        name = trim(name);
        if (!name.empty()) disable_loss_by_name(cfg.weights, name);
      }
    } else if (key == "gan_mode") {
      if (value == "standard") cfg.gan_mode = loss::GanMode::Standard;
      else if (value == "paper") cfg.gan_mode = loss::GanMode::PaperLiteral;
      else throw ContractError("gan_mode must be standard or paper, got '" + value + "'");
    } else if (key == "cross_domain") {
      if (value == "representation") cfg.cross_domain = data::CrossDomain::Representation;
      else if (value == "physical") cfg.cross_domain = data::CrossDomain::Physical;
      else throw ContractError("cross_domain must be representation or physical, got '" + value + "'");
    } else if (key == "cross_detach") cfg.cross_detach = parse_bool(value, key);
    else if (key == "gen_grid") { cfg.gen.grid = std::stoll(value); cfg.disc.grid = cfg.gen.grid; }
    else if (key == "gen_base_width") cfg.gen.base_width = std::stoll(value);
    else if (key == "gen_residual_blocks") cfg.gen.residual_blocks = std::stoll(value);
    else if (key == "disc_base_width") cfg.disc.base_width = std::stoll(value);
    else if (key == "disc_layers") cfg.disc.num_layers = std::stoll(value);
    else if (key == "disc_scales") cfg.disc.scales = std::stoll(value);
    else if (key == "fft_size") cfg.stft.fft_size = std::stoll(value);
    else if (key == "hop") cfg.stft.hop = std::stoll(value);
    else if (key == "frames") cfg.stft.frames = std::stoll(value);
    else if (key == "compression_p") cfg.stft.compression_p = std::stod(value);
    else if (key == "sample_rate") cfg.stft.sample_rate = std::stod(value);
    else if (key == "data_dir") cfg.data_dir = value;
    else
      throw ContractError("unknown config key '" + key + "'. Valid keys: " + valid_keys_str());
  } catch (const std::invalid_argument&) {
    throw ContractError("config key '" + key + "' has unparsable value '" + value + "'");
  } catch (const std::out_of_range&) {
    throw ContractError("config key '" + key + "' has out-of-range value '" + value + "'");
  }
}

TrainingConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  TrainingConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ContractError("config line " + std::to_string(lineno) + " is not 'key = value': " + line);
    apply_config_entry(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
  return cfg;
}

std::string config_to_text(const TrainingConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "seed = " << cfg.seed << "\n";
  os << "total_steps = " << cfg.total_steps << "\n";
  os << "lr_initial = " << cfg.lr_initial << "\n";
  os << "lr_halving_step = " << cfg.lr_halving_step << "\n";
  os << "beta1 = " << cfg.beta1 << "\n";
  os << "beta2 = " << cfg.beta2 << "\n";
  os << "adam_eps = " << cfg.adam_eps << "\n";
  os << "batch_size = " << cfg.batch_size << "\n";
  os << "disc_updates_per_step = " << cfg.disc_updates_per_step << "\n";
  os << "checkpoint_interval = " << cfg.checkpoint_interval << "\n";
  os << "precision = " << (cfg.precision == Precision::F32 ? "f32" : "f64") << "\n";
  os << "w_r1 = " << cfg.weights.w_r1 << "\n";
  os << "w_r2 = " << cfg.weights.w_r2 << "\n";
  os << "w_r3 = " << cfg.weights.w_r3 << "\n";
  os << "w_r4 = " << cfg.weights.w_r4 << "\n";
  os << "w_gan = " << cfg.weights.w_gan << "\n";
  std::string disabled;
  auto append = [&disabled](const char* n) {
    if (!disabled.empty()) disabled += ",";
    disabled += n;
  };
  if (!cfg.weights.r1_enabled) append("r1");
  if (!cfg.weights.r2_enabled) append("r2");
  if (!cfg.weights.r3_enabled) append("r3");
  if (!cfg.weights.r4_enabled) append("r4");
  if (!cfg.weights.gan_c_enabled) append("gan_c");
  if (!cfg.weights.gan_a_enabled) append("gan_a");
  if (!disabled.empty()) os << "disable_losses = " << disabled << "\n";
  os << "gan_mode = " << (cfg.gan_mode == loss::GanMode::Standard ? "standard" : "paper") << "\n";
  os << "cross_domain = "
     << (cfg.cross_domain == data::CrossDomain::Representation ? "representation" : "physical")
     << "\n";
  os << "cross_detach = " << (cfg.cross_detach ? "true" : "false") << "\n";
  os << "gen_grid = " << cfg.gen.grid << "\n";
  os << "gen_base_width = " << cfg.gen.base_width << "\n";
  os << "gen_residual_blocks = " << cfg.gen.residual_blocks << "\n";
  os << "disc_base_width = " << cfg.disc.base_width << "\n";
  os << "disc_layers = " << cfg.disc.num_layers << "\n";
  os << "disc_scales = " << cfg.disc.scales << "\n";
  os << "fft_size = " << cfg.stft.fft_size << "\n";
  os << "hop = " << cfg.stft.hop << "\n";
  os << "frames = " << cfg.stft.frames << "\n";
  os << "compression_p = " << cfg.stft.compression_p << "\n";
  os << "sample_rate = " << cfg.stft.sample_rate << "\n";
  if (!cfg.data_dir.empty()) os << "data_dir = " << cfg.data_dir << "\n";
  return os.str();
}

}  // namespace voxsep::train
