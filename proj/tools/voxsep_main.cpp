// tools/voxsep_main.cpp
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
// Subcommands: gen-toy, train, separate, evaluate, ablate.
// Exit codes: 0 success, 1 user error, 2 internal error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "voxsep/audio.hpp"
#include "voxsep/bss_eval.hpp"
#include "voxsep/dataset.hpp"
#include "voxsep/error.hpp"
#include "voxsep/resample.hpp"
#include "voxsep/stft.hpp"
#include "voxsep/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace voxsep;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUserError = 1;
constexpr int kExitInternalError = 2;

// ---- run manifest (append-only JSON lines) ---------------------------------

class Manifest {
 public:
  explicit Manifest(const fs::path& run_dir) : path_(run_dir / "manifest.jsonl") {}

  void append(json event) {
    std::ofstream out(path_, std::ios::app);
    if (!out) throw IoError("cannot append to manifest: " + path_.string());
    out << event.dump() << "\n";
  }

 private:
  fs::path path_;
};

void require_fresh_dir(const fs::path& dir, bool force, const std::string& what) {
  if (fs::exists(dir) && !fs::is_directory(dir))
    throw IoError(what + " exists and is not a directory: " + dir.string());
  if (fs::is_directory(dir) && !fs::is_empty(dir)) {
    if (!force)
      throw IoError(what + " " + dir.string() +
                    " is not empty; pass --force to overwrite or choose a new directory");
    fs::remove_all(dir);
  }
  fs::create_directories(dir);
}

std::string zero_pad(int64_t v, int width) {
  std::string s = std::to_string(v);
  while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

// ---- gen-toy ----------------------------------------------------------------

int cmd_gen_toy(const std::string& out_dir, uint64_t seed, int64_t n_mix, int64_t n_src,
                double duration, const train::TrainingConfig& cfg, bool force) {
  if (n_mix <= 0 && n_src <= 0)
    throw ContractError("gen-toy: counts are 0/0, the dataset would be empty");
  require_fresh_dir(out_dir, force, "output directory");
  const fs::path root(out_dir);
  fs::create_directories(root / "mixtures");
  fs::create_directories(root / "instrumentals");
  fs::create_directories(root / "references");

  data::ToyDatasets toy =
      data::make_toy_datasets(seed, {n_mix, n_src}, cfg.stft, duration);
  for (int64_t i = 0; i < n_mix; ++i) {
    const std::string name = "mix_" + zero_pad(i, 3) + ".wav";
    dsp::write_wav((root / "mixtures" / name).string(), toy.mixtures[i]);
    dsp::write_wav((root / "references" / name).string(), toy.vocal_references[i]);
  }
  for (int64_t i = 0; i < n_src; ++i) {
    const std::string name = "inst_" + zero_pad(i, 3) + ".wav";
    dsp::write_wav((root / "instrumentals" / name).string(), toy.instrumentals[i]);
  }
  std::cout << "wrote " << n_mix << " mixtures, " << n_src << " instrumentals, " << n_mix
            << " references under " << out_dir << "\n";
  return kExitOk;
}

// ---- train -------------------------------------------------------------------

struct TrainOutcome {
  fs::path final_checkpoint;
  loss::GeneratorLossReport final_losses;
};

TrainOutcome run_training(train::TrainingConfig cfg, const fs::path& run_dir,
                          const std::string& resume_path, bool force) {
  cfg.validate();
  if (cfg.data_dir.empty())
    throw ContractError("no data_dir configured (set data_dir in the config or pass --data)");
  require_fresh_dir(run_dir, force, "run directory");

  const dsp::StftConfig& scfg = cfg.stft;
  data::Dataset mixtures =
      data::load_dataset((fs::path(cfg.data_dir) / "mixtures").string(),
                         data::DatasetRole::Mixtures, scfg);
  data::Dataset sources =
      data::load_dataset((fs::path(cfg.data_dir) / "instrumentals").string(),
                         data::DatasetRole::Sources, scfg);

  Manifest manifest(run_dir);
  std::optional<train::TrainState> state;
  if (!resume_path.empty()) {
    state.emplace(train::checkpoint_load(resume_path, cfg));
  } else {
    state.emplace(cfg);
  }

  {
    std::ofstream cfg_out(run_dir / "config.txt");
    cfg_out << train::config_to_text(cfg);
  }
  std::vector<std::string> disabled;
  if (!cfg.weights.r1_enabled) disabled.push_back("r1");
  if (!cfg.weights.r2_enabled) disabled.push_back("r2");
  if (!cfg.weights.r3_enabled) disabled.push_back("r3");
  if (!cfg.weights.r4_enabled) disabled.push_back("r4");
  if (!cfg.weights.gan_c_enabled) disabled.push_back("gan_c");
  if (!cfg.weights.gan_a_enabled) disabled.push_back("gan_a");
  manifest.append(json{{"event", "run_started"},
                       {"seed", cfg.seed},
                       {"start_step", state->step},
                       {"total_steps", cfg.total_steps},
                       {"disabled_losses", disabled},
                       {"mixture_files", mixtures.files},
                       {"instrumental_files", sources.files},
                       {"config_file", "config.txt"}});

  std::ofstream losses(run_dir / "losses.csv",
                       resume_path.empty() ? std::ios::trunc : std::ios::app);
  if (resume_path.empty()) losses << train::loss_log_header() << "\n";

  TrainOutcome outcome;
  while (state->step < cfg.total_steps) {
    const train::StepReport rep = train::train_step(*state, cfg, mixtures, sources);
    losses << train::loss_log_row(state->step - 1, rep.gen) << "\n";
    outcome.final_losses = rep.gen;
    const bool at_interval =
        cfg.checkpoint_interval > 0 && state->step % cfg.checkpoint_interval == 0;
    if (at_interval && state->step < cfg.total_steps) {
      const fs::path ckpt = run_dir / ("checkpoint_" + zero_pad(state->step, 8) + ".ckpt");
      train::checkpoint_save(*state, cfg, ckpt.string());
      manifest.append(json{{"event", "checkpoint"}, {"step", state->step},
                           {"path", ckpt.filename().string()}});
    }
  }
  losses.flush();

  outcome.final_checkpoint = run_dir / "checkpoint_final.ckpt";
  train::checkpoint_save(*state, cfg, outcome.final_checkpoint.string());
  manifest.append(json{{"event", "checkpoint"},
                       {"step", state->step},
                       {"path", outcome.final_checkpoint.filename().string()}});
  manifest.append(json{{"event", "run_finished"},
                       {"end_step", state->step},
                       {"final_total_loss", outcome.final_losses.total}});
  return outcome;
}

// ---- separate ----------------------------------------------------------------

struct SeparatedTrack {
  dsp::AudioClip vocals;
  dsp::AudioClip instrumental;
};

SeparatedTrack separate_clip_stream(const train::TrainState& state,
                                    const train::TrainingConfig& cfg,
                                    const dsp::AudioClip& input) {
  const dsp::StftConfig& scfg = cfg.stft;
  dsp::AudioClip audio = dsp::resample(input, scfg.sample_rate);
  const std::vector<dsp::Segment> segs = dsp::segment(audio, scfg);
  std::vector<dsp::AudioClip> voc_clips, inst_clips;
  for (const dsp::Segment& seg : segs) {
    dsp::CompressedFrame frame = dsp::compress(dsp::stft(seg.clip, scfg), scfg.compression_p);
    ad::Tape tape;
    model::Lease gp = model::lease(tape, state.gen.params(), false);
    ad::Var a = tape.constant(data::grid_to_tensor(frame.magnitude));
    ad::Var g_a = state.gen.apply(tape, gp, a);
    ad::Var vocal = ad::sub(a, g_a);
    inst_clips.push_back(dsp::reconstruct(data::tensor_to_grid(g_a.value()), frame.phase, scfg,
                                          seg.true_length));
    voc_clips.push_back(dsp::reconstruct(data::tensor_to_grid(vocal.value()), frame.phase, scfg,
                                         seg.true_length));
  }
  SeparatedTrack out;
  out.vocals = dsp::concatenate_track(voc_clips);
  out.instrumental = dsp::concatenate_track(inst_clips);
  return out;
}

int cmd_separate(const std::string& checkpoint, const std::string& in_wav,
                 const std::string& vocals_out, const std::string& instrumental_out) {
  train::TrainingConfig cfg;
  train::checkpoint_peek_config(checkpoint, cfg);
  const train::TrainState state = train::checkpoint_load(checkpoint, cfg);
  const dsp::AudioClip input = dsp::read_wav(in_wav);
  const SeparatedTrack tracks = separate_clip_stream(state, cfg, input);
  dsp::write_wav(vocals_out, tracks.vocals);
  dsp::write_wav(instrumental_out, tracks.instrumental);
  std::cout << "separated " << in_wav << " -> " << vocals_out << " (vocals), "
            << instrumental_out << " (instrumental), " << tracks.vocals.length()
            << " samples at " << tracks.vocals.sample_rate << " Hz\n";
  return kExitOk;
}

// ---- evaluate ------------------------------------------------------------------

struct EvalOptions {
  int64_t filter_len = 512;
};

bss::MetricReport evaluate_dirs(const std::string& estimates_dir,
                                const std::string& references_dir, const EvalOptions& opt) {
  if (!fs::is_directory(estimates_dir))
    throw IoError("estimates directory does not exist: " + estimates_dir);
  if (!fs::is_directory(references_dir))
    throw IoError("references directory does not exist: " + references_dir);

  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(estimates_dir))
    if (e.is_regular_file() && e.path().extension() == ".wav")
      names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());

  std::vector<std::string> paired;
  for (const std::string& n : names) {
    if (fs::exists(fs::path(references_dir) / n)) {
      paired.push_back(n);
    } else {
      std::cerr << "[evaluate] warning: no reference for " << n << ", skipping\n";
    }
  }
  if (paired.empty())
    throw IoError("no estimate/reference pairs found between " + estimates_dir + " and " +
                  references_dir);

  std::vector<bss::TrackMetric> metrics(paired.size());
#pragma omp parallel for schedule(dynamic)
  for (size_t i = 0; i < paired.size(); ++i) {
    dsp::AudioClip est = dsp::read_wav((fs::path(estimates_dir) / paired[i]).string());
    dsp::AudioClip ref = dsp::read_wav((fs::path(references_dir) / paired[i]).string());
    const size_t n = std::min(est.samples.size(), ref.samples.size());
    est.samples.resize(n);
    ref.samples.resize(n);
    const int64_t L = std::min<int64_t>(opt.filter_len, static_cast<int64_t>(n));
    bss::SdrSir m = bss::sdr_sir(bss::decompose(est.samples, {ref.samples}, L));
    metrics[i] = {paired[i], m.sdr_db, m.sir_db};
  }
  return bss::median_report(std::move(metrics));
}

void write_metric_csv(const bss::MetricReport& rep, std::ostream& out) {
  out << "track,sdr_db,sir_db\n";
  out.precision(10);
  for (const bss::TrackMetric& t : rep.per_track)
    out << t.id << ',' << t.sdr_db << ',' << t.sir_db << "\n";
  out << "median," << rep.median_sdr_db << ',' << rep.median_sir_db << "\n";
}

int cmd_evaluate(const std::string& estimates_dir, const std::string& references_dir,
                 const std::string& out_csv, const EvalOptions& opt) {
  const bss::MetricReport rep = evaluate_dirs(estimates_dir, references_dir, opt);
  write_metric_csv(rep, std::cout);
  if (!out_csv.empty()) {
    std::ofstream out(out_csv);
    if (!out) throw IoError("cannot write report: " + out_csv);
    write_metric_csv(rep, out);
  }
  return kExitOk;
}

// ---- ablate --------------------------------------------------------------------

void apply_ablation(train::TrainingConfig& cfg, const std::string& name) {
  if (name == "r1") cfg.weights.r1_enabled = false;
  else if (name == "r2") cfg.weights.r2_enabled = false;
  else if (name == "r3") cfg.weights.r3_enabled = false;
  else if (name == "r4") cfg.weights.r4_enabled = false;
  else if (name == "gan_c") cfg.weights.gan_c_enabled = false;
  else if (name == "gan_a") cfg.weights.gan_a_enabled = false;
  else if (name == "gan_both") {
    cfg.weights.gan_c_enabled = false;
    cfg.weights.gan_a_enabled = false;
  } else {
    throw ContractError("unknown loss name '" + name +
                        "' (valid: r1, r2, r3, r4, gan_c, gan_a, gan_both)");
  }
}

// Separates every mixture in data_dir with the run's final model and reports
// median SDR/SIR against the hidden references.
bss::MetricReport evaluate_run(const train::TrainingConfig& cfg, const fs::path& ckpt,
                               const fs::path& est_dir, const EvalOptions& opt) {
  train::TrainingConfig loaded = cfg;
  const train::TrainState state = train::checkpoint_load(ckpt.string(), loaded);
  fs::create_directories(est_dir);
  const fs::path mix_dir = fs::path(cfg.data_dir) / "mixtures";
  for (const auto& e : fs::directory_iterator(mix_dir)) {
    if (!e.is_regular_file() || e.path().extension() != ".wav") continue;
    const dsp::AudioClip input = dsp::read_wav(e.path().string());
    const SeparatedTrack tracks = separate_clip_stream(state, cfg, input);
    dsp::write_wav((est_dir / e.path().filename()).string(), tracks.vocals);
  }
  return evaluate_dirs(est_dir.string(), (fs::path(cfg.data_dir) / "references").string(), opt);
}

int cmd_ablate(const train::TrainingConfig& base_cfg, const std::vector<std::string>& losses,
               const fs::path& out_dir, bool force, const EvalOptions& opt) {
  for (const std::string& l : losses) {
    train::TrainingConfig probe = base_cfg;
    apply_ablation(probe, l);  // validates names up front
  }
  require_fresh_dir(out_dir, force, "ablation directory");

  struct Row {
    std::string label;
    double sdr, sir;
  };
  std::vector<Row> rows;

  auto one_run = [&](const std::string& label, const train::TrainingConfig& cfg) {
    const fs::path run_dir = out_dir / label;
    const TrainOutcome outcome = run_training(cfg, run_dir, "", false);
    const bss::MetricReport rep =
        evaluate_run(cfg, outcome.final_checkpoint, run_dir / "estimates", opt);
    rows.push_back({label, rep.median_sdr_db, rep.median_sir_db});
    std::cout << "[ablate] " << label << ": median SDR " << rep.median_sdr_db << " dB, SIR "
              << rep.median_sir_db << " dB\n";
  };

  one_run("all_losses", base_cfg);
  for (const std::string& l : losses) {
    train::TrainingConfig cfg = base_cfg;
    apply_ablation(cfg, l);
    one_run("without_" + l, cfg);
  }

  std::ofstream table(out_dir / "ablation_table.csv");
  table << "losses,median_sdr_db,median_sir_db\n";
  table.precision(10);
  std::cout << "\nablation summary (" << rows.size() << " runs):\n";
  std::cout << "  losses            SDR(dB)   SIR(dB)\n";
  for (const Row& r : rows) {
    table << r.label << ',' << r.sdr << ',' << r.sir << "\n";
    std::printf("  %-16s %8.3f  %8.3f\n", r.label.c_str(), r.sdr, r.sir);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"voxsep: semi-supervised singing-voice separation"};
  app.require_subcommand(1);

  std::string config_path;
  uint64_t seed_override = 0;
  bool has_seed = false;
  bool force = false;
  app.add_option("--config", config_path, "training/pipeline config file")->expected(1);
  app.add_option("--seed", seed_override, "override the config seed")
      ->each([&](const std::string&) { has_seed = true; });
  app.add_flag("--force", force, "overwrite non-empty output directories");

  // gen-toy
  auto* gen = app.add_subcommand("gen-toy", "generate a synthetic toy dataset");
  std::string gen_out;
  int64_t gen_mix = 6, gen_src = 6;
  double gen_duration = 1.0;
  gen->add_option("--out", gen_out, "output dataset directory")->required();
  gen->add_option("--mixtures", gen_mix, "number of mixture tracks");
  gen->add_option("--instrumentals", gen_src, "number of instrumental tracks");
  gen->add_option("--duration", gen_duration, "track duration in seconds");

  // train
  auto* tr = app.add_subcommand("train", "train the separator");
  std::string tr_out, tr_data, tr_resume;
  int64_t tr_steps = -1;
  std::vector<std::string> tr_disable;
  tr->add_option("--out", tr_out, "run directory")->required();
  tr->add_option("--data", tr_data, "dataset root (overrides config data_dir)");
  tr->add_option("--steps", tr_steps, "override total_steps");
  tr->add_option("--resume", tr_resume, "checkpoint to resume from");
  tr->add_option("--disable-loss", tr_disable,
                 "disable a loss term (r1, r2, r3, r4, gan_c, gan_a, gan_both); repeatable");

  // separate
  auto* sep = app.add_subcommand("separate", "split a WAV into vocal/instrumental estimates");
  std::string sep_ckpt, sep_in, sep_voc, sep_inst;
  sep->add_option("--checkpoint", sep_ckpt, "trained checkpoint")->required();
  sep->add_option("--input", sep_in, "input WAV")->required();
  sep->add_option("--vocals", sep_voc, "output WAV for the vocal estimate")->required();
  sep->add_option("--instrumental", sep_inst, "output WAV for the instrumental estimate")
      ->required();

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "SDR/SIR of estimates against references");
  std::string ev_est, ev_ref, ev_out;
  int64_t ev_filter = 512;
  ev->add_option("--estimates", ev_est, "directory of estimate WAVs")->required();
  ev->add_option("--references", ev_ref, "directory of reference WAVs")->required();
  ev->add_option("--out", ev_out, "also write the report CSV here");
  ev->add_option("--filter-len", ev_filter, "projection filter length in taps");

  // ablate
  auto* ab = app.add_subcommand("ablate", "train with losses removed and compare");
  std::string ab_out, ab_losses, ab_data;
  ab->add_option("--out", ab_out, "output directory for all runs")->required();
  ab->add_option("--losses", ab_losses, "comma-separated losses to remove one at a time");
  ab->add_option("--data", ab_data, "dataset root (overrides config data_dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUserError;
  }

  try {
    train::TrainingConfig cfg;
    if (!config_path.empty()) cfg = train::parse_config_file(config_path);
    if (has_seed) cfg.seed = seed_override;

    if (gen->parsed()) return cmd_gen_toy(gen_out, cfg.seed, gen_mix, gen_src, gen_duration, cfg, force);

    if (tr->parsed()) {
      if (!tr_data.empty()) cfg.data_dir = tr_data;
      if (tr_steps > 0) cfg.total_steps = tr_steps;
      for (const std::string& name : tr_disable) apply_ablation(cfg, name);
      run_training(cfg, tr_out, tr_resume, force);
      std::cout << "run complete: " << tr_out << "\n";
      return kExitOk;
    }

    if (sep->parsed()) return cmd_separate(sep_ckpt, sep_in, sep_voc, sep_inst);

    if (ev->parsed()) {
      EvalOptions opt;
      opt.filter_len = ev_filter;
      return cmd_evaluate(ev_est, ev_ref, ev_out, opt);
    }

    if (ab->parsed()) {
      if (!ab_data.empty()) cfg.data_dir = ab_data;
      std::vector<std::string> losses;
      std::stringstream ss(ab_losses);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) losses.push_back(tok);
      }
      EvalOptions opt;
      return cmd_ablate(cfg, losses, ab_out, force, opt);
    }
    return kExitUserError;
  } catch (const ContractError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUserError;
  } catch (const ConfigMismatchError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUserError;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUserError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternalError;
  }
}
