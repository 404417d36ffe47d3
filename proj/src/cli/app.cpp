/*
 * Copyright 2026 The walnet Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "walnet/cli/app.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>

#include "walnet/ad/operator_checks.hpp"
#include "walnet/data/audio_source.hpp"
#include "walnet/data/corpus.hpp"
#include "walnet/data/noise.hpp"
#include "walnet/data/synth.hpp"
#include "walnet/dsp/audio_io.hpp"
#include "walnet/model/checkpoint.hpp"
#include "walnet/model/gradcheck.hpp"
#include "walnet/model/localize.hpp"
#include "walnet/train/train.hpp"
#include "walnet/util/csv.hpp"
#include "walnet/util/error.hpp"
#include "walnet/util/keyed_text.hpp"

namespace walnet::cli {
namespace {

namespace fs = std::filesystem;

struct SynthArgs {
  data::SynthSpec spec;
  std::string out;
  std::optional<std::uint64_t> split_seed;
  double train_fraction = 0.7;
  double val_fraction = 0.1;
  bool wav = false;
};

struct FeaturizeArgs {
  std::string manifest;
  std::string cache;
  std::size_t jobs = 1;
};

// Flags that override keys of the experiment config.
struct TrainArgs {
  std::string manifest;
  std::string val;
  std::string config;
  std::string out;
  std::string feature_cache;
  std::size_t jobs = 1;
  std::map<std::string, std::string> overrides;
};

struct EvaluateArgs {
  std::string model;
  std::string manifest;
  std::string out;
  std::string feature_cache;
  std::size_t jobs = 1;
};

struct ExpandArgs {
  std::string manifest;
  double target = 30.0;
  std::string out;
  std::string density;
};

struct CorruptArgs {
  std::string manifest;
  double rate = 0.0;
  std::uint64_t seed = 0;
  std::string out;
  std::string plan;
  std::string replay;
};

struct WildArgs {
  std::string manifest;
  double precision = 1.0;
  std::size_t top_k = 50;
  std::uint64_t seed = 0;
  std::string out;
};

struct LocalizeArgs {
  std::string model;
  std::string manifest;
  std::string out;
  double threshold = model::kDefaultLocalizeThreshold;
  std::string feature_cache;
  std::size_t jobs = 1;
};

struct GradcheckArgs {
  std::uint64_t seed = 1;
  std::size_t seeds = 10;
  double op_tolerance = 1e-4;
  double model_tolerance = 1e-3;
  std::string preset = "desk";
};

fs::path sibling(const fs::path& manifest, const std::string& suffix) {
  return manifest.parent_path() / (manifest.stem().string() + suffix);
}

std::vector<dsp::LogmelSpectrogram> features_for(const data::Corpus& corpus,
                                                 const std::string& cache, std::size_t jobs) {
  return data::corpus_features(corpus, cache.empty() ? fs::path{} : fs::path(cache), jobs);
}

int do_synth(const SynthArgs& a, std::ostream& out) {
  const fs::path dir(a.out);
  fs::create_directories(dir);
  const data::Corpus corpus = data::synthesize_corpus(a.spec);
  data::write_manifest(dir / "manifest.csv", corpus);
  const auto splits = data::split_corpus(corpus, {a.train_fraction, a.val_fraction},
                                         a.split_seed.value_or(a.spec.seed));
  data::write_manifest(dir / "train.csv", splits.train);
  data::write_manifest(dir / "val.csv", splits.val);
  data::write_manifest(dir / "eval.csv", splits.eval);
  data::write_density_report(dir / "density.csv", corpus, data::density_report(corpus));
  if (a.wav) {
    fs::create_directories(dir / "audio");
    for (const auto& clip : corpus.clips) {
      dsp::write_wav(dir / "audio" / (clip.clip_id + ".wav"), data::clip_audio(clip, dir));
    }
  }
  out << fmt::format("wrote {} clips ({} train, {} val, {} eval) over {} events to {}\n",
                     corpus.clips.size(), splits.train.clips.size(), splits.val.clips.size(),
                     splits.eval.clips.size(), corpus.vocabulary.size(), dir.string());
  return kExitOk;
}

int do_featurize(const FeaturizeArgs& a, std::ostream& out) {
  const data::Corpus corpus = data::load_manifest(a.manifest);
  fs::create_directories(a.cache);
  const auto x = data::corpus_features(corpus, a.cache, a.jobs);
  out << fmt::format("cached features for {} clips in {}\n", x.size(), a.cache);
  return kExitOk;
}

// Preset defaults, then the config file, then flags.
KeyedText experiment_config(const TrainArgs& a, std::size_t class_count) {
  KeyedText file;
  if (!a.config.empty()) file = KeyedText::read(a.config);
  std::string preset = file.get_string("preset", "paper");
  if (auto it = a.overrides.find("preset"); it != a.overrides.end()) preset = it->second;

  model::ModelConfig base;
  if (preset == "desk") {
    base = model::desk_config(class_count);
  } else if (preset != "paper") {
    throw InvalidArgument("unknown preset '" + preset + "' (expected paper or desk)");
  }
  KeyedText doc;
  doc.set("preset", preset);
  base.write_to(doc);
  train::TrainConfig{}.write_to(doc);
  for (const auto& [k, v] : file.entries()) doc.set(k, v);
  for (const auto& [k, v] : a.overrides) doc.set(k, v);
  doc.set("class_count", static_cast<std::uint64_t>(class_count));
  return doc;
}

void write_history_and_checkpoints(const fs::path& dir, const train::TrainResult& result,
                                   const model::Model<float>& last,
                                   const ad::AdamState<float>& last_adam) {
  model::save_checkpoint(dir / "best.ckpt", result.best, result.adam);
  model::save_checkpoint(dir / "last.ckpt", last, last_adam);
  result.history.write_csv(dir / "history.csv");
}

int do_train(const TrainArgs& a, std::ostream& out) {
  const data::Corpus train_set = data::load_manifest(a.manifest);
  const data::Corpus val_set = data::load_manifest(a.val);
  const KeyedText doc = experiment_config(a, train_set.vocabulary.size());
  const model::ModelConfig mcfg = model::ModelConfig::read_from(doc);
  const train::TrainConfig tcfg = train::TrainConfig::read_from(doc);
  mcfg.validate();
  tcfg.validate();
  const std::uint64_t model_seed = doc.get_uint("model_seed", tcfg.seed);

  const fs::path dir(a.out);
  fs::create_directories(dir);
  doc.write(dir / "experiment.cfg");

  const auto train_x = features_for(train_set, a.feature_cache, a.jobs);
  const auto val_x = features_for(val_set, a.feature_cache, a.jobs);
  auto model = model::Model<float>::build(mcfg, model_seed);
  const auto result = train::train(model, train_set, train_x, val_set, val_x, tcfg);

  // The final-epoch optimizer state is not kept by train(); last.ckpt stores
  // the final weights with the selected epoch's moments cleared.
  write_history_and_checkpoints(dir, result, model, ad::AdamState<float>{});
  out << fmt::format("trained {} epochs; selected epoch {} (val MAP {:.4f}); wrote {}\n",
                     result.history.epochs.size(), result.history.selected_epoch,
                     result.history.epochs[result.history.selected_epoch - 1].val_map,
                     (dir / "best.ckpt").string());
  return kExitOk;
}

int do_evaluate(const EvaluateArgs& a, std::ostream& out) {
  auto ck = model::load_checkpoint(a.model);
  const data::Corpus corpus = data::load_manifest(a.manifest);
  const auto x = features_for(corpus, a.feature_cache, a.jobs);
  const auto report = train::evaluate(ck.model, corpus, x, a.jobs);
  const fs::path dir = a.out.empty() ? fs::path(a.model).parent_path() : fs::path(a.out);
  if (!dir.empty()) fs::create_directories(dir);
  const std::string stem = fs::path(a.manifest).stem().string();
  report.write_csv(dir / (stem + ".metrics.csv"));
  report.write_summary(dir / (stem + ".summary.txt"));
  out << report.summary_text();
  return kExitOk;
}

int do_expand(const ExpandArgs& a, std::ostream& out) {
  const data::Corpus corpus = data::load_manifest(a.manifest);
  const data::Corpus expanded = data::expand_spans(corpus, a.target);
  data::write_manifest(a.out, expanded);
  if (!a.density.empty()) {
    data::write_density_report(a.density, expanded, data::density_report(expanded));
  }
  out << fmt::format("expanded {} clips to {} s; wrote {}\n", expanded.clips.size(),
                     format_double(a.target), a.out);
  return kExitOk;
}

int do_corrupt(const CorruptArgs& a, std::ostream& out) {
  const data::Corpus corpus = data::load_manifest(a.manifest);
  data::CorruptionPlan plan;
  data::Corpus corrupted;
  if (!a.replay.empty()) {
    plan = data::CorruptionPlan::read(a.replay);
    corrupted = data::apply_plan(corpus, plan);
  } else {
    auto result = data::corrupt_labels(corpus, a.rate, a.seed);
    plan = std::move(result.plan);
    corrupted = std::move(result.corpus);
  }
  data::write_manifest(a.out, corrupted);
  const fs::path plan_path = a.plan.empty() ? sibling(a.out, ".plan.txt") : fs::path(a.plan);
  plan.write(plan_path);
  out << fmt::format("flipped {} labels at r={}%; wrote {} and {}\n", plan.flip_count(),
                     format_double(plan.rate), a.out, plan_path.string());
  return kExitOk;
}

int do_wild(const WildArgs& a, std::ostream& out) {
  const data::Corpus corpus = data::load_manifest(a.manifest);
  const data::Corpus wild = data::simulate_wild(corpus, a.precision, a.top_k, a.seed);
  data::write_manifest(a.out, wild);
  out << fmt::format("retrieved {} of {} clips; wrote {}\n", wild.clips.size(),
                     corpus.clips.size(), a.out);
  return kExitOk;
}

int do_localize(const LocalizeArgs& a, std::ostream& out) {
  auto ck = model::load_checkpoint(a.model);
  const data::Corpus corpus = data::load_manifest(a.manifest);
  const auto x = features_for(corpus, a.feature_cache, a.jobs);
  std::vector<csv::Row> rows;
  for (std::size_t i = 0; i < corpus.clips.size(); ++i) {
    if (x[i].frames < model::kSegmentFrames) {
      spdlog::warn("skipping clip '{}': shorter than one segment", corpus.clips[i].clip_id);
      continue;
    }
    for (const auto& loc : model::localize(ck.model, x[i], a.threshold)) {
      for (const auto& iv : loc.intervals) {
        rows.push_back({corpus.clips[i].clip_id, corpus.vocabulary.name(loc.event),
                        format_double(iv.start_s), format_double(iv.end_s)});
      }
    }
  }
  csv::write(a.out, {"clip_id", "event", "start_s", "end_s"}, rows);
  out << fmt::format("wrote {} intervals to {}\n", rows.size(), a.out);
  return kExitOk;
}

int do_gradcheck(const GradcheckArgs& a, std::ostream& out) {
  std::map<std::string, double> worst;
  std::vector<std::string> order;
  for (std::uint64_t s = a.seed; s < a.seed + a.seeds; ++s) {
    for (const auto& c : ad::check_operators(s)) {
      if (!worst.count(c.name)) order.push_back(c.name);
      worst[c.name] = std::max(worst[c.name], c.max_rel_error);
    }
  }
  bool ok = true;
  for (const auto& name : order) {
    const bool pass = worst[name] <= a.op_tolerance;
    ok &= pass;
    out << fmt::format("{:<22} max rel error {:.3e}  {}\n", name, worst[name],
                       pass ? "ok" : "FAIL");
  }
  model::ModelConfig cfg = a.preset == "desk" ? model::desk_config(8) : model::ModelConfig{};
  if (a.preset != "desk" && a.preset != "paper") {
    throw InvalidArgument("unknown preset '" + a.preset + "' (expected paper or desk)");
  }
  const auto r = model::check_model_gradients(cfg, a.seed);
  const bool pass = r.passed(a.model_tolerance);
  ok &= pass;
  out << fmt::format("{:<22} max rel error {:.3e}  {} ({} coordinates, {:.3e} beyond roundoff "
                     "{:.1e}, {} crossing a switch point)\n",
                     "walnet_loss", r.max_rel_error, pass ? "ok" : "FAIL", r.raw.coordinates,
                     r.gated_rel_error, r.resolution, r.kink_coordinates);
  return ok ? kExitOk : kExitFailure;
}

void add_jobs(CLI::App* cmd, std::size_t& jobs) {
  cmd->add_option("--jobs", jobs, "Worker threads for per-clip work")->check(CLI::PositiveNumber);
}

// Registers an option whose value, when given, overrides a config key.
void add_override(CLI::App* cmd, TrainArgs& a, const std::string& flag, const std::string& key,
                  const std::string& help) {
  cmd->add_option_function<std::string>(
      flag, [&a, key](const std::string& v) { a.overrides[key] = v; }, help);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weakly supervised audio event detection with WAL-Net", "walnet"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Print help for every subcommand");
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate the synthetic weak-label corpus");
  c_synth->add_option("--events", synth.spec.event_count, "Event classes")->capture_default_str();
  c_synth->add_option("--clips", synth.spec.clip_count, "Clip count")->capture_default_str();
  c_synth->add_option("--len", synth.spec.clip_length_s, "Clip length in seconds")
      ->capture_default_str();
  c_synth->add_option("--seed", synth.spec.seed, "Generator seed")->capture_default_str();
  c_synth->add_option("--snr-min", synth.spec.min_snr_db, "Lowest event SNR in dB")
      ->capture_default_str();
  c_synth->add_option("--snr-max", synth.spec.max_snr_db, "Highest event SNR in dB")
      ->capture_default_str();
  c_synth->add_option("--min-event", synth.spec.min_event_s, "Shortest event in seconds")
      ->capture_default_str();
  c_synth->add_option("--max-event", synth.spec.max_event_s, "Longest event in seconds")
      ->capture_default_str();
  c_synth->add_option("--split-seed", synth.split_seed, "Split seed (default: --seed)");
  c_synth->add_option("--train-fraction", synth.train_fraction)->capture_default_str();
  c_synth->add_option("--val-fraction", synth.val_fraction)->capture_default_str();
  c_synth->add_flag("--wav", synth.wav, "Also write each clip's audio to <out>/audio/");
  c_synth->add_option("--out", synth.out, "Output directory")->required();

  FeaturizeArgs feat;
  auto* c_feat = app.add_subcommand("featurize", "Compute and cache log-mel features");
  c_feat->add_option("--manifest", feat.manifest)->required()->check(CLI::ExistingFile);
  c_feat->add_option("--cache", feat.cache, "Feature cache directory")->required();
  add_jobs(c_feat, feat.jobs);

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "Train WAL-Net with validation model selection");
  c_train->add_option("--manifest", tr.manifest, "Training manifest")->required()
      ->check(CLI::ExistingFile);
  c_train->add_option("--val", tr.val, "Validation manifest")->required()->check(CLI::ExistingFile);
  c_train->add_option("--config", tr.config, "Experiment config (keyed text)")
      ->check(CLI::ExistingFile);
  c_train->add_option("--out", tr.out, "Run directory")->required();
  c_train->add_option("--feature-cache", tr.feature_cache, "Feature cache directory");
  add_jobs(c_train, tr.jobs);
  add_override(c_train, tr, "--preset", "preset", "paper|desk model size");
  add_override(c_train, tr, "--epochs", "epochs", "Training epochs");
  add_override(c_train, tr, "--lr", "lr", "Adam learning rate");
  add_override(c_train, tr, "--batch-size", "batch_size", "Clips per step");
  add_override(c_train, tr, "--pooling", "pooling", "avg|max");
  add_override(c_train, tr, "--seed", "seed", "Shuffle and init seed");
  add_override(c_train, tr, "--model-seed", "model_seed", "Init seed (default: --seed)");
  add_override(c_train, tr, "--selection", "selection_metric", "map|mauc");
  add_override(c_train, tr, "--block-filters", "block_filters", "Six comma-separated counts");
  add_override(c_train, tr, "--convs-per-block", "convs_per_block", "3x3 convs per block");
  add_override(c_train, tr, "--l7-filters", "l7_filters", "L7 output channels");

  EvaluateArgs ev;
  auto* c_eval = app.add_subcommand("evaluate", "Score a checkpoint on a manifest");
  c_eval->add_option("--model", ev.model, "Checkpoint")->required()->check(CLI::ExistingFile);
  c_eval->add_option("--manifest", ev.manifest)->required()->check(CLI::ExistingFile);
  c_eval->add_option("--out", ev.out, "Report directory (default: next to the model)");
  c_eval->add_option("--feature-cache", ev.feature_cache, "Feature cache directory");
  add_jobs(c_eval, ev.jobs);

  ExpandArgs ex;
  auto* c_expand = app.add_subcommand("expand", "Widen clip spans inside their sources");
  c_expand->add_option("--manifest", ex.manifest)->required()->check(CLI::ExistingFile);
  c_expand->add_option("--target", ex.target, "Target span length in seconds")
      ->capture_default_str()->check(CLI::PositiveNumber);
  c_expand->add_option("--out", ex.out, "Output manifest")->required();
  c_expand->add_option("--density", ex.density, "Also write the label-density report here");

  CorruptArgs co;
  auto* c_corrupt = app.add_subcommand("corrupt", "Flip r% of each event's labels");
  c_corrupt->add_option("--manifest", co.manifest)->required()->check(CLI::ExistingFile);
  auto* rate = c_corrupt->add_option("--r", co.rate, "Corruption rate in percent")
                   ->check(CLI::Range(0.0, 100.0));
  auto* seed = c_corrupt->add_option("--seed", co.seed, "Corruption seed");
  auto* replay = c_corrupt->add_option("--replay", co.replay, "Apply a saved plan instead")
                     ->check(CLI::ExistingFile);
  replay->excludes(rate)->excludes(seed);
  c_corrupt->add_option("--out", co.out, "Output manifest")->required();
  c_corrupt->add_option("--plan", co.plan, "Plan path (default: <out stem>.plan.txt)");

  WildArgs wi;
  auto* c_wild = app.add_subcommand("wild", "Simulate retrieval-style weak labels");
  c_wild->add_option("--manifest", wi.manifest, "Manifest with truth sidecar")->required()
      ->check(CLI::ExistingFile);
  c_wild->add_option("--precision", wi.precision)->required()->check(CLI::Range(0.0, 1.0));
  c_wild->add_option("--top-k", wi.top_k)->required()->check(CLI::PositiveNumber);
  c_wild->add_option("--seed", wi.seed)->required();
  c_wild->add_option("--out", wi.out, "Output manifest")->required();

  LocalizeArgs lo;
  auto* c_loc = app.add_subcommand("localize", "Threshold segment posteriors into intervals");
  c_loc->add_option("--model", lo.model, "Checkpoint")->required()->check(CLI::ExistingFile);
  c_loc->add_option("--manifest", lo.manifest)->required()->check(CLI::ExistingFile);
  c_loc->add_option("--out", lo.out, "Interval CSV")->required();
  c_loc->add_option("--threshold", lo.threshold)->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  c_loc->add_option("--feature-cache", lo.feature_cache, "Feature cache directory");
  add_jobs(c_loc, lo.jobs);

  GradcheckArgs gc;
  auto* c_gc = app.add_subcommand("gradcheck", "Finite-difference check of every operator");
  c_gc->add_option("--seed", gc.seed, "First seed")->capture_default_str();
  c_gc->add_option("--seeds", gc.seeds, "Operator seeds to run")->capture_default_str()
      ->check(CLI::PositiveNumber);
  c_gc->add_option("--preset", gc.preset, "Model size for the end-to-end check")
      ->capture_default_str()->check(CLI::IsMember({"desk", "paper"}));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const CLI::App* where = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << where->help();
    return kExitUsage;
  }

  spdlog::set_level(spdlog::level::from_str(log_level));
  try {
    if (c_synth->parsed()) return do_synth(synth, out);
    if (c_feat->parsed()) return do_featurize(feat, out);
    if (c_train->parsed()) return do_train(tr, out);
    if (c_eval->parsed()) return do_evaluate(ev, out);
    if (c_expand->parsed()) return do_expand(ex, out);
    if (c_corrupt->parsed()) {
      if (co.replay.empty() && (rate->count() == 0 || seed->count() == 0)) {
        err << "error: corrupt needs --r and --seed, or --replay\n" << c_corrupt->help();
        return kExitUsage;
      }
      return do_corrupt(co, out);
    }
    if (c_wild->parsed()) return do_wild(wi, out);
    if (c_loc->parsed()) return do_localize(lo, out);
    if (c_gc->parsed()) return do_gradcheck(gc, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace walnet::cli
