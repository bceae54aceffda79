/* Copyright 2026 The Score Following Game Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "sfg/followcli/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "sfg/core/error.hpp"
#include "sfg/core/rng.hpp"
#include "sfg/evalsuite/evaluate.hpp"
#include "sfg/learners/policy_gradient.hpp"
#include "sfg/policymodel/model.hpp"
#include "sfg/synthgen/corpus_io.hpp"
#include "sfg/synthgen/synthgen.hpp"
#include "sfg/tensornet/checkpoint.hpp"

namespace sfg::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

synth::Corpus load_corpus(const std::string& dir) {
  if (dir.empty()) throw UsageError("no corpus directory given");
  return synth::read_corpus(dir);
}

model::ActMode act_mode(bool sample) {
  return sample ? model::ActMode::kSample : model::ActMode::kGreedy;
}

}  // namespace

Splits split_corpus(const synth::Corpus& corpus, const RunConfig& config) {
  const SplitCounts n = config.split_counts(static_cast<int>(corpus.size()));
  Splits s;
  auto it = corpus.begin();
  s.train.assign(it, it + n.train);
  it += n.train;
  s.validation.assign(it, it + n.validation);
  it += n.validation;
  s.test.assign(it, corpus.end());
  return s;
}

synth::Corpus select_split(const synth::Corpus& corpus, const RunConfig& config,
                           const std::string& name) {
  if (name == "all") return corpus;
  Splits s = split_corpus(corpus, config);
  if (name == "train") return s.train;
  if (name == "validation") return s.validation;
  if (name == "test") {
    if (s.test.empty()) throw UsageError("the test split is empty");
    return s.test;
  }
  throw UsageError("unknown split '" + name + "' (train|validation|test|all)");
}

void cmd_synth(const RunConfig& config, const std::string& out_dir, bool force,
               std::ostream& log) {
  if (out_dir.empty()) throw UsageError("no output directory given");
  const synth::Corpus corpus =
      synth::generate_corpus(derive_seed(config.seed, "corpus"), config.corpus.pieces,
                             config.corpus.gen, config.corpus.style, config.corpus.audio);
  const json meta = {{"seed", config.seed}, {"corpus", to_json(config).at("corpus")}};
  synth::write_corpus(out_dir, corpus, meta.dump(2), force);
  log << "wrote " << corpus.size() << " pieces to " << out_dir << "\n";
}

RunConfig config_from_checkpoint(const nn::Checkpoint& ckpt) {
  if (!ckpt.meta.contains("run_config"))
    throw UsageError("checkpoint carries no run configuration");
  return run_config_from_json(ckpt.meta.at("run_config"));
}

learn::TrainState cmd_train(const RunConfig& config, const TrainOptions& opts,
                            std::ostream& log) {
  if (config.paths.out.empty()) throw UsageError("no run directory given (paths.out)");
  if (opts.resume && opts.force) throw UsageError("--resume and --force exclude each other");
  const fs::path out(config.paths.out);
  const fs::path last = out / "last.ckpt";
  const bool existing = fs::exists(last) || fs::exists(out / "metrics.ndjson");
  if (opts.resume && !fs::exists(last))
    throw IoError("nothing to resume: " + last.string() + " is missing");
  if (!opts.resume && existing) {
    if (!opts.force)
      throw UsageError(out.string() + " already holds a run; use --resume or --force");
    for (const char* f : {"best.ckpt", "last.ckpt", "metrics.ndjson", "config.json"})
      fs::remove(out / f);
  }

  const synth::Corpus corpus = load_corpus(config.paths.corpus);
  const Splits splits = split_corpus(corpus, config);

  nn::Network net(model::model_preset(config.model, config.env),
                  derive_seed(config.seed, "init"));
  nn::Adam adam(config.adam);
  std::unique_ptr<learn::Learner> learner;
  const std::uint64_t learner_seed = derive_seed(config.seed, "learner");
  if (config.algo == "a2c")
    learner = std::make_unique<learn::A2CLearner>(splits.train, config.env, config.a2c,
                                                  learner_seed);
  else
    learner = std::make_unique<learn::ReinforceLearner>(splits.train, config.env,
                                                        config.reinforce, learner_seed);

  learn::Trainer trainer(config.schedule, net, adam, *learner, splits.validation,
                         config.env, out.string());
  const json config_json = to_json(config);
  // The run directory is left out so checkpoints do not depend on where
  // they were written.
  json stored_config = config_json;
  stored_config["paths"]["out"] = "";
  trainer.extra_meta()["run_config"] = stored_config;

  if (opts.resume) {
    const nn::Checkpoint ckpt = nn::load_checkpoint(last.string());
    json stored = ckpt.meta.value("run_config", json::object());
    json given = stored_config;
    stored.erase("schedule");
    given.erase("schedule");
    if (stored != given)
      throw UsageError("configuration differs from the run being resumed "
                       "(only schedule keys may change)");
    trainer.restore(ckpt);
    log << "resumed at update " << trainer.state().update << " (epoch "
        << trainer.state().epoch << ")\n";
  } else {
    fs::create_directories(out);
    write_text(out / "config.json", config_json.dump(2) + "\n");
  }

  log << config.algo << " on " << splits.train.size() << " training pieces, "
      << splits.validation.size() << " validation, " << net.parameter_count()
      << " parameters\n";
  return trainer.run([&](const learn::EpochRecord& r) {
    char line[200];
    std::snprintf(line, sizeof line,
                  "epoch %4d  update %7ld  lr %.2e  return %7.2f  val R_on %.3f  "
                  "R_tue %.3f  %.1fs\n",
                  r.epoch, r.update, r.lr, r.mean_return, r.val_r_on, r.val_r_tue,
                  r.wall_ms / 1000.0);
    log << line << std::flush;
  });
}

eval::EvalReport cmd_eval(const EvalOptions& opts, std::ostream& log) {
  if (opts.runs < 1) throw UsageError("--runs must be >= 1");
  if (opts.out_dir.empty()) throw UsageError("no output directory given");
  const nn::Checkpoint ckpt = nn::load_checkpoint(opts.checkpoint);
  const RunConfig config = config_from_checkpoint(ckpt);
  const nn::Network net = learn::network_from_checkpoint(ckpt);
  const synth::Corpus corpus =
      load_corpus(opts.corpus.empty() ? config.paths.corpus : opts.corpus);
  const synth::Corpus pieces = select_split(corpus, config, opts.split);

  eval::NetworkPolicy policy(net, act_mode(opts.sample));
  const eval::MultiRunReport rep =
      eval::evaluate(policy, pieces, config.env, opts.runs, opts.seed);

  const fs::path out(opts.out_dir);
  fs::create_directories(out / "runs");
  for (std::size_t r = 0; r < rep.runs.size(); ++r) {
    char stem[32];
    std::snprintf(stem, sizeof stem, "run_%03zu", r);
    write_text(out / "runs" / (std::string(stem) + ".json"),
               eval::report_to_json(rep.runs[r]).dump(2) + "\n");
    std::ofstream csv(out / "runs" / (std::string(stem) + ".csv"));
    eval::write_report_csv(csv, rep.runs[r]);
  }
  json summary = eval::report_to_json(rep.mean);
  summary["runs"] = opts.runs;
  summary["split"] = opts.split;
  summary["seed"] = opts.seed;
  summary["mode"] = opts.sample ? "sample" : "greedy";
  write_text(out / "report.json", summary.dump(2) + "\n");
  {
    std::ofstream csv(out / "report.csv");
    if (!csv) throw IoError("cannot write report.csv in " + out.string());
    eval::write_report_csv(csv, rep.mean);
  }
  char line[160];
  std::snprintf(line, sizeof line,
                "%zu pieces, %d run(s): R_tue %.3f  R_on %.3f  |d_x| %.2f +- %.2f\n",
                pieces.size(), opts.runs, rep.mean.r_tue, rep.mean.r_on,
                rep.mean.mean_abs_dx, rep.mean.std_abs_dx);
  log << line;
  return rep.mean;
}

int cmd_rollout(const RolloutOptions& opts, std::ostream& log) {
  if (opts.out_csv.empty()) throw UsageError("no output file given");
  const nn::Checkpoint ckpt = nn::load_checkpoint(opts.checkpoint);
  const RunConfig config = config_from_checkpoint(ckpt);
  const nn::Network net = learn::network_from_checkpoint(ckpt);
  const synth::Corpus corpus =
      load_corpus(opts.corpus.empty() ? config.paths.corpus : opts.corpus);
  synth::BundlePtr bundle;
  for (const auto& b : corpus)
    if (b->piece.id == opts.piece) bundle = b;
  if (!bundle) throw UsageError("no piece '" + opts.piece + "' in the corpus");

  eval::NetworkPolicy policy(net, act_mode(opts.sample));
  const auto rows = eval::rollout_trajectory(policy, bundle, config.env, opts.seed);
  std::ofstream out(opts.out_csv);
  if (!out) throw IoError("cannot write " + opts.out_csv);
  env::write_trajectory_csv(out, rows);
  if (!out) throw IoError("write failed: " + opts.out_csv);
  log << "wrote " << rows.size() << " rows for " << opts.piece << " ("
      << bundle->num_frames() << " frames)\n";
  return static_cast<int>(rows.size());
}

void cmd_inspect(const std::string& checkpoint, std::ostream& out) {
  const nn::Checkpoint ckpt = nn::load_checkpoint(checkpoint);
  const nn::Network net = learn::network_from_checkpoint(ckpt);
  out << "checkpoint " << checkpoint << " (" << nn::kCheckpointFormat << ")\n";
  out << "parameters: " << net.parameter_count() << " in " << net.params().size()
      << " tensors\n";
  const auto& spec = net.spec();
  for (const auto& br : spec.branches) {
    out << "branch " << br.name << " input [";
    for (std::size_t i = 0; i < br.input.size(); ++i)
      out << (i ? "x" : "") << br.input[i];
    out << "]\n";
    for (const auto& l : br.layers) out << "  " << nn::describe(l) << "\n";
  }
  if (!spec.trunk.empty()) {
    out << "trunk\n";
    for (const auto& l : spec.trunk) out << "  " << nn::describe(l) << "\n";
  }
  for (const auto& h : spec.heads) {
    out << "head " << h.name << "\n";
    for (const auto& l : h.layers) out << "  " << nn::describe(l) << "\n";
  }
  if (ckpt.meta.contains("adam"))
    out << "adam: " << ckpt.meta.at("adam").dump() << "\n";
  if (ckpt.meta.contains("trainer")) {
    const learn::TrainState s = learn::train_state_from_json(ckpt.meta.at("trainer"));
    out << "trainer: update " << s.update << ", epoch " << s.epoch << ", lr drops "
        << s.lr_drops << ", best val R_on " << s.best_r_on << " (epoch "
        << s.best_epoch << ")" << (s.finished ? ", finished" : "") << "\n";
  }
  if (ckpt.meta.contains("run_config")) {
    const json& rc = ckpt.meta.at("run_config");
    out << "run: algo " << rc.value("algo", "?") << ", model " << rc.value("model", "?")
        << ", seed " << rc.value("seed", json()).dump() << "\n";
  }
}

}  // namespace sfg::cli
