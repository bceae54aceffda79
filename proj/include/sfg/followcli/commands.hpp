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

#ifndef SFG_FOLLOWCLI_COMMANDS_HPP_
#define SFG_FOLLOWCLI_COMMANDS_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>

#include "sfg/followcli/run_config.hpp"
#include "sfg/learners/trainer.hpp"
#include "sfg/synthgen/piece.hpp"

namespace sfg::cli {

struct Splits {
  synth::Corpus train, validation, test;
};

// Splits in corpus order using the configured fractions.
Splits split_corpus(const synth::Corpus& corpus, const RunConfig& config);
synth::Corpus select_split(const synth::Corpus& corpus, const RunConfig& config,
                           const std::string& name);  // train|validation|test|all

// Writes an sfg-corpus/1 directory generated from config.corpus.
void cmd_synth(const RunConfig& config, const std::string& out_dir, bool force,
               std::ostream& log);

struct TrainOptions {
  bool resume = false;
  bool force = false;  // discard an existing run in the output directory
};

// Trains until the schedule stops. The run directory receives config.json,
// best.ckpt, last.ckpt and metrics.ndjson.
learn::TrainState cmd_train(const RunConfig& config, const TrainOptions& opts,
                            std::ostream& log);

struct EvalOptions {
  std::string checkpoint;
  std::string corpus;  // empty: the corpus recorded in the checkpoint
  std::string split = "test";
  int runs = 1;
  std::uint64_t seed = 1;
  std::string out_dir;
  bool sample = false;  // sample actions instead of taking the argmax
};

// Writes report.json and report.csv (averaged over runs) plus
// runs/run_NNN.{json,csv}. Returns the averaged report.
eval::EvalReport cmd_eval(const EvalOptions& opts, std::ostream& log);

struct RolloutOptions {
  std::string checkpoint;
  std::string corpus;
  std::string piece;  // piece id
  std::string out_csv;
  std::uint64_t seed = 1;
  bool sample = false;
};

// Returns the number of rows written.
int cmd_rollout(const RolloutOptions& opts, std::ostream& log);

// Human-readable summary of a checkpoint.
void cmd_inspect(const std::string& checkpoint, std::ostream& out);

// Run configuration stored in a checkpoint written by cmd_train.
RunConfig config_from_checkpoint(const nn::Checkpoint& ckpt);

}  // namespace sfg::cli

#endif  // SFG_FOLLOWCLI_COMMANDS_HPP_
