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

#ifndef SFG_FOLLOWCLI_RUN_CONFIG_HPP_
#define SFG_FOLLOWCLI_RUN_CONFIG_HPP_

#include <cstdint>
#include <string>

#include <json.hpp>

#include "sfg/learners/policy_gradient.hpp"
#include "sfg/learners/trainer.hpp"
#include "sfg/scoreenv/env.hpp"
#include "sfg/synthgen/synthgen.hpp"
#include "sfg/tensornet/optim.hpp"

namespace sfg::cli {

struct CorpusConfig {
  std::string preset = "mono";
  int pieces = 20;
  synth::GenSpec gen = synth::gen_preset("mono");
  synth::RenderStyle style;
  synth::AudioProfile audio;
};

// Fractions of the corpus (in corpus order); the remainder is the test split.
struct SplitConfig {
  double train = 0.6;
  double validation = 0.15;
};

struct SplitCounts {
  int train = 0, validation = 0, test = 0;
};

struct PathConfig {
  std::string corpus;  // corpus directory
  std::string out;     // run directory (checkpoints, metrics, reports)
};

// Every setting of an experiment. Loading rejects unknown keys at any depth;
// missing keys keep their defaults.
struct RunConfig {
  std::uint64_t seed = 1;
  CorpusConfig corpus;
  std::string env_preset = "mono";
  env::EnvConfig env = env::env_preset("mono");
  std::string model = "desk";
  std::string algo = "a2c";  // a2c | reinforce_bl
  learn::A2CConfig a2c;
  learn::ReinforceConfig reinforce;
  nn::AdamConfig adam;
  learn::ScheduleConfig schedule;
  SplitConfig split;
  PathConfig paths;

  void validate() const;
  SplitCounts split_counts(int n_pieces) const;
};

nlohmann::json to_json(const RunConfig& c);
// Presets named in the document ("corpus.preset", "env_preset") seed the
// defaults of their sections before explicit keys are applied.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

}  // namespace sfg::cli

#endif  // SFG_FOLLOWCLI_RUN_CONFIG_HPP_
