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

#ifndef SFG_SCOREENV_VECTOR_ENV_HPP_
#define SFG_SCOREENV_VECTOR_ENV_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sfg/core/rng.hpp"
#include "sfg/scoreenv/env.hpp"

namespace sfg::env {

// Visits every corpus index once per epoch in a freshly shuffled order.
class PieceSchedule {
 public:
  PieceSchedule() = default;
  PieceSchedule(std::size_t corpus_size, std::uint64_t seed);

  std::size_t next();

  struct State {
    std::string rng;
    std::vector<std::size_t> order;
    std::size_t pos = 0;
  };
  State save() const;
  void load(const State& s);

 private:
  void reshuffle();

  std::size_t n_ = 0;
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

// n environments stepped in lockstep. A finished environment is reset onto
// its next scheduled piece by the following step_all call, which returns the
// fresh reset state (reward 0, done false, info.reset true) and ignores the
// action given for it.
class VectorEnv {
 public:
  VectorEnv(int n, synth::Corpus corpus, EnvConfig config, std::uint64_t seed);

  int size() const { return static_cast<int>(envs_.size()); }
  const MdpState& state(int i) const { return envs_.at(i).state(); }
  const ScoreEnv& env(int i) const { return envs_.at(i); }
  bool pending_reset(int i) const { return pending_.at(i) != 0; }
  std::size_t piece_index(int i) const { return piece_.at(i); }
  const synth::Corpus& corpus() const { return corpus_; }
  const EnvConfig& config() const { return config_; }

  std::vector<StepResult> step_all(std::span<const Action> actions);

  // Moves env i onto its next scheduled piece right away.
  const MdpState& reset_env(int i);

  struct EnvState {
    std::size_t piece = 0;
    EnvSnapshot snapshot;
    bool pending = false;
    PieceSchedule::State schedule;
  };
  std::vector<EnvState> save() const;
  void load(const std::vector<EnvState>& states);

 private:
  synth::Corpus corpus_;
  EnvConfig config_;
  std::vector<ScoreEnv> envs_;
  std::vector<PieceSchedule> schedules_;
  std::vector<std::size_t> piece_;
  std::vector<std::uint8_t> pending_;  // not vector<bool>: written concurrently
};

}  // namespace sfg::env

#endif  // SFG_SCOREENV_VECTOR_ENV_HPP_
