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

#include "sfg/scoreenv/vector_env.hpp"

#include <numeric>

#include "sfg/core/error.hpp"
#include "sfg/core/parallel.hpp"

namespace sfg::env {

PieceSchedule::PieceSchedule(std::size_t corpus_size, std::uint64_t seed)
    : n_(corpus_size), rng_(seed), pos_(corpus_size) {
  if (corpus_size == 0) throw InvalidArgument("empty corpus");
}

void PieceSchedule::reshuffle() {
  order_.resize(n_);
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  for (std::size_t i = n_; i > 1; --i) {
    const std::size_t j = rng_.uniform_int(i);
    std::swap(order_[i - 1], order_[j]);
  }
  pos_ = 0;
}

std::size_t PieceSchedule::next() {
  if (pos_ >= order_.size()) reshuffle();
  return order_[pos_++];
}

PieceSchedule::State PieceSchedule::save() const {
  return State{rng_.state(), order_, pos_};
}

void PieceSchedule::load(const State& s) {
  rng_.set_state(s.rng);
  order_ = s.order;
  pos_ = s.pos;
  if (!order_.empty() && order_.size() != n_)
    throw InvalidArgument("piece schedule does not match corpus size");
}

VectorEnv::VectorEnv(int n, synth::Corpus corpus, EnvConfig config,
                     std::uint64_t seed)
    : corpus_(std::move(corpus)), config_(config) {
  if (n < 1) throw InvalidArgument("vector_env needs n >= 1");
  if (corpus_.empty()) throw InvalidArgument("vector_env: empty corpus");
  for (const auto& b : corpus_) check_bundle(*b, config_);
  envs_.reserve(n);
  for (int i = 0; i < n; ++i) {
    envs_.emplace_back(config_);
    schedules_.emplace_back(corpus_.size(), derive_seed(seed, "schedule", i));
  }
  piece_.assign(n, 0);
  pending_.assign(n, false);
  for (int i = 0; i < n; ++i) reset_env(i);
}

const MdpState& VectorEnv::reset_env(int i) {
  piece_.at(i) = schedules_[i].next();
  pending_[i] = false;
  envs_[i].reset(corpus_[piece_[i]]);
  if (envs_[i].done()) pending_[i] = true;
  return envs_[i].state();
}

std::vector<StepResult> VectorEnv::step_all(std::span<const Action> actions) {
  if (static_cast<int>(actions.size()) != size())
    throw InvalidArgument("step_all: got " + std::to_string(actions.size()) +
                          " actions for " + std::to_string(size()) + " envs");
  std::vector<StepResult> results(envs_.size());
  // Schedules are only touched for pending envs, each owning its own stream.
  parallel_for(envs_.size(), [&](std::size_t i) {
    const int k = static_cast<int>(i);
    if (pending_[k]) {
      reset_env(k);
      StepResult& r = results[i];
      r.state = envs_[i].state();
      r.reward = 0.0;
      r.done = false;
      const auto& pose = envs_[i].pose();
      r.info.x = envs_[i].target();
      r.info.x_hat = pose.x_hat;
      r.info.d_x = pose.x_hat - r.info.x;
      r.info.v_pxl = pose.v_pxl;
      r.info.frame = pose.frame;
      r.info.onset_flag = envs_[i].bundle().onset_flag[0];
      r.info.reset = true;
      return;
    }
    results[i] = envs_[i].step(actions[i]);
    if (results[i].done) pending_[k] = true;
  });
  return results;
}

std::vector<VectorEnv::EnvState> VectorEnv::save() const {
  std::vector<EnvState> out(envs_.size());
  for (std::size_t i = 0; i < envs_.size(); ++i) {
    out[i].piece = piece_[i];
    out[i].snapshot = envs_[i].snapshot();
    out[i].pending = pending_[i];
    out[i].schedule = schedules_[i].save();
  }
  return out;
}

void VectorEnv::load(const std::vector<EnvState>& states) {
  if (states.size() != envs_.size())
    throw InvalidArgument("vector_env state has the wrong number of envs");
  for (std::size_t i = 0; i < envs_.size(); ++i) {
    if (states[i].piece >= corpus_.size())
      throw InvalidArgument("vector_env state refers to a missing piece");
    piece_[i] = states[i].piece;
    pending_[i] = states[i].pending;
    schedules_[i].load(states[i].schedule);
    envs_[i].restore(corpus_[piece_[i]], states[i].snapshot);
  }
}

}  // namespace sfg::env
