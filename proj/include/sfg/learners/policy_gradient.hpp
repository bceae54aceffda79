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

#ifndef SFG_LEARNERS_POLICY_GRADIENT_HPP_
#define SFG_LEARNERS_POLICY_GRADIENT_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sfg/core/rng.hpp"
#include "sfg/scoreenv/vector_env.hpp"
#include "sfg/tensornet/graph.hpp"
#include "sfg/tensornet/optim.hpp"

namespace sfg::learn {

struct LossWeights {
  double value_weight = 0.5;  // c_v
  double entropy_coef = 0.0;  // c_e
};

struct LossStats {
  double policy_loss = 0.0;  // sum of -A * ln pi(a|s)
  double value_loss = 0.0;   // sum of (G - V)^2
  double entropy = 0.0;      // sum of H(pi(.|s))
  double advantage = 0.0;    // sum of A
  double target = 0.0;       // sum of G
  int samples = 0;

  void add(const LossStats& o);
};

// Accumulates `weight` times the gradient of
//   sum_i [ -A_i ln pi(a_i|s_i) + c_v (G_i - V(s_i))^2 - c_e H(pi(.|s_i)) ]
// over the batch recorded in `fwd`, where A_i = G_i - baseline_i. The
// baseline is the network's own (detached) value estimate unless `baseline`
// is given; a network without a value head uses 0. Output 0 must end in a
// softmax; output 1, if present, is the scalar value.
LossStats accumulate_pg_grad(const nn::Network& net, nn::ForwardResult& fwd,
                             std::span<const int> actions,
                             std::span<const double> returns,
                             const double* baseline, const LossWeights& w,
                             double weight, nn::Gradients& grads);

struct UpdateStats {
  LossStats loss;
  double grad_norm = 0.0;  // before clipping
  long env_steps = 0;
  int episodes = 0;         // episodes finished during this update
  double episode_reward = 0.0;  // mean undiscounted reward of those
};

// One training algorithm driving its own environments. update() performs
// exactly one optimizer step.
class Learner {
 public:
  virtual ~Learner() = default;
  virtual std::string algo() const = 0;
  virtual UpdateStats update(nn::Network& net, nn::Adam& adam) = 0;
  virtual nlohmann::json save_state() const = 0;
  virtual void load_state(const nlohmann::json& state) = 0;
};

struct A2CConfig {
  int t_max = 15;
  int n_actors = 16;
  double value_weight = 0.5;
  double entropy_coef = 0.01;
  double grad_clip = 5.0;  // global norm; <= 0 disables
  void validate() const;
};

// Synchronous advantage actor-critic over a VectorEnv.
class A2CLearner : public Learner {
 public:
  A2CLearner(synth::Corpus corpus, env::EnvConfig env_config, A2CConfig config,
             std::uint64_t seed);

  std::string algo() const override { return "a2c"; }
  UpdateStats update(nn::Network& net, nn::Adam& adam) override;
  nlohmann::json save_state() const override;
  void load_state(const nlohmann::json& state) override;

  // Targets of the most recent update, [t][actor] (for inspection).
  const std::vector<std::vector<double>>& last_targets() const { return last_targets_; }
  const env::VectorEnv& envs() const { return venv_; }

 private:
  A2CConfig config_;
  env::EnvConfig env_config_;
  env::VectorEnv venv_;
  Rng action_rng_;
  Rng dropout_rng_;
  std::vector<double> running_reward_;
  std::vector<std::vector<double>> last_targets_;
};

struct ReinforceConfig {
  int episodes_per_update = 8;
  double value_weight = 0.5;
  double entropy_coef = 0.0;
  double grad_clip = 5.0;
  void validate() const;
};

// Monte-Carlo REINFORCE with a learned baseline: whole episodes, one Adam
// step per batch of episodes.
class ReinforceLearner : public Learner {
 public:
  ReinforceLearner(synth::Corpus corpus, env::EnvConfig env_config,
                   ReinforceConfig config, std::uint64_t seed);

  std::string algo() const override { return "reinforce_bl"; }
  UpdateStats update(nn::Network& net, nn::Adam& adam) override;
  nlohmann::json save_state() const override;
  void load_state(const nlohmann::json& state) override;

 private:
  ReinforceConfig config_;
  env::EnvConfig env_config_;
  synth::Corpus corpus_;
  env::PieceSchedule schedule_;
  Rng action_rng_;
  Rng dropout_rng_;
};

}  // namespace sfg::learn

#endif  // SFG_LEARNERS_POLICY_GRADIENT_HPP_
