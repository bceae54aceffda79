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

#ifndef SFG_LEARNERS_TRAINER_HPP_
#define SFG_LEARNERS_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "sfg/evalsuite/evaluate.hpp"
#include "sfg/learners/policy_gradient.hpp"
#include "sfg/tensornet/checkpoint.hpp"
#include "sfg/tensornet/graph.hpp"
#include "sfg/tensornet/optim.hpp"

namespace sfg::learn {

struct ScheduleConfig {
  int updates_per_epoch = 50;
  int patience = 10;          // epochs without a new best validation R_on
  int max_lr_drops = 3;
  double lr_drop_factor = 10.0;
  int max_epochs = 0;         // 0 = no limit besides the schedule
  void validate() const;
};

struct TrainState {
  long update = 0;
  int epoch = 0;
  int lr_drops = 0;
  int stale_epochs = 0;
  double best_r_on = -1.0;
  int best_epoch = 0;
  bool finished = false;  // learning-rate schedule exhausted
  std::vector<double> lr_trace;  // lr in effect after each schedule change
  std::vector<double> val_r_on;  // one entry per epoch
};

// Metric record written once per epoch (newline-delimited JSON).
struct EpochRecord {
  long update = 0;
  int epoch = 0;
  double lr = 0.0;
  double mean_return = 0.0;
  long episodes = 0;   // episodes completed during the epoch's updates
  long env_steps = 0;
  double val_r_on = 0.0;
  double val_r_tue = 0.0;
  double wall_ms = 0.0;
};

using PolicyFactory =
    std::function<std::unique_ptr<eval::EvalPolicy>(const nn::Network& net)>;

// Greedy network policy, the default for validation.
std::unique_ptr<eval::EvalPolicy> greedy_network_policy(const nn::Network& net);

// Epoch loop with early stopping on validation R_on and step-wise learning
// rate reductions. Writes best.ckpt and last.ckpt to out_dir (if non-empty)
// plus metrics.ndjson.
class Trainer {
 public:
  Trainer(ScheduleConfig schedule, nn::Network& net, nn::Adam& adam, Learner& learner,
          synth::Corpus validation, env::EnvConfig env_config, std::string out_dir,
          PolicyFactory policy = greedy_network_policy);

  // Runs epochs until the schedule stops (or max_epochs). Returns the state.
  const TrainState& run(const std::function<void(const EpochRecord&)>& on_epoch = {});
  // One epoch: updates, validation, schedule bookkeeping, checkpoints.
  EpochRecord run_epoch();

  const TrainState& state() const { return state_; }
  // Schedule exhausted or the epoch cap reached.
  bool done() const;
  nlohmann::json& extra_meta() { return extra_meta_; }

  // Full training snapshot (parameters, optimizer, learner, schedule).
  nn::Checkpoint snapshot() const;
  void restore(const nn::Checkpoint& ckpt);

 private:
  ScheduleConfig schedule_;
  nn::Network& net_;
  nn::Adam& adam_;
  Learner& learner_;
  synth::Corpus validation_;
  env::EnvConfig env_config_;
  std::string out_dir_;
  PolicyFactory policy_;
  TrainState state_;
  nlohmann::json extra_meta_ = nlohmann::json::object();
};

// Network + optimizer + trainer state as checkpoint tensors and metadata.
nn::Checkpoint make_checkpoint(const nn::Network& net, const nn::Adam& adam,
                               const nlohmann::json& meta);
// Rebuilds the network stored in a checkpoint.
nn::Network network_from_checkpoint(const nn::Checkpoint& ckpt);
// Restores Adam moments/step; absent moments leave a fresh optimizer.
void adam_from_checkpoint(const nn::Checkpoint& ckpt, const nn::Network& net,
                          nn::Adam& adam);

nlohmann::json train_state_to_json(const TrainState& s);
TrainState train_state_from_json(const nlohmann::json& j);

}  // namespace sfg::learn

#endif  // SFG_LEARNERS_TRAINER_HPP_
