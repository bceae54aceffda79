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

#ifndef SFG_POLICYMODEL_MODEL_HPP_
#define SFG_POLICYMODEL_MODEL_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sfg/core/rng.hpp"
#include "sfg/scoreenv/env.hpp"
#include "sfg/tensornet/graph.hpp"

namespace sfg::model {

// Output layout of the networks built here.
inline constexpr int kPolicyOutput = 0;
inline constexpr int kValueOutput = 1;
inline constexpr int kRegressorOutput = 0;

enum class Variant {
  kPolicyValue,  // softmax policy head + linear value head
  kRegressor,    // one linear output (supervised tempo-change baseline)
};

// "paper": the full-size two-tower network. "desk": same topology with at
// most 16 channels per convolution and narrower dense layers.
// Branch 0 takes the spectrogram stack {2, bins, spec_context}, branch 1
// the sheet stack {2, window_h / downscale, window_w / downscale}.
nn::GraphSpec model_preset(const std::string& name, const env::EnvConfig& env = {},
                           Variant variant = Variant::kPolicyValue);

// Stacks (signal, delta) planes of each state into the two network inputs.
std::vector<nn::Tensor> make_inputs(std::span<const env::MdpState* const> states);
std::vector<nn::Tensor> make_inputs(const env::MdpState& state);

using Probs = std::array<double, env::kNumActions>;

// Numerically stable log-softmax of one logit row.
Probs log_softmax(const nn::Real* logits);

enum class ActMode { kSample, kGreedy };

// Inverse-CDF draw from probs.
int sample_action(const Probs& probs, Rng& rng);
// Argmax; ties go to the lowest index.
int greedy_action(const Probs& probs);

struct ActResult {
  env::Action action = env::Action::kKeep;
  double log_prob = 0.0;
  double value = 0.0;
  Probs probs{};
};

// Picks an action from given probabilities. Throws NonFiniteError when the
// probabilities are unusable.
ActResult act_from_probs(const Probs& probs, Rng* rng, ActMode mode);

// Batched policy evaluation. With a dropout stream the forward runs in
// training mode (dropout active), otherwise in evaluation mode. `rng` is only
// used by ActMode::kSample.
std::vector<ActResult> act_batch(const nn::Network& net,
                                 std::span<const env::MdpState* const> states,
                                 Rng* rng, ActMode mode, Rng* dropout_rng = nullptr);
ActResult act(const nn::Network& net, const env::MdpState& state, Rng* rng,
              ActMode mode, Rng* dropout_rng = nullptr);

}  // namespace sfg::model

#endif  // SFG_POLICYMODEL_MODEL_HPP_
