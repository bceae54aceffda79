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

#ifndef SFG_LEARNERS_RETURNS_HPP_
#define SFG_LEARNERS_RETURNS_HPP_

#include <optional>
#include <span>
#include <vector>

#include "sfg/synthgen/piece.hpp"

namespace sfg::learn {

// G_t = R_{t+1} + gamma * G_{t+1}, evaluated backwards. The last element
// seeds with gamma * bootstrap when one is given (truncated horizon) and with
// nothing otherwise (terminal).
std::vector<double> compute_returns(std::span<const double> rewards, double gamma,
                                    std::optional<double> bootstrap = std::nullopt);

// n-step targets for a synchronous rollout. rewards[t][i] and dones[t][i]
// index step t of actor i; bootstrap[i] is V(S_{t_max}) of actor i. The
// recursion restarts after every done (zero value past a terminal).
std::vector<std::vector<double>> a2c_targets(
    const std::vector<std::vector<double>>& rewards,
    const std::vector<std::vector<bool>>& dones, std::span<const double> bootstrap,
    double gamma);

struct TempoTarget {
  std::vector<double> v_star;  // x[t+1] - x[t], length T-1
  std::vector<double> a_star;  // v*[t+1] - v*[t], length T-2
};

// Throws InvalidArgument for alignments shorter than two frames.
TempoTarget derive_tempo_targets(const synth::Alignment& alignment);

}  // namespace sfg::learn

#endif  // SFG_LEARNERS_RETURNS_HPP_
