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

#include "sfg/learners/returns.hpp"

#include "sfg/core/error.hpp"

namespace sfg::learn {

std::vector<double> compute_returns(std::span<const double> rewards, double gamma,
                                    std::optional<double> bootstrap) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidArgument("gamma must lie in (0, 1]");
  std::vector<double> g(rewards.size());
  double next = bootstrap.value_or(0.0);
  for (std::size_t t = rewards.size(); t-- > 0;) {
    next = rewards[t] + gamma * next;
    g[t] = next;
  }
  return g;
}

std::vector<std::vector<double>> a2c_targets(
    const std::vector<std::vector<double>>& rewards,
    const std::vector<std::vector<bool>>& dones, std::span<const double> bootstrap,
    double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidArgument("gamma must lie in (0, 1]");
  if (rewards.size() != dones.size()) throw ShapeError("rewards/dones length mismatch");
  const std::size_t steps = rewards.size();
  const std::size_t n = bootstrap.size();
  std::vector<std::vector<double>> g(steps, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    double next = bootstrap[i];
    for (std::size_t t = steps; t-- > 0;) {
      if (rewards[t].size() != n || dones[t].size() != n)
        throw ShapeError("actor count mismatch in rollout");
      if (dones[t][i]) next = 0.0;
      next = rewards[t][i] + gamma * next;
      g[t][i] = next;
    }
  }
  return g;
}

TempoTarget derive_tempo_targets(const synth::Alignment& alignment) {
  const auto& x = alignment.x;
  if (x.size() < 2) throw InvalidArgument("alignment needs at least two frames");
  TempoTarget t;
  t.v_star.resize(x.size() - 1);
  for (std::size_t i = 0; i + 1 < x.size(); ++i) t.v_star[i] = x[i + 1] - x[i];
  if (t.v_star.size() >= 2) {
    t.a_star.resize(t.v_star.size() - 1);
    for (std::size_t i = 0; i + 1 < t.v_star.size(); ++i)
      t.a_star[i] = t.v_star[i + 1] - t.v_star[i];
  }
  return t;
}

}  // namespace sfg::learn
