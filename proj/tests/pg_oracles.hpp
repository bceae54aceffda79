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

#ifndef SFG_TESTS_PG_ORACLES_HPP_
#define SFG_TESTS_PG_ORACLES_HPP_

// Enumerable decision problems with exact policy gradients, shared by the
// unit tests and the acceptance suite.

#include <cmath>
#include <vector>

#include "sfg/core/rng.hpp"
#include "sfg/learners/policy_gradient.hpp"
#include "sfg/learners/returns.hpp"
#include "sfg/policymodel/model.hpp"
#include "sfg/tensornet/graph.hpp"

namespace sfg::testing {

// Softmax policy over `actions` choices for `states` one-hot inputs.
inline nn::GraphSpec tabular_policy(int states, int actions, double init = 0.5) {
  nn::GraphSpec g;
  g.branches.push_back({"s", {states}, {}});
  g.heads.push_back({"pi", {nn::Dense{actions}, nn::Activation{nn::ActivationKind::kSoftmax}}});
  g.head_init = init;
  return g;
}

inline nn::Tensor one_hot_batch(const std::vector<int>& states, int n_states) {
  nn::Tensor t({static_cast<int>(states.size()), n_states});
  for (std::size_t i = 0; i < states.size(); ++i) t[i * n_states + states[i]] = 1.0;
  return t;
}

inline std::vector<double> flatten_grads(const nn::Gradients& g) {
  std::vector<double> out;
  for (std::size_t k = 0; k < g.size(); ++k)
    for (std::size_t i = 0; i < g[k].size(); ++i) out.push_back(g[k][i]);
  return out;
}

inline std::vector<double> policy_probs(const nn::Network& net, int state, int n_states) {
  const nn::Tensor in = one_hot_batch({state}, n_states);
  const nn::ForwardResult r = net.forward(std::span(&in, 1), nn::Mode::kEval);
  return std::vector<double>(r.outputs[0].data(), r.outputs[0].data() + r.outputs[0].size());
}

// Two-step toy MDP: state 0 at t=0; action a moves to state 1 + (a == 2)
// with reward r0[a]; at t=1 action b yields r1[s-1][b] and the episode ends.
struct ToyMdp {
  static constexpr int kStates = 3;
  static constexpr int kActions = 3;
  double r0[3] = {0.2, 1.0, -0.5};
  double r1[2][3] = {{1.0, 0.0, 0.3}, {-1.0, 2.0, 0.5}};
  double gamma = 1.0;  // the estimator omits the gamma^t factor

  int next_state(int a) const { return 1 + (a == 2); }

  // Expected discounted return by enumeration of all nine trajectories.
  double expected_return(const nn::Network& net) const {
    const auto p0 = policy_probs(net, 0, kStates);
    double j = 0;
    for (int a = 0; a < kActions; ++a) {
      const int s = next_state(a);
      const auto p1 = policy_probs(net, s, kStates);
      for (int b = 0; b < kActions; ++b) j += p0[a] * p1[b] * (r0[a] + gamma * r1[s - 1][b]);
    }
    return j;
  }

  // Central differences of the enumerated objective.
  std::vector<double> exact_gradient(nn::Network& net, double h = 1e-6) const {
    std::vector<double> out;
    for (std::size_t p = 0; p < net.params().size(); ++p) {
      nn::Tensor& w = net.params().value(p);
      for (std::size_t i = 0; i < w.size(); ++i) {
        const nn::Real saved = w[i];
        w[i] = saved + h;
        const double up = expected_return(net);
        w[i] = saved - h;
        const double down = expected_return(net);
        w[i] = saved;
        out.push_back((up - down) / (2 * h));
      }
    }
    return out;
  }

  // REINFORCE estimate of the return gradient from one sampled episode,
  // using the baseline `c` at every step.
  std::vector<double> sample_gradient(const nn::Network& net, Rng& rng, double c) const {
    const auto p0 = policy_probs(net, 0, kStates);
    const int a = model::sample_action({p0[0], p0[1], p0[2]}, rng);
    const int s = next_state(a);
    const auto p1 = policy_probs(net, s, kStates);
    const int b = model::sample_action({p1[0], p1[1], p1[2]}, rng);
    const std::vector<double> rewards{r0[a], r1[s - 1][b]};
    const std::vector<double> g = learn::compute_returns(rewards, gamma);
    const nn::Tensor in = one_hot_batch({0, s}, kStates);
    nn::ForwardResult fwd = net.forward(std::span(&in, 1), nn::Mode::kEval);
    const int actions[] = {a, b};
    const double baseline[] = {c, c};
    nn::Gradients grads = nn::Gradients(net.params());
    learn::accumulate_pg_grad(net, fwd, actions, g, baseline, {0.0, 0.0}, 1.0, grads);
    std::vector<double> out = flatten_grads(grads);
    for (double& v : out) v = -v;  // the loss gradient points downhill
    return out;
  }
};

// Two-armed bandit with payoffs 1 (arm 0) and 0 (arm 1).
struct Bandit {
  double payoff[2] = {1.0, 0.0};

  double expected_return(const nn::Network& net) const {
    const auto p = policy_probs(net, 0, 1);
    return p[0] * payoff[0] + p[1] * payoff[1];
  }

  // d/dz_k of E[r] for softmax logits z; with a single unit input the
  // weight and bias gradients both equal it.
  std::vector<double> exact_gradient(const nn::Network& net) const {
    const auto p = policy_probs(net, 0, 1);
    const double j = expected_return(net);
    std::vector<double> dz{p[0] * (payoff[0] - j), p[1] * (payoff[1] - j)};
    std::vector<double> out;
    for (std::size_t t = 0; t < net.params().size(); ++t) out.insert(out.end(), dz.begin(), dz.end());
    return out;
  }

  std::vector<double> sample_gradient(const nn::Network& net, Rng& rng,
                                      const double* baseline) const {
    const auto p = policy_probs(net, 0, 1);
    double u = rng.uniform();
    const int a = u < p[0] ? 0 : 1;
    const double g[] = {payoff[a]};
    const int actions[] = {a};
    const nn::Tensor in = one_hot_batch({0}, 1);
    nn::ForwardResult fwd = net.forward(std::span(&in, 1), nn::Mode::kEval);
    nn::Gradients grads = nn::Gradients(net.params());
    learn::accumulate_pg_grad(net, fwd, actions, g, baseline, {0.0, 0.0}, 1.0, grads);
    std::vector<double> out = flatten_grads(grads);
    for (double& v : out) v = -v;
    return out;
  }
};

struct GradientMoments {
  std::vector<double> mean;
  std::vector<double> var;  // per component, unbiased
  double total_var() const {
    double s = 0;
    for (double v : var) s += v;
    return s;
  }
};

template <typename Sampler>
GradientMoments gradient_moments(int n, Sampler&& sample) {
  GradientMoments m;
  std::vector<double> sq;
  for (int i = 0; i < n; ++i) {
    const std::vector<double> g = sample();
    if (m.mean.empty()) {
      m.mean.assign(g.size(), 0.0);
      sq.assign(g.size(), 0.0);
    }
    for (std::size_t k = 0; k < g.size(); ++k) {
      m.mean[k] += g[k];
      sq[k] += g[k] * g[k];
    }
  }
  m.var.resize(m.mean.size());
  for (std::size_t k = 0; k < m.mean.size(); ++k) {
    m.mean[k] /= n;
    m.var[k] = (sq[k] - n * m.mean[k] * m.mean[k]) / (n - 1);
  }
  return m;
}

inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

}  // namespace sfg::testing

#endif  // SFG_TESTS_PG_ORACLES_HPP_
