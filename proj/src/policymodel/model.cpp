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

#include "sfg/policymodel/model.hpp"

#include <algorithm>
#include <cmath>

#include "sfg/core/error.hpp"
#include "sfg/synthgen/piece.hpp"

namespace sfg::model {

using nn::Activation;
using nn::ActivationKind;
using nn::Conv;
using nn::Dense;
using nn::Dropout;
using nn::LayerSpec;

namespace {

struct Widths {
  // Per-tower convolution channels (8 layers each) and dense sizes.
  std::array<int, 8> spec_ch;
  std::array<int, 8> sheet_ch;
  int tower_dense;
  int trunk_dense;
  int policy_dense;
  int value_dense;
};

Widths preset_widths(const std::string& name) {
  if (name == "paper")
    return {{32, 32, 64, 64, 64, 96, 96, 96},
            {32, 32, 64, 64, 64, 64, 96, 96},
            512, 512, 256, 512};
  if (name == "desk")
    return {{4, 4, 8, 8, 16, 16, 16, 16},
            {4, 4, 8, 8, 16, 16, 16, 16},
            64, 64, 32, 64};
  throw InvalidArgument("unknown model preset '" + name + "' (expected paper|desk)");
}

const Activation kElu{ActivationKind::kElu};

void conv(std::vector<LayerSpec>& l, int k, int sy, int sx, int ch, double dropout = 0) {
  l.push_back(Conv{k, sy, sx, ch});
  l.push_back(kElu);
  if (dropout > 0) l.push_back(Dropout{dropout});
}

void dense(std::vector<LayerSpec>& l, int units, double dropout = 0) {
  l.push_back(Dense{units});
  l.push_back(kElu);
  if (dropout > 0) l.push_back(Dropout{dropout});
}

constexpr double kDrop = 0.2;

}  // namespace

nn::GraphSpec model_preset(const std::string& name, const env::EnvConfig& env,
                           Variant variant) {
  env.validate();
  const Widths w = preset_widths(name);

  nn::BranchSpec spec{"spectrogram", {2, synth::kNumBins, env.spec_context}, {}};
  auto& a = spec.layers;
  conv(a, 3, 1, 1, w.spec_ch[0]);
  conv(a, 3, 1, 1, w.spec_ch[1]);
  conv(a, 3, 2, 2, w.spec_ch[2]);
  conv(a, 3, 1, 1, w.spec_ch[3], kDrop);
  conv(a, 3, 2, 2, w.spec_ch[4]);
  conv(a, 3, 2, 2, w.spec_ch[5]);
  conv(a, 3, 1, 1, w.spec_ch[6]);
  conv(a, 1, 1, 1, w.spec_ch[7], kDrop);
  a.push_back(nn::Flatten{});
  dense(a, w.tower_dense);

  nn::BranchSpec sheet{"sheet", {2, env.obs_rows(), env.obs_cols()}, {}};
  auto& s = sheet.layers;
  conv(s, 5, 1, 2, w.sheet_ch[0]);
  conv(s, 3, 1, 1, w.sheet_ch[1]);
  conv(s, 3, 2, 2, w.sheet_ch[2]);
  conv(s, 3, 1, 1, w.sheet_ch[3], kDrop);
  conv(s, 3, 2, 2, w.sheet_ch[4]);
  conv(s, 3, 2, 2, w.sheet_ch[5], kDrop);
  conv(s, 3, 2, 2, w.sheet_ch[6]);
  conv(s, 1, 1, 1, w.sheet_ch[7], kDrop);
  s.push_back(nn::Flatten{});
  dense(s, w.tower_dense);

  nn::GraphSpec g;
  g.branches = {spec, sheet};
  g.trunk.push_back(nn::Concat{});
  dense(g.trunk, w.trunk_dense);

  if (variant == Variant::kPolicyValue) {
    nn::HeadSpec policy{"policy", {}};
    dense(policy.layers, w.policy_dense, kDrop);
    policy.layers.push_back(Dense{env::kNumActions});
    policy.layers.push_back(Activation{ActivationKind::kSoftmax});
    nn::HeadSpec value{"value", {}};
    dense(value.layers, w.value_dense, kDrop);
    value.layers.push_back(Dense{1});
    value.layers.push_back(Activation{ActivationKind::kLinear});
    g.heads = {policy, value};
  } else {
    nn::HeadSpec reg{"tempo", {}};
    reg.layers.push_back(Dense{1});
    reg.layers.push_back(Activation{ActivationKind::kLinear});
    g.heads = {reg};
  }
  return g;
}

std::vector<nn::Tensor> make_inputs(std::span<const env::MdpState* const> states) {
  if (states.empty()) throw InvalidArgument("make_inputs: empty batch");
  const auto& first = *states[0];
  const int n = static_cast<int>(states.size());
  nn::Tensor spec({n, 2, first.spec.rows, first.spec.cols});
  nn::Tensor sheet({n, 2, first.sheet.rows, first.sheet.cols});
  const std::size_t spec_plane = first.spec.data.size();
  const std::size_t sheet_plane = first.sheet.data.size();
  for (int i = 0; i < n; ++i) {
    const env::MdpState& st = *states[i];
    if (st.spec.data.size() != spec_plane || st.sheet.data.size() != sheet_plane ||
        st.spec_delta.data.size() != spec_plane ||
        st.sheet_delta.data.size() != sheet_plane)
      throw ShapeError("make_inputs: states of different shapes in one batch");
    nn::Real* sp = spec.data() + i * 2 * spec_plane;
    std::copy(st.spec.data.begin(), st.spec.data.end(), sp);
    std::copy(st.spec_delta.data.begin(), st.spec_delta.data.end(), sp + spec_plane);
    nn::Real* sh = sheet.data() + i * 2 * sheet_plane;
    std::copy(st.sheet.data.begin(), st.sheet.data.end(), sh);
    std::copy(st.sheet_delta.data.begin(), st.sheet_delta.data.end(), sh + sheet_plane);
  }
  std::vector<nn::Tensor> out;
  out.push_back(std::move(spec));
  out.push_back(std::move(sheet));
  return out;
}

std::vector<nn::Tensor> make_inputs(const env::MdpState& state) {
  const env::MdpState* p = &state;
  return make_inputs(std::span<const env::MdpState* const>(&p, 1));
}

Probs log_softmax(const nn::Real* logits) {
  double mx = logits[0];
  for (int k = 1; k < env::kNumActions; ++k) mx = std::max(mx, double(logits[k]));
  double sum = 0;
  for (int k = 0; k < env::kNumActions; ++k) sum += std::exp(logits[k] - mx);
  const double lse = mx + std::log(sum);
  Probs out;
  for (int k = 0; k < env::kNumActions; ++k) out[k] = logits[k] - lse;
  return out;
}

int sample_action(const Probs& probs, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  int last_positive = 0;
  for (int k = 0; k < env::kNumActions; ++k) {
    if (probs[k] > 0) last_positive = k;
    acc += probs[k];
    if (u < acc && probs[k] > 0) return k;
  }
  return last_positive;  // rounding left u above the final cumulative sum
}

int greedy_action(const Probs& probs) {
  int best = 0;
  for (int k = 1; k < env::kNumActions; ++k)
    if (probs[k] > probs[best]) best = k;
  return best;
}

ActResult act_from_probs(const Probs& probs, Rng* rng, ActMode mode) {
  double sum = 0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0) throw NonFiniteError("policy produced invalid probabilities");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw NonFiniteError("policy probabilities do not sum to 1");
  int a = 0;
  if (mode == ActMode::kGreedy) {
    a = greedy_action(probs);
  } else {
    if (!rng) throw InvalidArgument("sampling needs a random stream");
    a = sample_action(probs, *rng);
  }
  ActResult r;
  r.action = env::action_from_index(a);
  r.probs = probs;
  r.log_prob = std::log(probs[a]);
  return r;
}

std::vector<ActResult> act_batch(const nn::Network& net,
                                 std::span<const env::MdpState* const> states,
                                 Rng* rng, ActMode mode, Rng* dropout_rng) {
  const auto inputs = make_inputs(states);
  const auto fwd = net.forward(inputs, dropout_rng ? nn::Mode::kTrain : nn::Mode::kEval,
                               dropout_rng);
  const nn::Tensor& logits = net.pre_activation(fwd.tape, kPolicyOutput);
  std::vector<ActResult> out;
  out.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    const Probs lp = log_softmax(logits.data() + i * env::kNumActions);
    Probs p;
    for (int k = 0; k < env::kNumActions; ++k) p[k] = std::exp(lp[k]);
    ActResult r = act_from_probs(p, rng, mode);
    r.log_prob = lp[static_cast<int>(r.action)];
    if (net.num_outputs() > kValueOutput) r.value = fwd.outputs[kValueOutput][i];
    out.push_back(r);
  }
  return out;
}

ActResult act(const nn::Network& net, const env::MdpState& state, Rng* rng, ActMode mode,
              Rng* dropout_rng) {
  const env::MdpState* p = &state;
  return act_batch(net, std::span<const env::MdpState* const>(&p, 1), rng, mode,
                   dropout_rng)
      .front();
}

}  // namespace sfg::model
