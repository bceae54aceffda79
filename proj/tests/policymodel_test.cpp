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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "sfg/core/error.hpp"
#include "sfg/policymodel/model.hpp"
#include "sfg/synthgen/synthgen.hpp"

using namespace sfg;
using model::Probs;

namespace {

env::MdpState random_state(const env::EnvConfig& c, Rng& rng) {
  env::MdpState s;
  auto fill = [&](env::Plane& p, int rows, int cols) {
    p.rows = rows;
    p.cols = cols;
    p.data.resize(static_cast<std::size_t>(rows) * cols);
    for (auto& v : p.data) v = static_cast<float>(rng.uniform(0, 1));
  };
  fill(s.sheet, c.obs_rows(), c.obs_cols());
  fill(s.sheet_delta, c.obs_rows(), c.obs_cols());
  fill(s.spec, synth::kNumBins, c.spec_context);
  fill(s.spec_delta, synth::kNumBins, c.spec_context);
  return s;
}

int count_convs(const std::vector<nn::LayerSpec>& layers, std::vector<int>* channels) {
  int n = 0;
  for (const auto& l : layers)
    if (const auto* c = std::get_if<nn::Conv>(&l)) {
      ++n;
      channels->push_back(c->out_channels);
    }
  return n;
}

}  // namespace

TEST_CASE("paper preset shapes") {
  const env::EnvConfig c;
  const nn::GraphSpec g = model::model_preset("paper", c);
  REQUIRE(g.branches.size() == 2);
  CHECK(g.branches[0].input == nn::Shape{2, 78, 40});
  CHECK(g.branches[1].input == nn::Shape{2, 80, 256});
  nn::Network net(g, 1);
  CHECK(net.num_outputs() == 2);
  CHECK(net.output_shape(model::kPolicyOutput) == nn::Shape{3});
  CHECK(net.output_shape(model::kValueOutput) == nn::Shape{1});

  Rng rng(2);
  const env::MdpState s = random_state(c, rng);
  const auto r = model::act(net, s, nullptr, model::ActMode::kGreedy);
  double sum = 0;
  for (double p : r.probs) {
    CHECK(p >= 0.0);
    sum += p;
  }
  CHECK(std::abs(sum - 1.0) < 1e-12);
  CHECK(std::isfinite(r.value));
}

TEST_CASE("spectrogram tower follows the reference layout") {
  const nn::GraphSpec g = model::model_preset("paper");
  std::vector<int> ch;
  CHECK(count_convs(g.branches[0].layers, &ch) == 8);
  CHECK(ch == std::vector<int>{32, 32, 64, 64, 64, 96, 96, 96});
  const auto& heads = g.heads;
  REQUIRE(heads.size() == 2);
  CHECK(std::get<nn::Dense>(heads[0].layers.front()).units == 256);
  CHECK(std::get<nn::Dense>(heads[1].layers.front()).units == 512);
}

TEST_CASE("desk preset mirrors the paper topology with narrow layers") {
  const env::EnvConfig c;
  const nn::GraphSpec paper = model::model_preset("paper", c);
  const nn::GraphSpec desk = model::model_preset("desk", c);
  REQUIRE(paper.branches.size() == desk.branches.size());
  for (std::size_t b = 0; b < paper.branches.size(); ++b) {
    const auto& pl = paper.branches[b].layers;
    const auto& dl = desk.branches[b].layers;
    REQUIRE(pl.size() == dl.size());
    for (std::size_t i = 0; i < pl.size(); ++i) {
      CHECK(pl[i].index() == dl[i].index());
      if (const auto* conv = std::get_if<nn::Conv>(&dl[i])) {
        CHECK(conv->out_channels <= 16);
        const auto& pc = std::get<nn::Conv>(pl[i]);
        CHECK(conv->k == pc.k);
        CHECK(conv->stride_y == pc.stride_y);
        CHECK(conv->stride_x == pc.stride_x);
      }
    }
  }
  nn::Network net(desk, 3);
  CHECK(net.output_shape(0) == nn::Shape{3});
  CHECK(net.output_shape(1) == nn::Shape{1});
  CHECK_THROWS_AS(model::model_preset("huge"), InvalidArgument);
}

TEST_CASE("fresh network has a near-uniform policy") {
  env::EnvConfig c;
  c.downscale = 4;
  nn::Network net(model::model_preset("desk", c), 11);
  Rng rng(1);
  double h = 0;
  for (int i = 0; i < 100; ++i) {
    const auto r = model::act(net, random_state(c, rng), nullptr, model::ActMode::kGreedy);
    for (double p : r.probs) h -= p * std::log(p);
  }
  CHECK(h / 100 >= 0.95 * std::log(3.0));
}

TEST_CASE("same seed builds identical parameters") {
  const auto g = model::model_preset("desk");
  CHECK(nn::Network(g, 5).params() == nn::Network(g, 5).params());
}

TEST_CASE("act_from_probs edge cases") {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const auto r = model::act_from_probs({1, 0, 0}, &rng, model::ActMode::kSample);
    CHECK(r.action == env::Action::kDecrease);
    CHECK(r.log_prob == 0.0);
  }
  CHECK(model::act_from_probs({0.2, 0.3, 0.5}, nullptr, model::ActMode::kGreedy).action ==
        env::Action::kIncrease);
  CHECK(model::greedy_action({0.4, 0.4, 0.2}) == 0);
  CHECK_THROWS_AS(model::act_from_probs({NAN, 0.5, 0.5}, &rng, model::ActMode::kSample),
                  NonFiniteError);
  CHECK_THROWS_AS(model::act_from_probs({0.5, 0.5, 0.5}, &rng, model::ActMode::kSample),
                  NonFiniteError);
}

TEST_CASE("sampling frequencies match the probabilities") {
  const Probs p{0.15, 0.25, 0.6};
  Rng rng(8);
  int counts[3] = {0, 0, 0};
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[model::sample_action(p, rng)];
  for (int k = 0; k < 3; ++k) CHECK(std::abs(counts[k] / double(n) - p[k]) < 0.01);
}

TEST_CASE("log-softmax is shift invariant and matches softmax") {
  const nn::Real logits[3] = {1.5, -2.0, 0.25};
  const nn::Real shifted[3] = {1001.5, 998.0, 1000.25};
  const Probs a = model::log_softmax(logits), b = model::log_softmax(shifted);
  double z = 0;
  for (double l : logits) z += std::exp(l);
  for (int k = 0; k < 3; ++k) {
    CHECK(std::abs(a[k] - b[k]) < 1e-12);
    CHECK(std::abs(std::exp(a[k]) - std::exp(logits[k]) / z) < 1e-12);
  }
  const nn::Real extreme[3] = {0, -800, 800};
  const Probs e = model::log_softmax(extreme);
  for (double v : e) CHECK(std::isfinite(v));
}

TEST_CASE("policy probabilities ignore a constant logit offset") {
  env::EnvConfig c;
  c.downscale = 4;
  nn::Network net(model::model_preset("desk", c), 2);
  Rng rng(4);
  const env::MdpState s = random_state(c, rng);
  const auto before = model::act(net, s, nullptr, model::ActMode::kGreedy);
  // The bias of the final policy layer adds the same constant to each logit.
  const int bias = net.params().find("policy/3/bias");
  REQUIRE(bias >= 0);
  for (auto& v : net.params().value(bias).values()) v += 7.25;
  const auto after = model::act(net, s, nullptr, model::ActMode::kGreedy);
  for (int k = 0; k < 3; ++k) CHECK(std::abs(before.probs[k] - after.probs[k]) < 1e-12);
}

TEST_CASE("a value loss reaches both towers") {
  env::EnvConfig c;
  c.downscale = 4;
  nn::Network net(model::model_preset("desk", c), 6);
  Rng rng(5);
  const env::MdpState s = random_state(c, rng);
  const env::MdpState* ptr = &s;
  auto fwd = net.forward(model::make_inputs(std::span(&ptr, 1)), nn::Mode::kEval);
  nn::OutputGrad og{model::kValueOutput, nn::Tensor({1, 1}, 1.0), false};
  const auto grads = net.backward(fwd.tape, std::span(&og, 1));
  for (const char* name : {"spectrogram/0/weight", "sheet/0/weight"}) {
    const int i = net.params().find(name);
    REQUIRE(i >= 0);
    double norm = 0;
    for (auto v : grads[i].values()) norm += std::abs(v);
    CHECK(norm > 0);
  }
}

TEST_CASE("act_batch: evaluation mode is deterministic, training mode uses dropout") {
  env::EnvConfig c;
  c.downscale = 4;
  nn::Network net(model::model_preset("desk", c), 7);
  Rng rng(6);
  std::vector<env::MdpState> states;
  for (int i = 0; i < 4; ++i) states.push_back(random_state(c, rng));
  std::vector<const env::MdpState*> ptrs;
  for (const auto& s : states) ptrs.push_back(&s);
  const auto a = model::act_batch(net, ptrs, nullptr, model::ActMode::kGreedy);
  const auto b = model::act_batch(net, ptrs, nullptr, model::ActMode::kGreedy);
  for (int i = 0; i < 4; ++i) {
    CHECK(a[i].probs == b[i].probs);
    CHECK(a[i].value == b[i].value);
    // Batched and single-state evaluation agree.
    const auto one = model::act(net, states[i], nullptr, model::ActMode::kGreedy);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(one.probs[k] - a[i].probs[k]) < 1e-12);
    CHECK(a[i].log_prob == doctest::Approx(std::log(a[i].probs[static_cast<int>(a[i].action)])));
  }
  Rng d(1);
  const auto t = model::act_batch(net, ptrs, nullptr, model::ActMode::kGreedy, &d);
  bool differs = false;
  for (int i = 0; i < 4; ++i) differs |= t[i].value != a[i].value;
  CHECK(differs);
}

TEST_CASE("make_inputs stacks signal and delta planes") {
  env::EnvConfig c;
  c.downscale = 4;
  Rng rng(9);
  const env::MdpState s = random_state(c, rng);
  const auto in = model::make_inputs(s);
  REQUIRE(in.size() == 2);
  CHECK(in[0].shape() == nn::Shape{1, 2, 78, 40});
  CHECK(in[1].shape() == nn::Shape{1, 2, 40, 128});
  CHECK(in[0][0] == s.spec.data[0]);
  CHECK(in[0][78 * 40] == s.spec_delta.data[0]);
  CHECK(in[1][5] == s.sheet.data[5]);
  CHECK(in[1][40 * 128 + 5] == s.sheet_delta.data[5]);
}
