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
#include <sstream>

#include "sfg/core/error.hpp"
#include "sfg/scoreenv/env.hpp"
#include "sfg/scoreenv/vector_env.hpp"
#include "sfg/synthgen/synthgen.hpp"

using namespace sfg;
using env::Action;
using env::EnvConfig;
using env::ScoreEnv;

namespace {

synth::BundlePtr mono_bundle(std::uint64_t seed, int n_events = 12) {
  synth::GenSpec spec = synth::gen_preset("mono");
  spec.n_events = n_events;
  return std::make_shared<const synth::PieceBundle>(synth::make_bundle(
      synth::generate_piece(seed, spec, "p" + std::to_string(seed)), {}, {}));
}

// A bundle whose strip and spectrogram are filled with ones.
synth::BundlePtr lit_bundle() {
  synth::PieceBundle b = *mono_bundle(1);
  std::fill(b.score.pixels.begin(), b.score.pixels.end(), 1.0f);
  std::fill(b.spectrogram.values.begin(), b.spectrogram.values.end(), 1.0f);
  return std::make_shared<const synth::PieceBundle>(std::move(b));
}

bool all_zero(const env::Plane& p) {
  for (float v : p.data)
    if (v != 0.0f) return false;
  return true;
}

}  // namespace

TEST_CASE("reward examples") {
  CHECK(env::reward_fn(100, 100, 50) == 1.0);
  CHECK(env::reward_fn(125, 100, 50) == 0.5);
  CHECK(env::reward_fn(150, 100, 50) == 0.0);
  CHECK(env::reward_fn(10, 100, 50) == 0.0);
}

TEST_CASE("observation shapes follow the config") {
  const EnvConfig c;
  CHECK(c.obs_rows() == 80);
  CHECK(c.obs_cols() == 256);
  ScoreEnv e(c);
  const auto& s = e.reset(mono_bundle(2));
  CHECK(s.sheet.rows == 80);
  CHECK(s.sheet.cols == 256);
  CHECK(s.spec.rows == 78);
  CHECK(s.spec.cols == 40);
  CHECK(s.sheet_delta.data.size() == s.sheet.data.size());
  CHECK(s.spec_delta.data.size() == s.spec.data.size());
}

TEST_CASE("reset starts on the true position with zero speed and zero deltas") {
  ScoreEnv e(EnvConfig{});
  const auto b = mono_bundle(3);
  const auto& s = e.reset(b);
  CHECK(e.pose().frame == 0);
  CHECK(e.pose().v_pxl == 0.0);
  CHECK(e.pose().x_hat == b->alignment.x[0]);
  CHECK(env::reward_fn(e.pose().x_hat, e.target(), e.config().window_b) == 1.0);
  CHECK(all_zero(s.sheet_delta));
  CHECK(all_zero(s.spec_delta));
}

TEST_CASE("spectrogram excerpt is left-padded at frame 0") {
  ScoreEnv e(EnvConfig{});
  const auto& s = e.reset(lit_bundle());
  for (int b = 0; b < s.spec.rows; ++b) {
    for (int k = 0; k < 39; ++k) REQUIRE(s.spec.at(b, k) == 0.0f);
    REQUIRE(s.spec.at(b, 39) == 1.0f);
  }
}

TEST_CASE("sheet window pads outside the strip with background") {
  const auto b = lit_bundle();
  EnvConfig c;
  env::AgentPose pose{0.0, 0.0, 0};
  const auto s = env::observe(pose, *b, c);
  // Window columns [-256, 256) at downscale 2: the left half lies off the strip.
  for (int r = 0; r < s.sheet.rows; ++r) {
    for (int j = 0; j < 128; ++j) REQUIRE(s.sheet.at(r, j) == 0.0f);
    for (int j = 128; j < 256; ++j) REQUIRE(s.sheet.at(r, j) == 1.0f);
  }
  pose.x_hat = b->score.width - 0.4;  // rounds to the first column past the strip
  const auto t = env::observe(pose, *b, c);
  CHECK(t.sheet.at(0, 127) == 1.0f);
  CHECK(t.sheet.at(0, 128) == 0.0f);
}

TEST_CASE("keep preserves the speed exactly") {
  EnvConfig c;
  c.window_b = 1e9;
  ScoreEnv e(c);
  const auto b = mono_bundle(4);
  e.reset(b);
  e.restore(b, {{b->alignment.x[0], 14.0, 0}, {}, false, false});
  const double x0 = e.pose().x_hat;
  for (int t = 1; t <= 20; ++t) {
    const auto r = e.step(Action::kKeep);
    REQUIRE(r.info.x_hat == x0 + 14.0 * t);
    REQUIRE(r.info.v_pxl == 14.0);
  }
}

TEST_CASE("increase adds delta_v and speeds are clamped") {
  EnvConfig c = env::env_preset("poly");
  CHECK(c.delta_v == 1.0);
  c.window_b = 1e9;
  c.v_max = 2.5;
  ScoreEnv e(c);
  e.reset(mono_bundle(5));
  CHECK(e.step(Action::kIncrease).info.v_pxl == 1.0);
  CHECK(e.step(Action::kIncrease).info.v_pxl == 2.0);
  CHECK(e.step(Action::kIncrease).info.v_pxl == 2.5);
  CHECK(e.step(Action::kDecrease).info.v_pxl == 1.5);
}

TEST_CASE("drifting out of the window ends the episode with zero reward") {
  EnvConfig c;
  ScoreEnv e(c);
  const auto b = mono_bundle(6);
  e.reset(b);
  env::StepResult r;
  int steps = 0;
  do {
    r = e.step(Action::kKeep);
    ++steps;
    if (!r.done) REQUIRE(std::abs(r.info.d_x) <= c.window_b);
  } while (!r.done);
  CHECK(std::abs(r.info.d_x) > c.window_b);
  CHECK(r.reward == 0.0);
  // The first frame where the true position passes x_hat + b.
  int expect = 1;
  while (b->alignment.x[expect] - b->alignment.x[0] <= c.window_b) ++expect;
  CHECK(steps == expect);
  CHECK_THROWS_WITH_AS(e.step(Action::kKeep), "episode finished", StateError);
}

TEST_CASE("episodes end at the last frame") {
  ScoreEnv e(EnvConfig{});
  const auto b = mono_bundle(7, 3);
  e.reset(b);
  env::StepResult r;
  int steps = 0;
  do {
    const double gap = b->alignment.x[e.pose().frame + 1] - e.pose().x_hat;
    // Follow the alignment with the action whose new speed lands closest.
    Action best = Action::kKeep;
    double err = 1e18;
    for (int a = 0; a < 3; ++a) {
      const double v = std::clamp(
          e.pose().v_pxl + env::speed_change(static_cast<Action>(a), e.config().delta_v),
          e.config().v_min, e.config().v_max);
      if (std::abs(v - gap) < err) {
        err = std::abs(v - gap);
        best = static_cast<Action>(a);
      }
    }
    r = e.step(best);
    ++steps;
  } while (!r.done);
  CHECK(steps == b->num_frames() - 1);
  CHECK(std::abs(r.info.d_x) <= e.config().window_b);
}

TEST_CASE("property: rewards, termination and delta planes on random rollouts") {
  EnvConfig c;
  c.downscale = 4;
  Rng rng(12);
  for (int ep = 0; ep < 20; ++ep) {
    ScoreEnv e(c);
    e.reset(mono_bundle(100 + ep));
    env::MdpState prev = e.state();
    while (!e.done()) {
      const auto r = e.step(static_cast<Action>(rng.uniform_int(3)));
      REQUIRE(r.reward >= 0.0);
      REQUIRE(r.reward <= 1.0);
      REQUIRE((r.reward == 1.0) == (r.info.x_hat == r.info.x));
      REQUIRE(r.done == (std::abs(r.info.d_x) > c.window_b ||
                         r.info.frame == e.bundle().num_frames() - 1));
      for (std::size_t i = 0; i < prev.sheet.data.size(); ++i)
        REQUIRE(r.state.sheet_delta.data[i] == r.state.sheet.data[i] - prev.sheet.data[i]);
      for (std::size_t i = 0; i < prev.spec.data.size(); ++i)
        REQUIRE(r.state.spec_delta.data[i] == r.state.spec.data[i] - prev.spec.data[i]);
      prev = r.state;
    }
  }
}

TEST_CASE("standing still on silence gives zero sheet deltas") {
  auto b = std::make_shared<synth::PieceBundle>(*mono_bundle(8));
  std::fill(b->spectrogram.values.begin(), b->spectrogram.values.end(), 0.0f);
  const env::AgentPose p{b->alignment.x[0], 0.0, 3};
  const auto s0 = env::observe(p, *b, EnvConfig{});
  const auto s1 = env::observe({p.x_hat, 0.0, 4}, *b, EnvConfig{}, &s0);
  CHECK(all_zero(s1.sheet_delta));
  CHECK(all_zero(s1.spec_delta));
}

TEST_CASE("same actions give the same trajectory") {
  const auto b = mono_bundle(9);
  auto run = [&]() {
    ScoreEnv e(EnvConfig{});
    e.reset(b);
    Rng rng(4);
    std::vector<env::StepResult> out;
    while (!e.done()) out.push_back(e.step(static_cast<Action>(rng.uniform_int(3))));
    return out;
  };
  const auto a = run(), c = run();
  REQUIRE(a.size() == c.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].state == c[i].state);
    CHECK(a[i].reward == c[i].reward);
  }
}

TEST_CASE("snapshot and restore continue identically") {
  const auto b = mono_bundle(10);
  ScoreEnv e(EnvConfig{});
  e.reset(b);
  for (int i = 0; i < 5; ++i) e.step(Action::kIncrease);
  ScoreEnv f(EnvConfig{});
  f.restore(b, e.snapshot());
  CHECK(f.state() == e.state());
  for (int i = 0; i < 5 && !e.done(); ++i) {
    const auto r1 = e.step(Action::kKeep);
    const auto r2 = f.step(Action::kKeep);
    CHECK(r1.state == r2.state);
    CHECK(r1.reward == r2.reward);
  }
}

TEST_CASE("invalid configs and bundles are rejected") {
  EnvConfig c;
  c.window_b = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = EnvConfig{};
  c.spec_context = 1;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = EnvConfig{};
  c.window_h = 100;  // strip is 160 px tall
  ScoreEnv e(c);
  CHECK_THROWS_AS(e.reset(mono_bundle(1)), InvalidArgument);
}

TEST_CASE("trajectory CSV format") {
  std::vector<env::TrajectoryRow> rows(2);
  rows[1].action = 2;
  rows[1].reward = 0.5;
  rows[1].done = true;
  std::ostringstream os;
  env::write_trajectory_csv(os, rows);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "frame,x,x_hat,d_x,v_pxl,action,reward,done,onset_flag");
  std::getline(is, line);
  CHECK(line == "0,0,0,0,0,none,0,0,0");
  std::getline(is, line);
  CHECK(line.find(",increase,0.5,1,0") != std::string::npos);
}

TEST_CASE("piece schedule visits every piece once per epoch") {
  env::PieceSchedule s(5, 3), t(5, 3);
  for (int epoch = 0; epoch < 3; ++epoch) {
    std::vector<int> seen(5, 0);
    for (int i = 0; i < 5; ++i) {
      const auto k = s.next();
      CHECK(k == t.next());
      ++seen[k];
    }
    for (int v : seen) CHECK(v == 1);
  }
}

TEST_CASE("vector env: independence, determinism and auto-reset") {
  synth::Corpus corpus{mono_bundle(21, 3), mono_bundle(22, 3)};
  EnvConfig c;
  env::VectorEnv a(4, corpus, c, 5), b(4, corpus, c, 5);
  for (int i = 0; i < 4; ++i) CHECK(a.piece_index(i) == b.piece_index(i));

  // Stepping env 0 alone leaves the others untouched.
  std::vector<Action> acts(4, Action::kKeep);
  acts[0] = Action::kIncrease;
  const auto before = a.env(1).pose();
  const auto res = a.step_all(acts);
  CHECK(res.size() == 4);
  CHECK(a.env(0).pose().v_pxl == c.delta_v);
  CHECK(a.env(1).pose().v_pxl == 0.0);
  CHECK(a.env(1).pose().frame == before.frame + 1);

  std::vector<Action> bad(3, Action::kKeep);
  CHECK_THROWS_AS(a.step_all(bad), InvalidArgument);

  // Run env 0 to the end; the next step_all returns its reset state.
  env::VectorEnv v(1, corpus, c, 9);
  const std::size_t first = v.piece_index(0);
  std::vector<Action> keep(1, Action::kKeep);
  env::StepResult r;
  do r = v.step_all(keep)[0];
  while (!r.done);
  CHECK(v.pending_reset(0));
  r = v.step_all(keep)[0];
  CHECK(r.info.reset);
  CHECK_FALSE(r.done);
  CHECK(r.reward == 0.0);
  CHECK(v.env(0).pose().frame == 0);
  CHECK(v.piece_index(0) != first);  // two pieces: the epoch visits the other
  ScoreEnv fresh(c);
  CHECK(r.state == fresh.reset(corpus[v.piece_index(0)]));
}

TEST_CASE("vector env state save and load") {
  synth::Corpus corpus{mono_bundle(31, 4), mono_bundle(32, 4), mono_bundle(33, 4)};
  env::VectorEnv a(3, corpus, EnvConfig{}, 2);
  Rng rng(1);
  auto random_actions = [&]() {
    std::vector<Action> acts(3);
    for (auto& x : acts) x = static_cast<Action>(rng.uniform_int(3));
    return acts;
  };
  for (int i = 0; i < 40; ++i) a.step_all(random_actions());
  env::VectorEnv b(3, corpus, EnvConfig{}, 777);
  b.load(a.save());
  for (int i = 0; i < 60; ++i) {
    const auto acts = random_actions();
    const auto ra = a.step_all(acts), rb = b.step_all(acts);
    for (int k = 0; k < 3; ++k) {
      REQUIRE(ra[k].state == rb[k].state);
      REQUIRE(ra[k].reward == rb[k].reward);
    }
  }
}
