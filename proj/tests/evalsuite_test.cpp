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
#include <sstream>

#include "sfg/core/error.hpp"
#include "sfg/evalsuite/evaluate.hpp"
#include "sfg/policymodel/model.hpp"
#include "sfg/synthgen/synthgen.hpp"

using namespace sfg;
using eval::PieceResult;

namespace {

synth::Corpus mono_corpus(std::uint64_t seed, int n, int events = 10) {
  synth::GenSpec gs = synth::gen_preset("mono");
  gs.n_events = events;
  return synth::generate_corpus(seed, n, gs, {}, {});
}

// A generated piece whose ground truth moves at `slope` px/frame from the
// first frame on.
synth::BundlePtr linear_piece(std::uint64_t seed, double slope) {
  auto b = std::make_shared<synth::PieceBundle>(*mono_corpus(seed, 1, 32).front());
  const double x0 = b->alignment.x.front();
  for (std::size_t t = 0; t < b->alignment.x.size(); ++t) b->alignment.x[t] = x0 + slope * t;
  return b;
}

env::EnvConfig small_env() {
  env::EnvConfig c = env::env_preset("mono");
  c.downscale = 8;
  return c;
}

}  // namespace

TEST_CASE("counting over per-piece results") {
  PieceResult a{"a", true, 4, 4, 40, {1, 2, 3, 4}};
  PieceResult b{"b", false, 2, 4, 17, {5, 5}};
  const auto r = eval::aggregate({a, b});
  CHECK(r.r_tue == 0.5);
  CHECK(r.r_on == 0.75);
  // Pooled population statistics over the six samples.
  CHECK(std::abs(r.mean_abs_dx - 20.0 / 6) < 1e-12);
  double sq = 0;
  for (double d : {1.0, 2.0, 3.0, 4.0, 5.0, 5.0}) sq += (d - 20.0 / 6) * (d - 20.0 / 6);
  CHECK(std::abs(r.std_abs_dx - std::sqrt(sq / 6)) < 1e-12);
  CHECK_THROWS_AS(eval::aggregate({}), InvalidArgument);

  const auto none = eval::aggregate({PieceResult{"c", false, 0, 3, 1, {}}});
  CHECK(none.r_on == 0.0);
  CHECK(none.mean_abs_dx == 0.0);
  CHECK(none.std_abs_dx == 0.0);
}

TEST_CASE("oracle tracks a constant-tempo piece to the end") {
  const env::EnvConfig c = env::env_preset("mono");
  for (double slope : {2.5, 3.3, 4.7}) {
    eval::OraclePolicy oracle;
    const auto r = eval::evaluate_run(oracle, {linear_piece(3, slope)}, c, 1);
    CHECK(r.r_tue == 1.0);
    CHECK(r.r_on == 1.0);
    // Starting from rest the greedy oracle lags, then overshoots in a damped
    // oscillation; once settled the error stays below one action step.
    const auto rows = eval::rollout_trajectory(oracle, linear_piece(3, slope), c, 1);
    const int settle = static_cast<int>(8 * slope / c.delta_v);
    double sum = 0;
    int n = 0;
    for (const auto& row : rows)
      if (row.onset_flag && row.frame >= settle) {
        sum += std::abs(row.d_x);
        ++n;
      }
    REQUIRE(n > 0);
    CHECK(sum / n < c.delta_v);
  }
  eval::OraclePolicy oracle;
  const auto r = eval::evaluate_run(oracle, mono_corpus(4, 6, 32), c, 1);
  CHECK(r.r_tue == 1.0);
  CHECK(r.r_on == 1.0);
}

TEST_CASE("frozen policy drops out at ceil(b / slope)") {
  const env::EnvConfig c = env::env_preset("mono");
  for (double slope : {3.0, 4.5, 7.0}) {
    const auto piece = linear_piece(5, slope);
    eval::ConstantPolicy keep(env::Action::kKeep);
    const auto r = eval::evaluate_run(keep, {piece}, c, 1);
    const int drop = static_cast<int>(std::ceil(c.window_b / slope));
    const auto& p = r.per_piece.front();
    CHECK(p.frames_survived == drop);
    CHECK_FALSE(p.tracked_to_end);
    int expected = 0;
    for (int f : piece->onset_frames) expected += f < drop;
    CHECK(p.onsets_tracked == expected);
    CHECK(p.onsets_total == static_cast<int>(piece->onset_frames.size()));
    for (double d : p.abs_dx) CHECK(d <= c.window_b);
  }
}

TEST_CASE("metric invariants on random policies") {
  const env::EnvConfig c = small_env();
  const auto corpus = mono_corpus(6, 5);
  nn::Network net(model::model_preset("desk", c), 2);
  eval::NetworkPolicy pol(net, model::ActMode::kSample);
  for (int run = 0; run < 4; ++run) {
    const auto r = eval::evaluate_run(pol, corpus, c, run);
    CHECK(r.r_tue >= 0.0);
    CHECK(r.r_tue <= 1.0);
    CHECK(r.r_on >= 0.0);
    CHECK(r.r_on <= 1.0);
    CHECK(r.std_abs_dx >= 0.0);
    if (r.r_tue == 1.0) CHECK(r.r_on == 1.0);
    for (const auto& p : r.per_piece) {
      CHECK(p.onsets_tracked <= p.onsets_total);
      CHECK(p.abs_dx.size() == static_cast<std::size_t>(p.onsets_tracked));
    }
  }
}

TEST_CASE("evaluation is deterministic and read-only") {
  const env::EnvConfig c = small_env();
  const auto corpus = mono_corpus(7, 4);
  nn::Network net(model::model_preset("desk", c), 3);
  const nn::ParamStore before = net.params();
  auto dump = [&](model::ActMode mode, std::uint64_t seed) {
    eval::NetworkPolicy pol(net, mode);
    const auto m = eval::evaluate(pol, corpus, c, 3, seed);
    return eval::report_to_json(m.mean).dump() + eval::report_to_json(m.runs[2]).dump();
  };
  CHECK(dump(model::ActMode::kSample, 5) == dump(model::ActMode::kSample, 5));
  CHECK(dump(model::ActMode::kGreedy, 5) == dump(model::ActMode::kGreedy, 9));
  CHECK(net.params() == before);
}

TEST_CASE("multi-run report averages each metric") {
  const env::EnvConfig c = small_env();
  const auto corpus = mono_corpus(8, 3);
  nn::Network net(model::model_preset("desk", c), 4);
  eval::NetworkPolicy pol(net, model::ActMode::kSample);
  const auto m = eval::evaluate(pol, corpus, c, 4, 11);
  REQUIRE(m.runs.size() == 4);
  double on = 0, tue = 0, mean = 0, sd = 0;
  for (const auto& r : m.runs) {
    on += r.r_on;
    tue += r.r_tue;
    mean += r.mean_abs_dx;
    sd += r.std_abs_dx;
  }
  CHECK(std::abs(m.mean.r_on - on / 4) < 1e-12);
  CHECK(std::abs(m.mean.r_tue - tue / 4) < 1e-12);
  CHECK(std::abs(m.mean.mean_abs_dx - mean / 4) < 1e-12);
  CHECK(std::abs(m.mean.std_abs_dx - sd / 4) < 1e-12);
  // Run r uses its own derived stream.
  const auto single = eval::evaluate_run(pol, corpus, c, derive_seed(11, "eval-run", 2));
  CHECK(eval::report_to_json(single).dump() == eval::report_to_json(m.runs[2]).dump());
  CHECK_THROWS_AS(eval::evaluate(pol, corpus, c, 0, 1), InvalidArgument);
  CHECK_THROWS_AS(eval::evaluate_run(pol, {}, c, 1), InvalidArgument);
}

TEST_CASE("rollout trajectory rows") {
  const env::EnvConfig c = env::env_preset("mono");
  const auto piece = linear_piece(9, 4.0);
  eval::ConstantPolicy keep(env::Action::kKeep);
  const auto rows = eval::rollout_trajectory(keep, piece, c, 1);
  CHECK(rows.size() == static_cast<std::size_t>(std::ceil(c.window_b / 4.0)) + 1);
  CHECK(rows.front().action == -1);
  CHECK(rows.front().frame == 0);
  CHECK(rows.back().done);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].frame == static_cast<int>(i));
    CHECK(rows[i].reward >= 0.0);
    CHECK(rows[i].reward <= 1.0);
    CHECK(rows[i].action == static_cast<int>(env::Action::kKeep));
  }
  eval::OraclePolicy oracle;
  const auto full = eval::rollout_trajectory(oracle, piece, c, 1);
  CHECK(full.size() == static_cast<std::size_t>(piece->num_frames()));
}

TEST_CASE("report serialization") {
  PieceResult a{"p0", true, 2, 2, 9, {1.0, 3.0}};
  PieceResult b{"p1", false, 0, 2, 3, {}};
  const auto r = eval::aggregate({a, b});
  const auto j = eval::report_to_json(r);
  CHECK(j["R_on"] == 0.5);
  CHECK(j["R_tue"] == 0.5);
  CHECK(j["per_piece"].size() == 2);
  CHECK(j["per_piece"][0]["abs_dx"].size() == 2);
  std::ostringstream os;
  eval::write_report_csv(os, r);
  CHECK(os.str() ==
        "id,tracked_to_end,onsets_tracked,onsets_total,frames_survived,mean_abs_dx\n"
        "p0,1,2,2,9,2\n"
        "p1,0,0,2,3,0\n");
}
