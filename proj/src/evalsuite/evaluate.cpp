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

#include "sfg/evalsuite/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "sfg/core/error.hpp"

namespace sfg::eval {

std::vector<env::Action> NetworkPolicy::act(std::span<const env::ScoreEnv* const> envs) {
  std::vector<const env::MdpState*> states;
  states.reserve(envs.size());
  for (const auto* e : envs) states.push_back(&e->state());
  const auto res = model::act_batch(net_, states, &rng_, mode_);
  std::vector<env::Action> out;
  out.reserve(res.size());
  for (const auto& r : res) out.push_back(r.action);
  return out;
}

std::vector<env::Action> OraclePolicy::act(std::span<const env::ScoreEnv* const> envs) {
  std::vector<env::Action> out;
  out.reserve(envs.size());
  for (const auto* e : envs) {
    const auto& pose = e->pose();
    const auto& x = e->bundle().alignment.x;
    const int next = std::min<int>(pose.frame + 1, static_cast<int>(x.size()) - 1);
    const double wanted = x[next] - pose.x_hat;
    const auto& cfg = e->config();
    int best = 0;
    double best_err = std::numeric_limits<double>::infinity();
    for (int a = 0; a < env::kNumActions; ++a) {
      const double v = std::clamp(
          pose.v_pxl + env::speed_change(env::action_from_index(a), cfg.delta_v),
          cfg.v_min, cfg.v_max);
      const double err = std::abs(v - wanted);
      if (err < best_err) {
        best_err = err;
        best = a;
      }
    }
    out.push_back(env::action_from_index(best));
  }
  return out;
}

EvalReport aggregate(std::vector<PieceResult> pieces) {
  EvalReport r;
  r.per_piece = std::move(pieces);
  if (r.per_piece.empty()) throw InvalidArgument("evaluation over an empty corpus");
  long tracked = 0, total = 0, to_end = 0;
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& p : r.per_piece) {
    to_end += p.tracked_to_end ? 1 : 0;
    tracked += p.onsets_tracked;
    total += p.onsets_total;
    for (double d : p.abs_dx) sum += d;
    count += p.abs_dx.size();
  }
  r.r_tue = static_cast<double>(to_end) / r.per_piece.size();
  r.r_on = total > 0 ? static_cast<double>(tracked) / total : 0.0;
  if (count > 0) {
    r.mean_abs_dx = sum / count;
    double sq = 0.0;
    for (const auto& p : r.per_piece)
      for (double d : p.abs_dx) sq += (d - r.mean_abs_dx) * (d - r.mean_abs_dx);
    r.std_abs_dx = std::sqrt(sq / count);
  }
  return r;
}

namespace {

void note_frame(PieceResult& pr, const synth::PieceBundle& b, int frame, double d_x,
                double window_b) {
  if (b.onset_flag[frame] && std::abs(d_x) <= window_b) {
    ++pr.onsets_tracked;
    pr.abs_dx.push_back(std::abs(d_x));
  }
}

}  // namespace

EvalReport evaluate_run(EvalPolicy& policy, const synth::Corpus& corpus,
                        const env::EnvConfig& config, std::uint64_t seed) {
  if (corpus.empty()) throw InvalidArgument("evaluation over an empty corpus");
  policy.begin_run(seed);
  const std::size_t n = corpus.size();
  std::vector<env::ScoreEnv> envs(n, env::ScoreEnv(config));
  std::vector<PieceResult> results(n);
  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& b = *corpus[i];
    envs[i].reset(corpus[i]);
    results[i].id = b.piece.id;
    results[i].onsets_total = static_cast<int>(b.onset_frames.size());
    note_frame(results[i], b, 0, 0.0, config.window_b);
    if (b.num_frames() == 1) {
      results[i].tracked_to_end = true;
    } else {
      live.push_back(i);
    }
  }
  // All live pieces advance in lockstep so the network sees one batch.
  std::vector<const env::ScoreEnv*> view;
  while (!live.empty()) {
    view.clear();
    for (std::size_t i : live) view.push_back(&envs[i]);
    const auto actions = policy.act(view);
    if (actions.size() != live.size())
      throw InvalidArgument("policy returned a wrong number of actions");
    std::vector<std::size_t> still;
    for (std::size_t k = 0; k < live.size(); ++k) {
      const std::size_t i = live[k];
      const auto r = envs[i].step(actions[k]);
      auto& pr = results[i];
      ++pr.frames_survived;
      const bool lost = std::abs(r.info.d_x) > config.window_b;
      note_frame(pr, *corpus[i], r.info.frame, r.info.d_x, config.window_b);
      if (r.done) {
        pr.tracked_to_end = !lost;
      } else {
        still.push_back(i);
      }
    }
    live.swap(still);
  }
  return aggregate(std::move(results));
}

MultiRunReport evaluate(EvalPolicy& policy, const synth::Corpus& corpus,
                        const env::EnvConfig& config, int runs, std::uint64_t seed) {
  if (runs < 1) throw InvalidArgument("runs must be >= 1");
  MultiRunReport m;
  for (int r = 0; r < runs; ++r)
    m.runs.push_back(evaluate_run(policy, corpus, config, derive_seed(seed, "eval-run", r)));
  m.mean.per_piece = m.runs.front().per_piece;
  for (const auto& r : m.runs) {
    m.mean.r_tue += r.r_tue / runs;
    m.mean.r_on += r.r_on / runs;
    m.mean.mean_abs_dx += r.mean_abs_dx / runs;
    m.mean.std_abs_dx += r.std_abs_dx / runs;
  }
  return m;
}

std::vector<env::TrajectoryRow> rollout_trajectory(EvalPolicy& policy,
                                                   synth::BundlePtr bundle,
                                                   const env::EnvConfig& config,
                                                   std::uint64_t seed) {
  policy.begin_run(seed);
  env::ScoreEnv e(config);
  e.reset(bundle);
  std::vector<env::TrajectoryRow> rows;
  env::TrajectoryRow first;
  first.x = e.target();
  first.x_hat = e.pose().x_hat;
  first.d_x = first.x_hat - first.x;
  first.reward = env::reward_fn(first.x_hat, first.x, config.window_b);
  first.done = bundle->num_frames() == 1;
  first.onset_flag = bundle->onset_flag[0];
  rows.push_back(first);
  while (!e.done()) {
    const env::ScoreEnv* p = &e;
    const auto a = policy.act(std::span<const env::ScoreEnv* const>(&p, 1)).front();
    const auto r = e.step(a);
    env::TrajectoryRow row;
    row.frame = r.info.frame;
    row.x = r.info.x;
    row.x_hat = r.info.x_hat;
    row.d_x = r.info.d_x;
    row.v_pxl = r.info.v_pxl;
    row.action = static_cast<int>(a);
    row.reward = r.reward;
    row.done = r.done;
    row.onset_flag = r.info.onset_flag;
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json report_to_json(const EvalReport& r) {
  nlohmann::json pieces = nlohmann::json::array();
  for (const auto& p : r.per_piece) {
    pieces.push_back({{"id", p.id},
                      {"tracked_to_end", p.tracked_to_end},
                      {"onsets_tracked", p.onsets_tracked},
                      {"onsets_total", p.onsets_total},
                      {"frames_survived", p.frames_survived},
                      {"abs_dx", p.abs_dx}});
  }
  return {{"R_tue", r.r_tue},
          {"R_on", r.r_on},
          {"mean_abs_dx", r.mean_abs_dx},
          {"std_abs_dx", r.std_abs_dx},
          {"per_piece", pieces}};
}

void write_report_csv(std::ostream& os, const EvalReport& r) {
  os << "id,tracked_to_end,onsets_tracked,onsets_total,frames_survived,mean_abs_dx\n";
  char buf[128];
  for (const auto& p : r.per_piece) {
    double mean = 0.0;
    for (double d : p.abs_dx) mean += d;
    if (!p.abs_dx.empty()) mean /= p.abs_dx.size();
    std::snprintf(buf, sizeof(buf), ",%d,%d,%d,%d,%.10g\n", p.tracked_to_end ? 1 : 0,
                  p.onsets_tracked, p.onsets_total, p.frames_survived, mean);
    os << p.id << buf;
  }
}

}  // namespace sfg::eval
