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

#ifndef SFG_EVALSUITE_EVALUATE_HPP_
#define SFG_EVALSUITE_EVALUATE_HPP_

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sfg/core/rng.hpp"
#include "sfg/policymodel/model.hpp"
#include "sfg/scoreenv/env.hpp"
#include "sfg/synthgen/piece.hpp"
#include "sfg/tensornet/graph.hpp"

namespace sfg::eval {

// Chooses actions for a batch of live environments. Implementations must be
// deterministic given the stream passed to begin_run().
class EvalPolicy {
 public:
  virtual ~EvalPolicy() = default;
  virtual void begin_run(std::uint64_t /*seed*/) {}
  virtual std::vector<env::Action> act(std::span<const env::ScoreEnv* const> envs) = 0;
};

// Greedy (or sampled) actions from a policy network, dropout disabled.
class NetworkPolicy : public EvalPolicy {
 public:
  NetworkPolicy(const nn::Network& net, model::ActMode mode)
      : net_(net), mode_(mode) {}
  void begin_run(std::uint64_t seed) override { rng_ = make_stream(seed, "eval"); }
  std::vector<env::Action> act(std::span<const env::ScoreEnv* const> envs) override;

 private:
  const nn::Network& net_;
  model::ActMode mode_;
  Rng rng_;
};

// Steers towards the next ground-truth position: the action whose resulting
// speed lands x_hat closest to x[t+1] (lowest index on ties).
class OraclePolicy : public EvalPolicy {
 public:
  std::vector<env::Action> act(std::span<const env::ScoreEnv* const> envs) override;
};

// Always the same action.
class ConstantPolicy : public EvalPolicy {
 public:
  explicit ConstantPolicy(env::Action a) : action_(a) {}
  std::vector<env::Action> act(std::span<const env::ScoreEnv* const> envs) override {
    return std::vector<env::Action>(envs.size(), action_);
  }

 private:
  env::Action action_;
};

struct PieceResult {
  std::string id;
  bool tracked_to_end = false;
  int onsets_tracked = 0;
  int onsets_total = 0;
  int frames_survived = 0;  // steps taken before the episode ended
  std::vector<double> abs_dx;  // at tracked onset frames
};

struct EvalReport {
  double r_tue = 0.0;
  double r_on = 0.0;
  double mean_abs_dx = 0.0;
  double std_abs_dx = 0.0;  // population std over pooled samples
  std::vector<PieceResult> per_piece;
};

// Counting and pooling over per-piece results.
EvalReport aggregate(std::vector<PieceResult> pieces);

// Plays every piece once from reset with no mid-piece resets.
EvalReport evaluate_run(EvalPolicy& policy, const synth::Corpus& corpus,
                        const env::EnvConfig& config, std::uint64_t seed);

struct MultiRunReport {
  std::vector<EvalReport> runs;
  EvalReport mean;  // per-metric mean over runs; per_piece taken from run 0
};

// runs >= 1; run r uses derive_seed(seed, "eval-run", r).
MultiRunReport evaluate(EvalPolicy& policy, const synth::Corpus& corpus,
                        const env::EnvConfig& config, int runs, std::uint64_t seed);

// One greedy (or sampled) rollout with a trajectory row per visited frame
// (the reset row included).
std::vector<env::TrajectoryRow> rollout_trajectory(EvalPolicy& policy,
                                                   synth::BundlePtr bundle,
                                                   const env::EnvConfig& config,
                                                   std::uint64_t seed);

nlohmann::json report_to_json(const EvalReport& r);
// Per-piece CSV: id,tracked_to_end,onsets_tracked,onsets_total,frames_survived,mean_abs_dx
void write_report_csv(std::ostream& os, const EvalReport& r);

}  // namespace sfg::eval

#endif  // SFG_EVALSUITE_EVALUATE_HPP_
