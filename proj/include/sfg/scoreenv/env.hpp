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

#ifndef SFG_SCOREENV_ENV_HPP_
#define SFG_SCOREENV_ENV_HPP_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sfg/synthgen/piece.hpp"

namespace sfg::env {

// All positions, speeds and the tracking window are in strip pixels (the
// full-resolution score raster). The defaults for window_b and the speed
// clamp correspond to 50 and [-8, 32] pixels at the downscaled resolution
// seen by the network.
struct EnvConfig {
  int window_w = 512;
  int window_h = 160;
  int downscale = 2;
  int spec_context = 40;
  double delta_v = 0.5;    // px/step per tempo action
  double window_b = 100.0; // tracking half-width
  double gamma = 0.9;
  double v_min = -16.0;
  double v_max = 64.0;

  int obs_rows() const { return window_h / downscale; }
  int obs_cols() const { return window_w / downscale; }

  void validate() const;
  bool operator==(const EnvConfig&) const = default;
};

// "mono" (delta_v 0.5) and "poly" (delta_v 1.0).
EnvConfig env_preset(const std::string& name);

enum class Action : int { kDecrease = 0, kKeep = 1, kIncrease = 2 };
inline constexpr int kNumActions = 3;

double speed_change(Action a, double delta_v);
const char* action_name(Action a);
Action action_from_index(int index);

struct AgentPose {
  double x_hat = 0.0;  // window center in strip pixels
  double v_pxl = 0.0;
  int frame = 0;

  bool operator==(const AgentPose&) const = default;
};

struct Plane {
  int rows = 0;
  int cols = 0;
  std::vector<float> data;

  float at(int r, int c) const {
    return data[static_cast<std::size_t>(r) * cols + c];
  }
  bool operator==(const Plane&) const = default;
};

struct MdpState {
  Plane sheet;
  Plane sheet_delta;
  Plane spec;
  Plane spec_delta;

  bool operator==(const MdpState&) const = default;
};

struct StepInfo {
  double d_x = 0.0;
  double x = 0.0;
  double x_hat = 0.0;
  double v_pxl = 0.0;
  int frame = 0;
  bool onset_flag = false;
  bool reset = false;  // set by VectorEnv when the step was an auto-reset
};

struct StepResult {
  MdpState state;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

// max(0, 1 - |x_hat - x| / b).
double reward_fn(double x_hat, double x, double b);

// Markov state for `pose`. Without `previous` the delta planes are zero,
// otherwise they are the elementwise difference to previous's planes.
MdpState observe(const AgentPose& pose, const synth::PieceBundle& bundle,
                 const EnvConfig& config, const MdpState* previous = nullptr);

// Throws InvalidArgument when the bundle cannot be played under config.
void check_bundle(const synth::PieceBundle& bundle, const EnvConfig& config);

// Enough to rebuild an environment mid-episode.
struct EnvSnapshot {
  AgentPose pose;
  AgentPose prev_pose;
  bool has_prev = false;
  bool done = false;
};

// One score-following episode on one piece. Single-threaded; movable.
class ScoreEnv {
 public:
  explicit ScoreEnv(EnvConfig config);

  const MdpState& reset(synth::BundlePtr bundle);
  StepResult step(Action action);

  bool done() const { return done_; }
  const AgentPose& pose() const { return pose_; }
  const MdpState& state() const { return state_; }
  const EnvConfig& config() const { return config_; }
  const synth::PieceBundle& bundle() const { return *bundle_; }
  const synth::BundlePtr& bundle_ptr() const { return bundle_; }
  bool has_bundle() const { return static_cast<bool>(bundle_); }
  double target() const { return bundle_->alignment.x[pose_.frame]; }

  EnvSnapshot snapshot() const;
  void restore(synth::BundlePtr bundle, const EnvSnapshot& snap);

 private:
  EnvConfig config_;
  synth::BundlePtr bundle_;
  AgentPose pose_;
  AgentPose prev_pose_;
  bool has_prev_ = false;
  bool done_ = true;
  MdpState state_;
};

// Trajectory export; the header is
// "frame,x,x_hat,d_x,v_pxl,action,reward,done,onset_flag".
struct TrajectoryRow {
  int frame = 0;
  double x = 0.0;
  double x_hat = 0.0;
  double d_x = 0.0;
  double v_pxl = 0.0;
  int action = -1;  // -1 for the reset row, otherwise an Action index
  double reward = 0.0;
  bool done = false;
  bool onset_flag = false;
};

inline constexpr const char* kTrajectoryHeader =
    "frame,x,x_hat,d_x,v_pxl,action,reward,done,onset_flag";

void write_trajectory_csv(std::ostream& os, std::span<const TrajectoryRow> rows);

}  // namespace sfg::env

#endif  // SFG_SCOREENV_ENV_HPP_
