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

#include "sfg/scoreenv/env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "sfg/core/error.hpp"

namespace sfg::env {

void EnvConfig::validate() const {
  if (downscale < 1) throw InvalidArgument("downscale must be >= 1");
  if (window_w < 1 || window_h < 1 || window_w % downscale != 0 ||
      window_h % downscale != 0)
    throw InvalidArgument("window size must be a positive multiple of downscale");
  if (spec_context < 2) throw InvalidArgument("spec_context must be >= 2");
  if (!(delta_v > 0.0)) throw InvalidArgument("delta_v must be > 0");
  if (!(window_b > 0.0)) throw InvalidArgument("window_b must be > 0");
  if (!(gamma > 0.0 && gamma <= 1.0))
    throw InvalidArgument("gamma must lie in (0, 1]");
  if (!(v_min <= 0.0 && v_max > 0.0))
    throw InvalidArgument("speed clamp must satisfy v_min <= 0 < v_max");
}

EnvConfig env_preset(const std::string& name) {
  EnvConfig c;
  if (name == "mono") {
    c.delta_v = 0.5;
  } else if (name == "poly") {
    c.delta_v = 1.0;
  } else {
    throw InvalidArgument("unknown environment preset '" + name + "'");
  }
  return c;
}

double speed_change(Action a, double delta_v) {
  switch (a) {
    case Action::kDecrease: return -delta_v;
    case Action::kKeep: return 0.0;
    case Action::kIncrease: return delta_v;
  }
  throw InvalidArgument("invalid action");
}

const char* action_name(Action a) {
  switch (a) {
    case Action::kDecrease: return "decrease";
    case Action::kKeep: return "keep";
    case Action::kIncrease: return "increase";
  }
  return "?";
}

Action action_from_index(int index) {
  if (index < 0 || index >= kNumActions)
    throw InvalidArgument("action index out of range: " + std::to_string(index));
  return static_cast<Action>(index);
}

double reward_fn(double x_hat, double x, double b) {
  const double d = std::abs(x_hat - x);
  const double r = std::max(0.0, 1.0 - d / b);
  // Errors below half an ulp of 1 would otherwise round to a perfect score.
  return (r == 1.0 && d > 0.0) ? std::nextafter(1.0, 0.0) : r;
}

void check_bundle(const synth::PieceBundle& bundle, const EnvConfig& config) {
  config.validate();
  const int frames = bundle.spectrogram.frames;
  if (frames < 1) throw InvalidArgument("piece has no spectrogram frames");
  if (static_cast<int>(bundle.alignment.x.size()) != frames)
    throw InvalidArgument("alignment length differs from spectrogram frames");
  if (bundle.score.height != config.window_h)
    throw InvalidArgument("score height " + std::to_string(bundle.score.height) +
                          " differs from window_h " +
                          std::to_string(config.window_h));
  if (bundle.spectrogram.values.size() !=
      static_cast<std::size_t>(bundle.spectrogram.bins) * frames)
    throw InvalidArgument("spectrogram storage size mismatch");
  if (static_cast<int>(bundle.onset_flag.size()) != frames)
    throw InvalidArgument("onset flags missing from bundle");
}

MdpState observe(const AgentPose& pose, const synth::PieceBundle& bundle,
                 const EnvConfig& config, const MdpState* previous) {
  MdpState s;
  const int d = config.downscale;
  const int rows = config.obs_rows();
  const int cols = config.obs_cols();
  s.sheet.rows = rows;
  s.sheet.cols = cols;
  s.sheet.data.assign(static_cast<std::size_t>(rows) * cols, 0.0f);

  const auto& strip = bundle.score;
  const long center = std::lround(pose.x_hat);
  const long left = center - config.window_w / 2;
  const float inv_area = 1.0f / static_cast<float>(d * d);
  for (int j = 0; j < cols; ++j) {
    const long c0 = left + static_cast<long>(j) * d;
    for (int i = 0; i < rows; ++i) {
      float acc = 0.0f;
      for (int dr = 0; dr < d; ++dr) {
        const int r = i * d + dr;
        if (r >= strip.height) continue;
        const float* row = &strip.pixels[static_cast<std::size_t>(r) * strip.width];
        for (int dc = 0; dc < d; ++dc) {
          const long c = c0 + dc;
          if (c >= 0 && c < strip.width) acc += row[c];
        }
      }
      s.sheet.data[static_cast<std::size_t>(i) * cols + j] = acc * inv_area;
    }
  }

  const auto& spec = bundle.spectrogram;
  const int ctx = config.spec_context;
  s.spec.rows = spec.bins;
  s.spec.cols = ctx;
  s.spec.data.assign(static_cast<std::size_t>(spec.bins) * ctx, 0.0f);
  for (int k = 0; k < ctx; ++k) {
    const int f = pose.frame - ctx + 1 + k;
    if (f < 0 || f >= spec.frames) continue;
    for (int b = 0; b < spec.bins; ++b)
      s.spec.data[static_cast<std::size_t>(b) * ctx + k] = spec.at(b, f);
  }

  s.sheet_delta = s.sheet;
  s.spec_delta = s.spec;
  if (previous) {
    if (previous->sheet.data.size() != s.sheet.data.size() ||
        previous->spec.data.size() != s.spec.data.size())
      throw ShapeError("observe: previous state has a different shape");
    for (std::size_t i = 0; i < s.sheet.data.size(); ++i)
      s.sheet_delta.data[i] = s.sheet.data[i] - previous->sheet.data[i];
    for (std::size_t i = 0; i < s.spec.data.size(); ++i)
      s.spec_delta.data[i] = s.spec.data[i] - previous->spec.data[i];
  } else {
    std::fill(s.sheet_delta.data.begin(), s.sheet_delta.data.end(), 0.0f);
    std::fill(s.spec_delta.data.begin(), s.spec_delta.data.end(), 0.0f);
  }
  return s;
}

ScoreEnv::ScoreEnv(EnvConfig config) : config_(config) { config_.validate(); }

const MdpState& ScoreEnv::reset(synth::BundlePtr bundle) {
  if (!bundle) throw InvalidArgument("reset: null piece bundle");
  check_bundle(*bundle, config_);
  bundle_ = std::move(bundle);
  pose_ = AgentPose{bundle_->alignment.x[0], 0.0, 0};
  has_prev_ = false;
  done_ = bundle_->num_frames() == 1;
  state_ = observe(pose_, *bundle_, config_);
  return state_;
}

StepResult ScoreEnv::step(Action action) {
  if (!bundle_ || done_) throw StateError("episode finished");
  prev_pose_ = pose_;
  has_prev_ = true;
  pose_.v_pxl = std::clamp(pose_.v_pxl + speed_change(action, config_.delta_v),
                           config_.v_min, config_.v_max);
  pose_.x_hat += pose_.v_pxl;
  pose_.frame += 1;

  StepResult r;
  const double x = bundle_->alignment.x[pose_.frame];
  r.info.x = x;
  r.info.d_x = pose_.x_hat - x;
  r.info.x_hat = pose_.x_hat;
  r.info.v_pxl = pose_.v_pxl;
  r.info.frame = pose_.frame;
  r.info.onset_flag = bundle_->onset_flag[pose_.frame];
  r.reward = reward_fn(pose_.x_hat, x, config_.window_b);
  done_ = std::abs(r.info.d_x) > config_.window_b ||
          pose_.frame == bundle_->num_frames() - 1;
  r.done = done_;
  MdpState next = observe(pose_, *bundle_, config_, &state_);
  state_ = std::move(next);
  r.state = state_;
  return r;
}

EnvSnapshot ScoreEnv::snapshot() const {
  return EnvSnapshot{pose_, prev_pose_, has_prev_, done_};
}

void ScoreEnv::restore(synth::BundlePtr bundle, const EnvSnapshot& snap) {
  if (!bundle) throw InvalidArgument("restore: null piece bundle");
  check_bundle(*bundle, config_);
  if (snap.pose.frame < 0 || snap.pose.frame >= bundle->num_frames())
    throw InvalidArgument("restore: frame out of range");
  bundle_ = std::move(bundle);
  pose_ = snap.pose;
  prev_pose_ = snap.prev_pose;
  has_prev_ = snap.has_prev;
  done_ = snap.done;
  if (has_prev_) {
    const MdpState prev = observe(prev_pose_, *bundle_, config_);
    state_ = observe(pose_, *bundle_, config_, &prev);
  } else {
    state_ = observe(pose_, *bundle_, config_);
  }
}

void write_trajectory_csv(std::ostream& os, std::span<const TrajectoryRow> rows) {
  os << kTrajectoryHeader << "\n";
  char buf[256];
  for (const auto& r : rows) {
    const char* action =
        r.action < 0 ? "none" : action_name(static_cast<Action>(r.action));
    std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%.10g,%.10g,%s,%.10g,%d,%d\n",
                  r.frame, r.x, r.x_hat, r.d_x, r.v_pxl, action, r.reward,
                  r.done ? 1 : 0, r.onset_flag ? 1 : 0);
    os << buf;
  }
}

}  // namespace sfg::env
