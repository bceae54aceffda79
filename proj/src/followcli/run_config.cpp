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

#include "sfg/followcli/run_config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "sfg/core/error.hpp"

namespace sfg::cli {

using nlohmann::json;

namespace {

// Reads fields of one JSON object and reports keys nobody asked for.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw UsageError("config: '" + path_ + "' must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw UsageError("config: bad value for '" + where(key) + "'");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  Section sub(const char* key) {
    seen_.insert(key);
    static const json kEmpty = json::object();
    return Section(j_.contains(key) ? j_.at(key) : kEmpty, where(key));
  }

  void finish() const {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key()))
        throw UsageError("config: unknown key '" + where(item.key()) + "'");
  }

 private:
  std::string where(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json gen_to_json(const synth::GenSpec& g) {
  return {{"n_events", g.n_events},
          {"tempo_min", g.tempo_min},
          {"tempo_max", g.tempo_max},
          {"max_voices", g.max_voices},
          {"chord_prob", g.chord_prob},
          {"pitch_lo", g.pitch_lo},
          {"pitch_hi", g.pitch_hi},
          {"durations", g.durations},
          {"tempo_change_prob", g.tempo_change_prob},
          {"engraving_exponent", g.engraving_exponent},
          {"lead_in", g.lead_in}};
}

void gen_from(Section s, synth::GenSpec& g) {
  s.get("n_events", g.n_events);
  s.get("tempo_min", g.tempo_min);
  s.get("tempo_max", g.tempo_max);
  s.get("max_voices", g.max_voices);
  s.get("chord_prob", g.chord_prob);
  s.get("pitch_lo", g.pitch_lo);
  s.get("pitch_hi", g.pitch_hi);
  s.get("durations", g.durations);
  s.get("tempo_change_prob", g.tempo_change_prob);
  s.get("engraving_exponent", g.engraving_exponent);
  s.get("lead_in", g.lead_in);
  s.finish();
}

json style_to_json(const synth::RenderStyle& r) {
  return {{"height", r.height},
          {"notehead_radius", r.notehead_radius},
          {"notehead_aspect", r.notehead_aspect},
          {"staff_step", r.staff_step},
          {"reference_pitch", r.reference_pitch},
          {"staff_intensity", r.staff_intensity},
          {"trailing_width", r.trailing_width},
          {"max_width", r.max_width},
          {"supersample", r.supersample}};
}

void style_from(Section s, synth::RenderStyle& r) {
  s.get("height", r.height);
  s.get("notehead_radius", r.notehead_radius);
  s.get("notehead_aspect", r.notehead_aspect);
  s.get("staff_step", r.staff_step);
  s.get("reference_pitch", r.reference_pitch);
  s.get("staff_intensity", r.staff_intensity);
  s.get("trailing_width", r.trailing_width);
  s.get("max_width", r.max_width);
  s.get("supersample", r.supersample);
  s.finish();
}

json audio_to_json(const synth::AudioProfile& a) {
  return {{"bins", a.bins},
          {"frame_rate", a.frame_rate},
          {"overtones", a.overtones},
          {"overtone_gain", a.overtone_gain},
          {"decay", a.decay},
          {"noise_floor", a.noise_floor}};
}

void audio_from(Section s, synth::AudioProfile& a) {
  s.get("bins", a.bins);
  s.get("frame_rate", a.frame_rate);
  s.get("overtones", a.overtones);
  s.get("overtone_gain", a.overtone_gain);
  s.get("decay", a.decay);
  s.get("noise_floor", a.noise_floor);
  s.finish();
}

json env_to_json(const env::EnvConfig& e) {
  return {{"window_w", e.window_w},         {"window_h", e.window_h},
          {"downscale", e.downscale},       {"spec_context", e.spec_context},
          {"delta_v", e.delta_v},           {"window_b", e.window_b},
          {"gamma", e.gamma},               {"v_min", e.v_min},
          {"v_max", e.v_max}};
}

void env_from(Section s, env::EnvConfig& e) {
  s.get("window_w", e.window_w);
  s.get("window_h", e.window_h);
  s.get("downscale", e.downscale);
  s.get("spec_context", e.spec_context);
  s.get("delta_v", e.delta_v);
  s.get("window_b", e.window_b);
  s.get("gamma", e.gamma);
  s.get("v_min", e.v_min);
  s.get("v_max", e.v_max);
  s.finish();
}

}  // namespace

void RunConfig::validate() const {
  synth::validate_gen_spec(corpus.gen);
  env.validate();
  a2c.validate();
  reinforce.validate();
  schedule.validate();
  nn::Adam{adam};
  if (corpus.pieces < 1) throw UsageError("corpus.pieces must be >= 1");
  if (algo != "a2c" && algo != "reinforce_bl")
    throw UsageError("algo must be a2c or reinforce_bl, got '" + algo + "'");
  if (model != "desk" && model != "paper")
    throw UsageError("model must be desk or paper, got '" + model + "'");
  if (!(split.train > 0.0) || !(split.validation > 0.0) ||
      !(split.train + split.validation <= 1.0))
    throw UsageError("split fractions must be positive and sum to at most 1");
  split_counts(corpus.pieces);
  if (corpus.style.height != env.window_h)
    throw UsageError("corpus.style.height must equal env.window_h");
}

SplitCounts RunConfig::split_counts(int n) const {
  SplitCounts s;
  s.train = static_cast<int>(std::lround(split.train * n));
  s.validation = static_cast<int>(std::lround(split.validation * n));
  s.test = n - s.train - s.validation;
  if (s.train < 1 || s.validation < 1 || s.test < 0)
    throw UsageError("split of " + std::to_string(n) +
                     " pieces leaves an empty train or validation set");
  return s;
}

json to_json(const RunConfig& c) {
  return {{"seed", c.seed},
          {"corpus",
           {{"preset", c.corpus.preset},
            {"pieces", c.corpus.pieces},
            {"gen", gen_to_json(c.corpus.gen)},
            {"style", style_to_json(c.corpus.style)},
            {"audio", audio_to_json(c.corpus.audio)}}},
          {"env_preset", c.env_preset},
          {"env", env_to_json(c.env)},
          {"model", c.model},
          {"algo", c.algo},
          {"a2c",
           {{"t_max", c.a2c.t_max},
            {"n_actors", c.a2c.n_actors},
            {"value_weight", c.a2c.value_weight},
            {"entropy_coef", c.a2c.entropy_coef},
            {"grad_clip", c.a2c.grad_clip}}},
          {"reinforce",
           {{"episodes_per_update", c.reinforce.episodes_per_update},
            {"value_weight", c.reinforce.value_weight},
            {"entropy_coef", c.reinforce.entropy_coef},
            {"grad_clip", c.reinforce.grad_clip}}},
          {"adam",
           {{"lr", c.adam.lr},
            {"beta1", c.adam.beta1},
            {"beta2", c.adam.beta2},
            {"eps", c.adam.eps}}},
          {"schedule",
           {{"updates_per_epoch", c.schedule.updates_per_epoch},
            {"patience", c.schedule.patience},
            {"max_lr_drops", c.schedule.max_lr_drops},
            {"lr_drop_factor", c.schedule.lr_drop_factor},
            {"max_epochs", c.schedule.max_epochs}}},
          {"split", {{"train", c.split.train}, {"validation", c.split.validation}}},
          {"paths", {{"corpus", c.paths.corpus}, {"out", c.paths.out}}}};
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  Section root(j, "");
  root.get("seed", c.seed);
  {
    Section s = root.sub("corpus");
    s.get("preset", c.corpus.preset);
    try {
      c.corpus.gen = synth::gen_preset(c.corpus.preset);
    } catch (const InvalidArgument& e) {
      throw UsageError(std::string("config: ") + e.what());
    }
    s.get("pieces", c.corpus.pieces);
    gen_from(s.sub("gen"), c.corpus.gen);
    style_from(s.sub("style"), c.corpus.style);
    audio_from(s.sub("audio"), c.corpus.audio);
    s.finish();
  }
  root.get("env_preset", c.env_preset);
  try {
    c.env = env::env_preset(c.env_preset);
  } catch (const InvalidArgument& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  env_from(root.sub("env"), c.env);
  root.get("model", c.model);
  root.get("algo", c.algo);
  {
    Section s = root.sub("a2c");
    s.get("t_max", c.a2c.t_max);
    s.get("n_actors", c.a2c.n_actors);
    s.get("value_weight", c.a2c.value_weight);
    s.get("entropy_coef", c.a2c.entropy_coef);
    s.get("grad_clip", c.a2c.grad_clip);
    s.finish();
  }
  {
    Section s = root.sub("reinforce");
    s.get("episodes_per_update", c.reinforce.episodes_per_update);
    s.get("value_weight", c.reinforce.value_weight);
    s.get("entropy_coef", c.reinforce.entropy_coef);
    s.get("grad_clip", c.reinforce.grad_clip);
    s.finish();
  }
  {
    Section s = root.sub("adam");
    s.get("lr", c.adam.lr);
    s.get("beta1", c.adam.beta1);
    s.get("beta2", c.adam.beta2);
    s.get("eps", c.adam.eps);
    s.finish();
  }
  {
    Section s = root.sub("schedule");
    s.get("updates_per_epoch", c.schedule.updates_per_epoch);
    s.get("patience", c.schedule.patience);
    s.get("max_lr_drops", c.schedule.max_lr_drops);
    s.get("lr_drop_factor", c.schedule.lr_drop_factor);
    s.get("max_epochs", c.schedule.max_epochs);
    s.finish();
  }
  {
    Section s = root.sub("split");
    s.get("train", c.split.train);
    s.get("validation", c.split.validation);
    s.finish();
  }
  {
    Section s = root.sub("paths");
    s.get("corpus", c.paths.corpus);
    s.get("out", c.paths.out);
    s.finish();
  }
  root.finish();
  try {
    c.validate();
  } catch (const UsageError&) {
    throw;
  } catch (const Error& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("config " + path + " is not valid JSON: " + e.what());
  }
  return run_config_from_json(j);
}

}  // namespace sfg::cli
