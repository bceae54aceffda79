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

#include "sfg/learners/policy_gradient.hpp"

#include <algorithm>
#include <cmath>

#include "sfg/core/error.hpp"
#include "sfg/learners/returns.hpp"
#include "sfg/policymodel/model.hpp"

namespace sfg::learn {

using nlohmann::json;

void LossStats::add(const LossStats& o) {
  policy_loss += o.policy_loss;
  value_loss += o.value_loss;
  entropy += o.entropy;
  advantage += o.advantage;
  target += o.target;
  samples += o.samples;
}

LossStats accumulate_pg_grad(const nn::Network& net, nn::ForwardResult& fwd,
                             std::span<const int> actions,
                             std::span<const double> returns,
                             const double* baseline, const LossWeights& w,
                             double weight, nn::Gradients& grads) {
  const int n = fwd.tape.batch;
  if (static_cast<int>(actions.size()) != n || static_cast<int>(returns.size()) != n)
    throw ShapeError("policy-gradient batch: actions/returns do not match the batch");
  const bool has_value = net.num_outputs() > 1;
  const nn::Tensor& logits = net.pre_activation(fwd.tape, 0);
  const int d = logits.dim(1);

  nn::Tensor dlogits({n, d});
  nn::Tensor dvalue({n, 1});
  LossStats st;
  std::vector<double> lp(d);
  for (int i = 0; i < n; ++i) {
    const nn::Real* z = logits.data() + static_cast<std::size_t>(i) * d;
    double mx = z[0];
    for (int k = 1; k < d; ++k) mx = std::max(mx, double(z[k]));
    double sum = 0;
    for (int k = 0; k < d; ++k) sum += std::exp(z[k] - mx);
    const double lse = mx + std::log(sum);
    double h = 0;
    for (int k = 0; k < d; ++k) {
      lp[k] = z[k] - lse;
      h -= std::exp(lp[k]) * lp[k];
    }
    const int a = actions[i];
    if (a < 0 || a >= d) throw InvalidArgument("action index out of range");
    const double v = has_value ? double(fwd.outputs[1][i]) : 0.0;
    const double b = baseline ? baseline[i] : v;
    const double g = returns[i];
    const double adv = g - b;
    if (!std::isfinite(adv) || !std::isfinite(lp[a]))
      throw NonFiniteError("non-finite policy-gradient term (advantage " +
                           std::to_string(adv) + ", ln pi " + std::to_string(lp[a]) + ")");
    nn::Real* dz = dlogits.data() + static_cast<std::size_t>(i) * d;
    for (int k = 0; k < d; ++k) {
      const double p = std::exp(lp[k]);
      double gk = -adv * ((k == a ? 1.0 : 0.0) - p);
      gk += w.entropy_coef * p * (lp[k] + h);
      dz[k] = static_cast<nn::Real>(weight * gk);
    }
    if (has_value) dvalue[i] = static_cast<nn::Real>(weight * 2.0 * w.value_weight * (v - g));
    st.policy_loss += -adv * lp[a];
    st.value_loss += (g - v) * (g - v);
    st.entropy += h;
    st.advantage += adv;
    st.target += g;
  }
  st.samples = n;
  std::vector<nn::OutputGrad> og;
  og.push_back({0, std::move(dlogits), true});
  if (has_value && w.value_weight != 0.0) og.push_back({1, std::move(dvalue), false});
  net.backward(fwd.tape, og, grads);
  return st;
}

namespace {

json schedule_to_json(const env::PieceSchedule::State& s) {
  return {{"rng", s.rng}, {"order", s.order}, {"pos", s.pos}};
}

env::PieceSchedule::State schedule_from_json(const json& j) {
  return {j.at("rng").get<std::string>(), j.at("order").get<std::vector<std::size_t>>(),
          j.at("pos").get<std::size_t>()};
}

json pose_to_json(const env::AgentPose& p) {
  return {{"x_hat", p.x_hat}, {"v_pxl", p.v_pxl}, {"frame", p.frame}};
}

env::AgentPose pose_from_json(const json& j) {
  return {j.at("x_hat").get<double>(), j.at("v_pxl").get<double>(),
          j.at("frame").get<int>()};
}

json venv_to_json(const std::vector<env::VectorEnv::EnvState>& states) {
  json a = json::array();
  for (const auto& s : states) {
    a.push_back({{"piece", s.piece},
                 {"pose", pose_to_json(s.snapshot.pose)},
                 {"prev_pose", pose_to_json(s.snapshot.prev_pose)},
                 {"has_prev", s.snapshot.has_prev},
                 {"done", s.snapshot.done},
                 {"pending", s.pending},
                 {"schedule", schedule_to_json(s.schedule)}});
  }
  return a;
}

std::vector<env::VectorEnv::EnvState> venv_from_json(const json& a) {
  std::vector<env::VectorEnv::EnvState> out;
  for (const auto& j : a) {
    env::VectorEnv::EnvState s;
    s.piece = j.at("piece").get<std::size_t>();
    s.snapshot.pose = pose_from_json(j.at("pose"));
    s.snapshot.prev_pose = pose_from_json(j.at("prev_pose"));
    s.snapshot.has_prev = j.at("has_prev").get<bool>();
    s.snapshot.done = j.at("done").get<bool>();
    s.pending = j.at("pending").get<bool>();
    s.schedule = schedule_from_json(j.at("schedule"));
    out.push_back(std::move(s));
  }
  return out;
}

void sample_actions(const nn::Network& net, const nn::ForwardResult& fwd, Rng& rng,
                    std::vector<int>& actions) {
  const nn::Tensor& logits = net.pre_activation(fwd.tape, 0);
  const int n = fwd.tape.batch;
  actions.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto lp = model::log_softmax(logits.data() + static_cast<std::size_t>(i) *
                                                            env::kNumActions);
    model::Probs p;
    for (int k = 0; k < env::kNumActions; ++k) p[k] = std::exp(lp[k]);
    actions[i] = static_cast<int>(model::act_from_probs(p, &rng, model::ActMode::kSample).action);
  }
}

void apply_update(nn::Network& net, nn::Adam& adam, nn::Gradients& grads, double clip,
                  UpdateStats& st) {
  if (!grads.all_finite()) throw NonFiniteError("non-finite gradient in update");
  st.grad_norm = clip > 0 ? nn::clip_global_norm(grads, clip) : grads.global_norm();
  adam.step(net.params(), grads);
}

}  // namespace

// ---- A2C ----------------------------------------------------------------

void A2CConfig::validate() const {
  if (t_max < 1) throw InvalidArgument("t_max must be >= 1");
  if (n_actors < 1) throw InvalidArgument("n_actors must be >= 1");
  if (value_weight < 0 || entropy_coef < 0)
    throw InvalidArgument("loss weights must be >= 0");
}

A2CLearner::A2CLearner(synth::Corpus corpus, env::EnvConfig env_config,
                       A2CConfig config, std::uint64_t seed)
    : config_(config),
      env_config_(env_config),
      venv_((config.validate(), config.n_actors), std::move(corpus), env_config,
            derive_seed(seed, "envs")),
      action_rng_(make_stream(seed, "rollout")),
      dropout_rng_(make_stream(seed, "dropout")),
      running_reward_(config.n_actors, 0.0) {}

UpdateStats A2CLearner::update(nn::Network& net, nn::Adam& adam) {
  const int n = venv_.size();
  const int steps = config_.t_max;
  std::vector<nn::ForwardResult> fwds;
  fwds.reserve(steps);
  std::vector<std::vector<int>> actions(steps);
  std::vector<std::vector<double>> rewards(steps, std::vector<double>(n));
  std::vector<std::vector<bool>> dones(steps, std::vector<bool>(n));
  UpdateStats st;
  double finished_reward = 0;

  std::vector<const env::MdpState*> states(n);
  for (int t = 0; t < steps; ++t) {
    for (int i = 0; i < n; ++i) {
      if (venv_.pending_reset(i)) venv_.reset_env(i);
      states[i] = &venv_.state(i);
    }
    fwds.push_back(net.forward(model::make_inputs(states), nn::Mode::kTrain, &dropout_rng_));
    sample_actions(net, fwds.back(), action_rng_, actions[t]);
    std::vector<env::Action> acts(n);
    for (int i = 0; i < n; ++i) acts[i] = env::action_from_index(actions[t][i]);
    const auto results = venv_.step_all(acts);
    for (int i = 0; i < n; ++i) {
      rewards[t][i] = results[i].reward;
      dones[t][i] = results[i].done;
      running_reward_[i] += results[i].reward;
      if (results[i].done) {
        ++st.episodes;
        finished_reward += running_reward_[i];
        running_reward_[i] = 0.0;
      }
    }
    st.env_steps += n;
  }

  // V(S_{t_max}) for actors still inside an episode; terminal actors get 0
  // through the done flag in a2c_targets.
  std::vector<double> bootstrap(n, 0.0);
  for (int i = 0; i < n; ++i) states[i] = &venv_.state(i);
  {
    const auto fwd = net.forward(model::make_inputs(states), nn::Mode::kEval);
    for (int i = 0; i < n; ++i)
      if (!venv_.pending_reset(i)) bootstrap[i] = fwd.outputs[1][i];
  }
  last_targets_ = a2c_targets(rewards, dones, bootstrap, env_config_.gamma);

  nn::Gradients grads(net.params());
  const LossWeights w{config_.value_weight, config_.entropy_coef};
  const double weight = 1.0 / (static_cast<double>(steps) * n);
  for (int t = 0; t < steps; ++t)
    st.loss.add(accumulate_pg_grad(net, fwds[t], actions[t], last_targets_[t], nullptr, w,
                                   weight, grads));
  fwds.clear();
  apply_update(net, adam, grads, config_.grad_clip, st);
  if (st.episodes > 0) st.episode_reward = finished_reward / st.episodes;
  return st;
}

json A2CLearner::save_state() const {
  return {{"algo", algo()},
          {"envs", venv_to_json(venv_.save())},
          {"action_rng", action_rng_.state()},
          {"dropout_rng", dropout_rng_.state()},
          {"running_reward", running_reward_}};
}

void A2CLearner::load_state(const json& s) {
  if (s.at("algo").get<std::string>() != algo())
    throw InvalidArgument("learner state belongs to " + s.at("algo").get<std::string>());
  venv_.load(venv_from_json(s.at("envs")));
  action_rng_.set_state(s.at("action_rng").get<std::string>());
  dropout_rng_.set_state(s.at("dropout_rng").get<std::string>());
  running_reward_ = s.at("running_reward").get<std::vector<double>>();
}

// ---- REINFORCE with baseline ---------------------------------------------

void ReinforceConfig::validate() const {
  if (episodes_per_update < 1) throw InvalidArgument("episodes_per_update must be >= 1");
  if (value_weight < 0 || entropy_coef < 0)
    throw InvalidArgument("loss weights must be >= 0");
}

ReinforceLearner::ReinforceLearner(synth::Corpus corpus, env::EnvConfig env_config,
                                   ReinforceConfig config, std::uint64_t seed)
    : config_(config),
      env_config_(env_config),
      corpus_(std::move(corpus)),
      schedule_(corpus_.size(), derive_seed(seed, "schedule")),
      action_rng_(make_stream(seed, "rollout")),
      dropout_rng_(make_stream(seed, "dropout")) {
  config_.validate();
  for (const auto& b : corpus_) env::check_bundle(*b, env_config_);
}

UpdateStats ReinforceLearner::update(nn::Network& net, nn::Adam& adam) {
  const int m = config_.episodes_per_update;
  std::vector<env::ScoreEnv> envs(m, env::ScoreEnv(env_config_));
  for (auto& e : envs) e.reset(corpus_[schedule_.next()]);

  // One record per lockstep step. The update replays each forward with the
  // saved dropout stream, so the masks match the ones used while acting.
  struct StepRecord {
    std::vector<int> who;
    std::vector<env::MdpState> states;
    std::vector<int> actions;
    std::string dropout_state;
  };
  std::vector<StepRecord> steps;
  std::vector<std::vector<double>> rewards(m);
  std::vector<int> live;
  for (int i = 0; i < m; ++i)
    if (!envs[i].done()) live.push_back(i);
  UpdateStats st;
  while (!live.empty()) {
    StepRecord rec;
    rec.who = live;
    std::vector<const env::MdpState*> ptrs;
    for (int i : live) {
      rec.states.push_back(envs[i].state());
      ptrs.push_back(&envs[i].state());
    }
    rec.dropout_state = dropout_rng_.state();
    {
      const auto fwd = net.forward(model::make_inputs(ptrs), nn::Mode::kTrain, &dropout_rng_);
      sample_actions(net, fwd, action_rng_, rec.actions);
    }
    std::vector<int> still;
    for (std::size_t k = 0; k < live.size(); ++k) {
      const int i = live[k];
      const auto r = envs[i].step(env::action_from_index(rec.actions[k]));
      rewards[i].push_back(r.reward);
      if (!r.done) still.push_back(i);
    }
    st.env_steps += static_cast<long>(live.size());
    steps.push_back(std::move(rec));
    live.swap(still);
  }

  std::vector<std::vector<double>> returns(m);
  double total_reward = 0;
  for (int i = 0; i < m; ++i) {
    returns[i] = compute_returns(rewards[i], env_config_.gamma);
    for (double r : rewards[i]) total_reward += r;
  }
  st.episodes = m;
  st.episode_reward = total_reward / m;

  nn::Gradients grads(net.params());
  const LossWeights w{config_.value_weight, config_.entropy_coef};
  const double weight = st.env_steps > 0 ? 1.0 / static_cast<double>(st.env_steps) : 0.0;
  std::vector<int> cursor(m, 0);
  Rng replay;
  for (const auto& rec : steps) {
    std::vector<const env::MdpState*> ptrs;
    std::vector<double> g;
    for (std::size_t k = 0; k < rec.who.size(); ++k) {
      ptrs.push_back(&rec.states[k]);
      g.push_back(returns[rec.who[k]][cursor[rec.who[k]]++]);
    }
    replay.set_state(rec.dropout_state);
    auto fwd = net.forward(model::make_inputs(ptrs), nn::Mode::kTrain, &replay);
    st.loss.add(accumulate_pg_grad(net, fwd, rec.actions, g, nullptr, w, weight, grads));
  }
  if (st.env_steps > 0) apply_update(net, adam, grads, config_.grad_clip, st);
  return st;
}

json ReinforceLearner::save_state() const {
  return {{"algo", algo()},
          {"schedule", schedule_to_json(schedule_.save())},
          {"action_rng", action_rng_.state()},
          {"dropout_rng", dropout_rng_.state()}};
}

void ReinforceLearner::load_state(const json& s) {
  if (s.at("algo").get<std::string>() != algo())
    throw InvalidArgument("learner state belongs to " + s.at("algo").get<std::string>());
  schedule_.load(schedule_from_json(s.at("schedule")));
  action_rng_.set_state(s.at("action_rng").get<std::string>());
  dropout_rng_.set_state(s.at("dropout_rng").get<std::string>());
}

}  // namespace sfg::learn
