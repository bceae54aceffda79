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

#include "sfg/learners/trainer.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include "sfg/core/error.hpp"

namespace sfg::learn {

using nlohmann::json;

void ScheduleConfig::validate() const {
  if (updates_per_epoch < 1) throw InvalidArgument("updates_per_epoch must be >= 1");
  if (patience < 1) throw InvalidArgument("patience must be >= 1");
  if (max_lr_drops < 0) throw InvalidArgument("max_lr_drops must be >= 0");
  if (!(lr_drop_factor > 1.0)) throw InvalidArgument("lr_drop_factor must be > 1");
  if (max_epochs < 0) throw InvalidArgument("max_epochs must be >= 0");
}

std::unique_ptr<eval::EvalPolicy> greedy_network_policy(const nn::Network& net) {
  return std::make_unique<eval::NetworkPolicy>(net, model::ActMode::kGreedy);
}

json train_state_to_json(const TrainState& s) {
  return {{"update", s.update},         {"epoch", s.epoch},
          {"lr_drops", s.lr_drops},     {"stale_epochs", s.stale_epochs},
          {"best_r_on", s.best_r_on},   {"best_epoch", s.best_epoch},
          {"finished", s.finished},     {"lr_trace", s.lr_trace},
          {"val_r_on", s.val_r_on}};
}

TrainState train_state_from_json(const json& j) {
  TrainState s;
  s.update = j.at("update").get<long>();
  s.epoch = j.at("epoch").get<int>();
  s.lr_drops = j.at("lr_drops").get<int>();
  s.stale_epochs = j.at("stale_epochs").get<int>();
  s.best_r_on = j.at("best_r_on").get<double>();
  s.best_epoch = j.at("best_epoch").get<int>();
  s.finished = j.at("finished").get<bool>();
  s.lr_trace = j.at("lr_trace").get<std::vector<double>>();
  s.val_r_on = j.at("val_r_on").get<std::vector<double>>();
  return s;
}

nn::Checkpoint make_checkpoint(const nn::Network& net, const nn::Adam& adam,
                               const json& meta) {
  nn::Checkpoint c;
  c.meta = meta;
  c.meta["graph"] = net.spec();
  const auto& cfg = adam.config();
  c.meta["adam"] = {{"lr", cfg.lr},
                    {"beta1", cfg.beta1},
                    {"beta2", cfg.beta2},
                    {"eps", cfg.eps},
                    {"step", adam.step_count()}};
  const auto& p = net.params();
  for (std::size_t i = 0; i < p.size(); ++i) c.tensors.emplace_back("param/" + p.name(i), p.value(i));
  const auto& m = adam.first_moments();
  const auto& v = adam.second_moments();
  for (std::size_t i = 0; i < m.size(); ++i) {
    c.tensors.emplace_back("adam_m/" + p.name(i), m[i]);
    c.tensors.emplace_back("adam_v/" + p.name(i), v[i]);
  }
  return c;
}

nn::Network network_from_checkpoint(const nn::Checkpoint& ckpt) {
  if (!ckpt.meta.contains("graph")) throw IoError("checkpoint has no architecture");
  nn::GraphSpec spec;
  try {
    spec = ckpt.meta.at("graph").get<nn::GraphSpec>();
  } catch (const json::exception& e) {
    throw IoError(std::string("bad architecture in checkpoint: ") + e.what());
  }
  nn::Network fresh(spec, 0);
  nn::ParamStore params;
  for (std::size_t i = 0; i < fresh.params().size(); ++i) {
    const std::string& name = fresh.params().name(i);
    if (!ckpt.has_tensor("param/" + name))
      throw IoError("checkpoint lacks parameter " + name);
    params.add(name, ckpt.tensor("param/" + name));
  }
  return nn::Network(spec, std::move(params));
}

void adam_from_checkpoint(const nn::Checkpoint& ckpt, const nn::Network& net,
                          nn::Adam& adam) {
  const json& a = ckpt.meta.at("adam");
  nn::AdamConfig cfg{a.at("lr").get<double>(), a.at("beta1").get<double>(),
                     a.at("beta2").get<double>(), a.at("eps").get<double>()};
  std::vector<nn::Tensor> m, v;
  const auto& p = net.params();
  if (ckpt.has_tensor("adam_m/" + p.name(0))) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      m.push_back(ckpt.tensor("adam_m/" + p.name(i)));
      v.push_back(ckpt.tensor("adam_v/" + p.name(i)));
    }
  }
  adam.restore(cfg, a.at("step").get<std::int64_t>(), std::move(m), std::move(v));
}

Trainer::Trainer(ScheduleConfig schedule, nn::Network& net, nn::Adam& adam,
                 Learner& learner, synth::Corpus validation, env::EnvConfig env_config,
                 std::string out_dir, PolicyFactory policy)
    : schedule_(schedule),
      net_(net),
      adam_(adam),
      learner_(learner),
      validation_(std::move(validation)),
      env_config_(env_config),
      out_dir_(std::move(out_dir)),
      policy_(std::move(policy)) {
  schedule_.validate();
  if (validation_.empty()) throw InvalidArgument("empty validation split");
  state_.lr_trace.push_back(adam_.lr());
  if (!out_dir_.empty()) std::filesystem::create_directories(out_dir_);
}

nn::Checkpoint Trainer::snapshot() const {
  json meta = extra_meta_;
  meta["trainer"] = train_state_to_json(state_);
  meta["learner"] = learner_.save_state();
  return make_checkpoint(net_, adam_, meta);
}

void Trainer::restore(const nn::Checkpoint& ckpt) {
  nn::Network loaded = network_from_checkpoint(ckpt);
  if (!(loaded.spec() == net_.spec()))
    throw InvalidArgument("checkpoint architecture differs from the configured model");
  net_.params() = loaded.params();
  adam_from_checkpoint(ckpt, net_, adam_);
  learner_.load_state(ckpt.meta.at("learner"));
  state_ = train_state_from_json(ckpt.meta.at("trainer"));
}

EpochRecord Trainer::run_epoch() {
  if (done()) throw StateError("training already finished");
  const auto t0 = std::chrono::steady_clock::now();
  double reward_sum = 0;
  long episodes = 0;
  long env_steps = 0;
  for (int u = 0; u < schedule_.updates_per_epoch; ++u) {
    const UpdateStats st = learner_.update(net_, adam_);
    reward_sum += st.episode_reward * st.episodes;
    episodes += st.episodes;
    env_steps += st.env_steps;
    ++state_.update;
  }
  ++state_.epoch;

  auto policy = policy_(net_);
  const eval::EvalReport rep =
      eval::evaluate_run(*policy, validation_, env_config_, derive_seed(0, "validation"));
  state_.val_r_on.push_back(rep.r_on);

  EpochRecord rec;
  rec.update = state_.update;
  rec.epoch = state_.epoch;
  rec.lr = adam_.lr();
  rec.mean_return = episodes > 0 ? reward_sum / episodes : 0.0;
  rec.episodes = episodes;
  rec.env_steps = env_steps;
  rec.val_r_on = rep.r_on;
  rec.val_r_tue = rep.r_tue;

  const bool improved = rep.r_on > state_.best_r_on;
  if (improved) {
    state_.best_r_on = rep.r_on;
    state_.best_epoch = state_.epoch;
    state_.stale_epochs = 0;
  } else if (++state_.stale_epochs >= schedule_.patience) {
    state_.stale_epochs = 0;
    if (state_.lr_drops < schedule_.max_lr_drops) {
      ++state_.lr_drops;
      adam_.set_lr(adam_.lr() / schedule_.lr_drop_factor);
      state_.lr_trace.push_back(adam_.lr());
    } else {
      state_.finished = true;
    }
  }
  if (!out_dir_.empty()) {
    const std::filesystem::path dir(out_dir_);
    const nn::Checkpoint ckpt = snapshot();
    if (improved) nn::save_checkpoint((dir / "best.ckpt").string(), ckpt);
    nn::save_checkpoint((dir / "last.ckpt").string(), ckpt);
  }
  rec.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  if (!out_dir_.empty()) {
    std::ofstream log(std::filesystem::path(out_dir_) / "metrics.ndjson", std::ios::app);
    if (!log) throw IoError("cannot append to metrics.ndjson in " + out_dir_);
    log << json{{"update", rec.update},     {"epoch", rec.epoch},
                {"lr", rec.lr},             {"mean_return", rec.mean_return},
                {"episodes", rec.episodes}, {"env_steps", rec.env_steps},
                {"val_R_on", rec.val_r_on}, {"val_R_tue", rec.val_r_tue},
                {"algo", learner_.algo()},  {"wall_ms", rec.wall_ms}}
               .dump()
        << "\n";
  }
  return rec;
}

bool Trainer::done() const {
  return state_.finished ||
         (schedule_.max_epochs > 0 && state_.epoch >= schedule_.max_epochs);
}

const TrainState& Trainer::run(const std::function<void(const EpochRecord&)>& on_epoch) {
  while (!done()) {
    const EpochRecord rec = run_epoch();
    if (on_epoch) on_epoch(rec);
  }
  return state_;
}

}  // namespace sfg::learn
