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

// sfg: corpus synthesis, training, evaluation and rollout export.

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sfg/core/error.hpp"
#include "sfg/followcli/commands.hpp"
#include "sfg/followcli/run_config.hpp"

namespace {

using nlohmann::json;

// Config-file settings plus command-line overrides, merged before parsing so
// that validation sees the final values.
struct ConfigArgs {
  std::string file;
  std::vector<std::string> sets;  // key.path=value
  std::map<std::string, json> flags;

  void add_to(CLI::App* app) {
    app->add_option("-c,--config", file, "JSON run configuration");
    app->add_option("--set", sets, "override a config key, e.g. --set a2c.t_max=20")
        ->take_all();
  }

  sfg::cli::RunConfig resolve() const {
    json j = json::object();
    if (!file.empty()) j = sfg::cli::to_json(sfg::cli::load_run_config(file));
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0)
        throw sfg::UsageError("--set expects key.path=value, got '" + s + "'");
      json value;
      try {
        value = json::parse(s.substr(eq + 1));
      } catch (const json::exception&) {
        value = s.substr(eq + 1);
      }
      put(j, s.substr(0, eq), value);
    }
    for (const auto& [key, value] : flags) put(j, key, value);
    return sfg::cli::run_config_from_json(j);
  }

  static void put(json& j, const std::string& path, const json& value) {
    json* node = &j;
    std::size_t start = 0;
    for (;;) {
      const auto dot = path.find('.', start);
      const std::string key = path.substr(start, dot - start);
      if (dot == std::string::npos) {
        (*node)[key] = value;
        return;
      }
      if (!node->contains(key)) (*node)[key] = json::object();
      node = &(*node)[key];
      start = dot + 1;
    }
  }
};

// Registers an optional flag that overrides `key` when given.
template <class T>
void override_flag(CLI::App* app, ConfigArgs& cfg, const std::string& flag,
                   const std::string& key, const std::string& help) {
  app->add_option_function<T>(
      flag, [&cfg, key](const T& v) { cfg.flags[key] = v; }, help);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Score following with reinforcement learning on synthetic corpora"};
  app.require_subcommand(1);

  ConfigArgs synth_cfg;
  std::string synth_out;
  bool synth_force = false;
  auto* synth = app.add_subcommand("synth-data", "generate a synthetic corpus");
  synth_cfg.add_to(synth);
  synth->add_option("-o,--out", synth_out, "corpus directory")->required();
  synth->add_flag("--force", synth_force, "overwrite a non-empty directory");
  override_flag<std::string>(synth, synth_cfg, "--preset", "corpus.preset", "mono|poly");
  override_flag<int>(synth, synth_cfg, "--pieces", "corpus.pieces", "number of pieces");
  override_flag<std::uint64_t>(synth, synth_cfg, "--seed", "seed", "base seed");

  ConfigArgs train_cfg;
  sfg::cli::TrainOptions train_opts;
  bool print_config = false;
  auto* train = app.add_subcommand("train", "train a policy (A2C or REINFORCE_bl)");
  train_cfg.add_to(train);
  override_flag<std::string>(train, train_cfg, "--corpus", "paths.corpus",
                             "corpus directory");
  override_flag<std::string>(train, train_cfg, "-o,--out", "paths.out", "run directory");
  override_flag<std::string>(train, train_cfg, "--algo", "algo", "a2c|reinforce_bl");
  override_flag<std::string>(train, train_cfg, "--preset", "model", "desk|paper");
  override_flag<std::string>(train, train_cfg, "--env", "env_preset", "mono|poly");
  override_flag<std::uint64_t>(train, train_cfg, "--seed", "seed", "base seed");
  override_flag<double>(train, train_cfg, "--lr", "adam.lr", "initial learning rate");
  override_flag<int>(train, train_cfg, "--max-epochs", "schedule.max_epochs",
                     "stop after this many epochs (0: schedule only)");
  override_flag<int>(train, train_cfg, "--updates-per-epoch",
                     "schedule.updates_per_epoch", "updates between validations");
  train->add_flag("--resume", train_opts.resume, "continue from last.ckpt");
  train->add_flag("--force", train_opts.force, "discard an existing run");
  train->add_flag("--print-config", print_config,
                  "print the resolved configuration and exit");

  sfg::cli::EvalOptions eval_opts;
  auto* evaluate = app.add_subcommand("evaluate", "evaluate a checkpoint");
  evaluate->add_option("checkpoint", eval_opts.checkpoint)->required();
  evaluate->add_option("--corpus", eval_opts.corpus,
                       "corpus directory (default: the training corpus)");
  evaluate->add_option("--split", eval_opts.split, "train|validation|test|all")
      ->capture_default_str();
  evaluate->add_option("--runs", eval_opts.runs, "evaluation runs")->capture_default_str();
  evaluate->add_option("--seed", eval_opts.seed)->capture_default_str();
  evaluate->add_option("-o,--out", eval_opts.out_dir, "report directory")->required();
  evaluate->add_flag("--sample", eval_opts.sample, "sample actions instead of argmax");

  sfg::cli::RolloutOptions roll_opts;
  auto* rollout = app.add_subcommand("rollout", "export one trajectory as CSV");
  rollout->add_option("checkpoint", roll_opts.checkpoint)->required();
  rollout->add_option("--corpus", roll_opts.corpus,
                      "corpus directory (default: the training corpus)");
  rollout->add_option("--piece", roll_opts.piece, "piece id")->required();
  rollout->add_option("-o,--out", roll_opts.out_csv, "CSV file")->required();
  rollout->add_option("--seed", roll_opts.seed)->capture_default_str();
  rollout->add_flag("--sample", roll_opts.sample, "sample actions instead of argmax");

  std::string inspect_path;
  auto* inspect = app.add_subcommand("inspect-ckpt", "summarize a checkpoint");
  inspect->add_option("checkpoint", inspect_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*synth) {
      sfg::cli::cmd_synth(synth_cfg.resolve(), synth_out, synth_force, std::cout);
    } else if (*train) {
      const sfg::cli::RunConfig config = train_cfg.resolve();
      if (print_config) {
        std::cout << sfg::cli::to_json(config).dump(2) << "\n";
        return 0;
      }
      sfg::cli::cmd_train(config, train_opts, std::cout);
    } else if (*evaluate) {
      sfg::cli::cmd_eval(eval_opts, std::cout);
    } else if (*rollout) {
      sfg::cli::cmd_rollout(roll_opts, std::cout);
    } else if (*inspect) {
      sfg::cli::cmd_inspect(inspect_path, std::cout);
    }
  } catch (const sfg::UsageError& e) {
    std::cerr << "sfg: " << e.what() << "\n";
    return 2;
  } catch (const sfg::IoError& e) {
    std::cerr << "sfg: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "sfg: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
