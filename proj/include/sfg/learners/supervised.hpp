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

#ifndef SFG_LEARNERS_SUPERVISED_HPP_
#define SFG_LEARNERS_SUPERVISED_HPP_

#include <cstdint>
#include <functional>
#include <vector>

#include "sfg/scoreenv/env.hpp"
#include "sfg/synthgen/piece.hpp"
#include "sfg/tensornet/graph.hpp"
#include "sfg/tensornet/optim.hpp"

namespace sfg::learn {

// Fraction of optimal tempo changes with |a*| < 1e-6 over a corpus.
double tempo_sparsity(const synth::Corpus& corpus);

// All |a*| values of a corpus, pooled.
std::vector<double> abs_tempo_changes(const synth::Corpus& corpus);

struct SupervisedConfig {
  int epochs = 10;
  int batch_size = 16;
  std::uint64_t seed = 0;
};

struct SupervisedReport {
  std::vector<double> train_mse;  // eval-mode MSE over all frames after each epoch
  double sparsity = 0.0;
  double mean_abs_prediction = 0.0;  // eval mode, after the last epoch
  double p95_abs_target = 0.0;
  long frames = 0;
};

// Regresses a*(t) from the Markov state observed on the ground-truth path
// (x_hat = x[t], v = v*(t-1)). `net` must have a single scalar output.
SupervisedReport train_supervised_regressor(
    nn::Network& net, const synth::Corpus& corpus, const env::EnvConfig& config,
    nn::Adam& adam, const SupervisedConfig& sc,
    const std::function<void(int epoch, double mse)>& on_epoch = {});

}  // namespace sfg::learn

#endif  // SFG_LEARNERS_SUPERVISED_HPP_
