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

#include "sfg/learners/supervised.hpp"

#include <algorithm>
#include <cmath>

#include "sfg/core/error.hpp"
#include "sfg/core/rng.hpp"
#include "sfg/learners/returns.hpp"
#include "sfg/policymodel/model.hpp"

namespace sfg::learn {

namespace {

struct Sample {
  std::size_t piece;
  int frame;
  double target;
};

std::vector<Sample> collect(const synth::Corpus& corpus) {
  std::vector<Sample> out;
  for (std::size_t p = 0; p < corpus.size(); ++p) {
    const TempoTarget tt = derive_tempo_targets(corpus[p]->alignment);
    for (std::size_t t = 0; t < tt.a_star.size(); ++t)
      out.push_back({p, static_cast<int>(t), tt.a_star[t]});
  }
  return out;
}

env::MdpState state_on_path(const synth::PieceBundle& b, int t,
                            const env::EnvConfig& config) {
  const auto& x = b.alignment.x;
  env::AgentPose pose{x[t], t > 0 ? x[t] - x[t - 1] : 0.0, t};
  if (t == 0) return env::observe(pose, b, config);
  const env::AgentPose prev{x[t - 1], t > 1 ? x[t - 1] - x[t - 2] : 0.0, t - 1};
  const env::MdpState before = env::observe(prev, b, config);
  return env::observe(pose, b, config, &before);
}

nn::ForwardResult forward_batch(const nn::Network& net, const synth::Corpus& corpus,
                                std::span<const Sample> batch,
                                const env::EnvConfig& config, nn::Mode mode, Rng* rng) {
  std::vector<env::MdpState> states;
  states.reserve(batch.size());
  for (const auto& s : batch) states.push_back(state_on_path(*corpus[s.piece], s.frame, config));
  std::vector<const env::MdpState*> ptrs;
  for (const auto& s : states) ptrs.push_back(&s);
  return net.forward(model::make_inputs(ptrs), mode, rng);
}

}  // namespace

std::vector<double> abs_tempo_changes(const synth::Corpus& corpus) {
  std::vector<double> out;
  for (const auto& b : corpus)
    for (double a : derive_tempo_targets(b->alignment).a_star) out.push_back(std::abs(a));
  return out;
}

double tempo_sparsity(const synth::Corpus& corpus) {
  const auto a = abs_tempo_changes(corpus);
  if (a.empty()) return 0.0;
  const auto zero = std::count_if(a.begin(), a.end(), [](double v) { return v < 1e-6; });
  return static_cast<double>(zero) / a.size();
}

SupervisedReport train_supervised_regressor(
    nn::Network& net, const synth::Corpus& corpus, const env::EnvConfig& config,
    nn::Adam& adam, const SupervisedConfig& sc,
    const std::function<void(int, double)>& on_epoch) {
  if (net.num_outputs() != 1 || net.output_shape(0) != nn::Shape{1})
    throw InvalidArgument("the tempo regressor needs exactly one scalar output");
  if (sc.epochs < 1 || sc.batch_size < 1)
    throw InvalidArgument("epochs and batch_size must be >= 1");
  std::vector<Sample> samples = collect(corpus);
  if (samples.empty()) throw InvalidArgument("corpus has no frames with a tempo target");

  SupervisedReport rep;
  rep.frames = static_cast<long>(samples.size());
  rep.sparsity = tempo_sparsity(corpus);
  std::vector<double> abs_t = abs_tempo_changes(corpus);
  std::sort(abs_t.begin(), abs_t.end());
  rep.p95_abs_target = abs_t[static_cast<std::size_t>(0.95 * (abs_t.size() - 1))];

  Rng order_rng = make_stream(sc.seed, "supervised-order");
  Rng dropout_rng = make_stream(sc.seed, "dropout");
  std::vector<std::size_t> order(samples.size());
  const std::size_t bs = static_cast<std::size_t>(sc.batch_size);
  for (int epoch = 1; epoch <= sc.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[order_rng.uniform_int(i)]);
    std::vector<Sample> batch;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      batch.clear();
      for (std::size_t k = start; k < std::min(order.size(), start + bs); ++k)
        batch.push_back(samples[order[k]]);
      auto fwd = forward_batch(net, corpus, batch, config, nn::Mode::kTrain, &dropout_rng);
      const int n = static_cast<int>(batch.size());
      nn::Tensor g({n, 1});
      for (int i = 0; i < n; ++i)
        g[i] = static_cast<nn::Real>(2.0 * (fwd.outputs[0][i] - batch[i].target) / n);
      nn::OutputGrad og{0, std::move(g), false};
      nn::Gradients grads = net.backward(fwd.tape, std::span<const nn::OutputGrad>(&og, 1));
      adam.step(net.params(), grads);
    }

    double sq = 0, abs_pred = 0;
    for (std::size_t start = 0; start < samples.size(); start += 64) {
      const std::size_t end = std::min(samples.size(), start + 64);
      const std::span<const Sample> chunk(samples.data() + start, end - start);
      const auto fwd = forward_batch(net, corpus, chunk, config, nn::Mode::kEval, nullptr);
      for (std::size_t i = 0; i < chunk.size(); ++i) {
        const double y = fwd.outputs[0][i];
        sq += (y - chunk[i].target) * (y - chunk[i].target);
        abs_pred += std::abs(y);
      }
    }
    const double mse = sq / samples.size();
    if (!std::isfinite(mse)) throw NonFiniteError("supervised loss became non-finite");
    rep.train_mse.push_back(mse);
    rep.mean_abs_prediction = abs_pred / samples.size();
    if (on_epoch) on_epoch(epoch, mse);
  }
  return rep;
}

}  // namespace sfg::learn
