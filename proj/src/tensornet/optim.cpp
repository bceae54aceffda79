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

#include "sfg/tensornet/optim.hpp"

#include <cmath>

#include "sfg/core/error.hpp"

namespace sfg::nn {

Adam::Adam(AdamConfig config) : config_(config) {
  if (!(config.lr >= 0) || !(config.beta1 >= 0 && config.beta1 < 1) ||
      !(config.beta2 >= 0 && config.beta2 < 1) || !(config.eps > 0))
    throw InvalidArgument("invalid Adam configuration");
}

void Adam::step(ParamStore& params, const Gradients& grads) {
  if (grads.size() != params.size())
    throw ShapeError("gradient count does not match parameter count");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].shape() != params.value(i).shape())
      throw ShapeError("gradient shape mismatch for " + params.name(i));
    if (!grads[i].all_finite())
      throw NonFiniteError("non-finite gradient for " + params.name(i) + " at step " +
                           std::to_string(step_ + 1));
  }
  if (m_.empty()) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_.emplace_back(params.value(i).shape());
      v_.emplace_back(params.value(i).shape());
    }
  } else if (m_.size() != params.size()) {
    throw ShapeError("optimizer state does not match the parameter store");
  }
  ++step_;
  const double t = static_cast<double>(step_);
  const double c1 = 1.0 - std::pow(config_.beta1, t);
  const double c2 = 1.0 - std::pow(config_.beta2, t);
  const double b1 = config_.beta1, b2 = config_.beta2;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Real* p = params.value(i).data();
    Real* m = m_[i].data();
    Real* v = v_[i].data();
    const Real* g = grads[i].data();
    for (std::size_t k = 0; k < params.value(i).size(); ++k) {
      const double gk = g[k];
      const double mk = b1 * m[k] + (1.0 - b1) * gk;
      const double vk = b2 * v[k] + (1.0 - b2) * gk * gk;
      m[k] = static_cast<Real>(mk);
      v[k] = static_cast<Real>(vk);
      p[k] -= static_cast<Real>(config_.lr * (mk / c1) /
                                (std::sqrt(vk / c2) + config_.eps));
    }
  }
}

void Adam::restore(AdamConfig config, std::int64_t step, std::vector<Tensor> m,
                   std::vector<Tensor> v) {
  if (step < 0 || m.size() != v.size()) throw InvalidArgument("invalid Adam state");
  config_ = config;
  step_ = step;
  m_ = std::move(m);
  v_ = std::move(v);
}

}  // namespace sfg::nn
