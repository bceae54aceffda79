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

#ifndef SFG_TENSORNET_OPTIM_HPP_
#define SFG_TENSORNET_OPTIM_HPP_

#include <cstdint>
#include <vector>

#include "sfg/tensornet/params.hpp"
#include "sfg/tensornet/tensor.hpp"

namespace sfg::nn {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam. Moment tensors are created on the first step.
class Adam {
 public:
  Adam() = default;
  explicit Adam(AdamConfig config);

  const AdamConfig& config() const { return config_; }
  double lr() const { return config_.lr; }
  void set_lr(double lr) { config_.lr = lr; }
  std::int64_t step_count() const { return step_; }

  // Throws NonFiniteError (leaving params untouched) if any gradient is not
  // finite.
  void step(ParamStore& params, const Gradients& grads);

  const std::vector<Tensor>& first_moments() const { return m_; }
  const std::vector<Tensor>& second_moments() const { return v_; }
  void restore(AdamConfig config, std::int64_t step, std::vector<Tensor> m,
               std::vector<Tensor> v);

 private:
  AdamConfig config_;
  std::int64_t step_ = 0;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

}  // namespace sfg::nn

#endif  // SFG_TENSORNET_OPTIM_HPP_
