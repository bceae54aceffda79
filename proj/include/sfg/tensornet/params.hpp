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

#ifndef SFG_TENSORNET_PARAMS_HPP_
#define SFG_TENSORNET_PARAMS_HPP_

#include <string>
#include <vector>

#include "sfg/tensornet/tensor.hpp"

namespace sfg::nn {

// Named parameter tensors in insertion order (the iteration order used by
// optimizers and checkpoints).
class ParamStore {
 public:
  int add(std::string name, Tensor value);

  std::size_t size() const { return values_.size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  Tensor& value(std::size_t i) { return values_.at(i); }
  const Tensor& value(std::size_t i) const { return values_.at(i); }
  // -1 when absent.
  int find(const std::string& name) const;
  std::size_t parameter_count() const;

  bool operator==(const ParamStore&) const = default;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
};

// One gradient tensor per parameter, same order and shapes.
class Gradients {
 public:
  Gradients() = default;
  explicit Gradients(const ParamStore& params);

  std::size_t size() const { return grads_.size(); }
  Tensor& operator[](std::size_t i) { return grads_[i]; }
  const Tensor& operator[](std::size_t i) const { return grads_[i]; }

  void zero();
  void add(const Gradients& other);
  void scale(Real factor);
  double global_norm() const;
  bool all_finite() const;

 private:
  std::vector<Tensor> grads_;
};

// Rescales grads so their global L2 norm is at most max_norm. Returns the
// norm before clipping.
double clip_global_norm(Gradients& grads, double max_norm);

}  // namespace sfg::nn

#endif  // SFG_TENSORNET_PARAMS_HPP_
