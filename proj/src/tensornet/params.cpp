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

#include "sfg/tensornet/params.hpp"

#include <cmath>

#include "sfg/core/error.hpp"

namespace sfg::nn {

int ParamStore::add(std::string name, Tensor value) {
  if (find(name) >= 0) throw InvalidArgument("duplicate parameter name " + name);
  names_.push_back(std::move(name));
  values_.push_back(std::move(value));
  return static_cast<int>(values_.size()) - 1;
}

int ParamStore::find(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return static_cast<int>(i);
  return -1;
}

std::size_t ParamStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += v.size();
  return n;
}

Gradients::Gradients(const ParamStore& params) {
  grads_.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i)
    grads_.emplace_back(params.value(i).shape());
}

void Gradients::zero() {
  for (auto& g : grads_) g.fill(Real(0));
}

void Gradients::add(const Gradients& other) {
  if (other.size() != size()) throw ShapeError("gradient sets differ in size");
  for (std::size_t i = 0; i < grads_.size(); ++i) {
    if (grads_[i].size() != other[i].size())
      throw ShapeError("gradient shapes differ");
    Real* dst = grads_[i].data();
    const Real* src = other[i].data();
    for (std::size_t k = 0; k < grads_[i].size(); ++k) dst[k] += src[k];
  }
}

void Gradients::scale(Real factor) {
  for (auto& g : grads_)
    for (auto& v : g.values()) v *= factor;
}

double Gradients::global_norm() const {
  double sq = 0.0;
  for (const auto& g : grads_)
    for (Real v : g.values()) sq += static_cast<double>(v) * v;
  return std::sqrt(sq);
}

bool Gradients::all_finite() const {
  for (const auto& g : grads_)
    if (!g.all_finite()) return false;
  return true;
}

double clip_global_norm(Gradients& grads, double max_norm) {
  const double norm = grads.global_norm();
  if (max_norm > 0.0 && norm > max_norm)
    grads.scale(static_cast<Real>(max_norm / norm));
  return norm;
}

}  // namespace sfg::nn
