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

#ifndef SFG_TENSORNET_KERNELS_HPP_
#define SFG_TENSORNET_KERNELS_HPP_

// Dense linear-algebra kernels behind the layers. Matrix products go through
// Eigen; everything here is single-threaded and deterministic.

#include <Eigen/Core>

#include "sfg/tensornet/tensor.hpp"

namespace sfg::nn::kernels {

using MatRM = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<MatRM>;
using CMapRM = Eigen::Map<const MatRM>;

struct ConvGeom {
  int cin, h, w;
  int k, sy, sx;
  int cout, ho, wo;
  int pad_top, pad_left;

  int patch() const { return cin * k * k; }
  int pixels() const { return ho * wo; }
  // 1x1, stride 1: the input already is the column matrix.
  bool trivial() const { return k == 1 && sy == 1 && sx == 1; }
};

ConvGeom conv_geometry(int cin, int h, int w, int k, int sy, int sx, int cout);

// cols: patch() x pixels(), row index (ci * k + ky) * k + kx.
void im2col(const Real* x, const ConvGeom& g, Real* cols);
// Adds the column gradients back onto dx (cin x h x w).
void col2im_add(const Real* cols, const ConvGeom& g, Real* dx);

// y: {N, cout, ho, wo}
void conv_forward(const Tensor& x, const Tensor& weight, const Tensor& bias,
                  const ConvGeom& g, Tensor& y);
// Accumulates into dweight/dbias; fills dx when non-null.
void conv_backward(const Tensor& x, const Tensor& weight, const Tensor& dy,
                   const ConvGeom& g, Tensor& dweight, Tensor& dbias, Tensor* dx);

// x: {N, D}, weight: {U, D}, y: {N, U}
void dense_forward(const Tensor& x, const Tensor& weight, const Tensor& bias,
                   Tensor& y);
void dense_backward(const Tensor& x, const Tensor& weight, const Tensor& dy,
                    Tensor& dweight, Tensor& dbias, Tensor* dx);

}  // namespace sfg::nn::kernels

#endif  // SFG_TENSORNET_KERNELS_HPP_
