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

#include "kernels.hpp"

#include <algorithm>
#include <vector>

namespace sfg::nn::kernels {

ConvGeom conv_geometry(int cin, int h, int w, int k, int sy, int sx, int cout) {
  ConvGeom g{};
  g.cin = cin;
  g.h = h;
  g.w = w;
  g.k = k;
  g.sy = sy;
  g.sx = sx;
  g.cout = cout;
  g.ho = (h + sy - 1) / sy;
  g.wo = (w + sx - 1) / sx;
  const int pad_h = std::max((g.ho - 1) * sy + k - h, 0);
  const int pad_w = std::max((g.wo - 1) * sx + k - w, 0);
  g.pad_top = pad_h / 2;
  g.pad_left = pad_w / 2;
  return g;
}

void im2col(const Real* x, const ConvGeom& g, Real* cols) {
  const int P = g.pixels();
  for (int ci = 0; ci < g.cin; ++ci) {
    const Real* plane = x + static_cast<std::size_t>(ci) * g.h * g.w;
    for (int ky = 0; ky < g.k; ++ky) {
      for (int kx = 0; kx < g.k; ++kx) {
        Real* dst = cols + static_cast<std::size_t>((ci * g.k + ky) * g.k + kx) * P;
        for (int oy = 0; oy < g.ho; ++oy) {
          const int iy = oy * g.sy - g.pad_top + ky;
          Real* drow = dst + static_cast<std::size_t>(oy) * g.wo;
          if (iy < 0 || iy >= g.h) {
            std::fill(drow, drow + g.wo, Real(0));
            continue;
          }
          const Real* srow = plane + static_cast<std::size_t>(iy) * g.w;
          for (int ox = 0; ox < g.wo; ++ox) {
            const int ix = ox * g.sx - g.pad_left + kx;
            drow[ox] = (ix >= 0 && ix < g.w) ? srow[ix] : Real(0);
          }
        }
      }
    }
  }
}

void col2im_add(const Real* cols, const ConvGeom& g, Real* dx) {
  const int P = g.pixels();
  for (int ci = 0; ci < g.cin; ++ci) {
    Real* plane = dx + static_cast<std::size_t>(ci) * g.h * g.w;
    for (int ky = 0; ky < g.k; ++ky) {
      for (int kx = 0; kx < g.k; ++kx) {
        const Real* src =
            cols + static_cast<std::size_t>((ci * g.k + ky) * g.k + kx) * P;
        for (int oy = 0; oy < g.ho; ++oy) {
          const int iy = oy * g.sy - g.pad_top + ky;
          if (iy < 0 || iy >= g.h) continue;
          const Real* srow = src + static_cast<std::size_t>(oy) * g.wo;
          Real* drow = plane + static_cast<std::size_t>(iy) * g.w;
          for (int ox = 0; ox < g.wo; ++ox) {
            const int ix = ox * g.sx - g.pad_left + kx;
            if (ix >= 0 && ix < g.w) drow[ix] += srow[ox];
          }
        }
      }
    }
  }
}

void conv_forward(const Tensor& x, const Tensor& weight, const Tensor& bias,
                  const ConvGeom& g, Tensor& y) {
  const int n = x.dim(0);
  const int K = g.patch();
  const int P = g.pixels();
  y = Tensor({n, g.cout, g.ho, g.wo});
  CMapRM W(weight.data(), g.cout, K);
  Eigen::Map<const Eigen::Matrix<Real, Eigen::Dynamic, 1>> b(bias.data(), g.cout);
  RealVector cols(g.trivial() ? 0 : static_cast<std::size_t>(K) * P);
  const std::size_t in_stride = static_cast<std::size_t>(g.cin) * g.h * g.w;
  const std::size_t out_stride = static_cast<std::size_t>(g.cout) * P;
  for (int i = 0; i < n; ++i) {
    const Real* xi = x.data() + i * in_stride;
    const Real* colp = xi;
    if (!g.trivial()) {
      im2col(xi, g, cols.data());
      colp = cols.data();
    }
    MapRM Y(y.data() + i * out_stride, g.cout, P);
    Y.noalias() = W * CMapRM(colp, K, P);
    Y.colwise() += b;
  }
}

void conv_backward(const Tensor& x, const Tensor& weight, const Tensor& dy,
                   const ConvGeom& g, Tensor& dweight, Tensor& dbias, Tensor* dx) {
  const int n = x.dim(0);
  const int K = g.patch();
  const int P = g.pixels();
  CMapRM W(weight.data(), g.cout, K);
  MapRM dW(dweight.data(), g.cout, K);
  Eigen::Map<Eigen::Matrix<Real, Eigen::Dynamic, 1>> db(dbias.data(), g.cout);
  RealVector cols(g.trivial() ? 0 : static_cast<std::size_t>(K) * P);
  RealVector dcols(dx && !g.trivial() ? static_cast<std::size_t>(K) * P : 0);
  const std::size_t in_stride = static_cast<std::size_t>(g.cin) * g.h * g.w;
  const std::size_t out_stride = static_cast<std::size_t>(g.cout) * P;
  if (dx) *dx = Tensor(x.shape());
  for (int i = 0; i < n; ++i) {
    const Real* xi = x.data() + i * in_stride;
    const Real* colp = xi;
    if (!g.trivial()) {
      im2col(xi, g, cols.data());
      colp = cols.data();
    }
    CMapRM dY(dy.data() + i * out_stride, g.cout, P);
    dW.noalias() += dY * CMapRM(colp, K, P).transpose();
    db += dY.rowwise().sum();
    if (dx) {
      Real* dxi = dx->data() + i * in_stride;
      if (g.trivial()) {
        MapRM(dxi, K, P).noalias() = W.transpose() * dY;
      } else {
        MapRM dC(dcols.data(), K, P);
        dC.noalias() = W.transpose() * dY;
        col2im_add(dcols.data(), g, dxi);
      }
    }
  }
}

void dense_forward(const Tensor& x, const Tensor& weight, const Tensor& bias,
                   Tensor& y) {
  const int n = x.dim(0);
  const int d = weight.dim(1);
  const int u = weight.dim(0);
  y = Tensor({n, u});
  MapRM Y(y.data(), n, u);
  Y.noalias() = CMapRM(x.data(), n, d) * CMapRM(weight.data(), u, d).transpose();
  Y.rowwise() +=
      Eigen::Map<const Eigen::Matrix<Real, 1, Eigen::Dynamic>>(bias.data(), u);
}

void dense_backward(const Tensor& x, const Tensor& weight, const Tensor& dy,
                    Tensor& dweight, Tensor& dbias, Tensor* dx) {
  const int n = x.dim(0);
  const int d = weight.dim(1);
  const int u = weight.dim(0);
  CMapRM X(x.data(), n, d);
  CMapRM dY(dy.data(), n, u);
  MapRM(dweight.data(), u, d).noalias() += dY.transpose() * X;
  Eigen::Map<Eigen::Matrix<Real, 1, Eigen::Dynamic>>(dbias.data(), u) +=
      dY.colwise().sum();
  if (dx) {
    *dx = Tensor(x.shape());
    MapRM(dx->data(), n, d).noalias() = dY * CMapRM(weight.data(), u, d);
  }
}

}  // namespace sfg::nn::kernels
