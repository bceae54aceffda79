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

#include "sfg/tensornet/graph.hpp"

#include <algorithm>
#include <cmath>

#include "kernels.hpp"
#include "sfg/core/error.hpp"

namespace sfg::nn {

using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

const char* activation_name(ActivationKind k) {
  switch (k) {
    case ActivationKind::kElu: return "elu";
    case ActivationKind::kSoftmax: return "softmax";
    case ActivationKind::kLinear: return "linear";
  }
  return "?";
}

ActivationKind activation_from_name(const std::string& s) {
  if (s == "elu") return ActivationKind::kElu;
  if (s == "softmax") return ActivationKind::kSoftmax;
  if (s == "linear") return ActivationKind::kLinear;
  throw InvalidArgument("unknown activation '" + s + "'");
}

json layer_to_json(const LayerSpec& l) {
  return std::visit(
      Overloaded{
          [](const Conv& c) {
            return json{{"type", "conv"},
                        {"k", c.k},
                        {"stride", {c.stride_y, c.stride_x}},
                        {"out", c.out_channels}};
          },
          [](const Dense& d) { return json{{"type", "dense"}, {"units", d.units}}; },
          [](const Activation& a) {
            return json{{"type", "activation"}, {"kind", activation_name(a.kind)}};
          },
          [](const Dropout& d) { return json{{"type", "dropout"}, {"p", d.p}}; },
          [](const Concat&) { return json{{"type", "concat"}}; },
          [](const Flatten&) { return json{{"type", "flatten"}}; },
      },
      l);
}

LayerSpec layer_from_json(const json& j) {
  const std::string type = j.at("type");
  if (type == "conv")
    return Conv{j.at("k").get<int>(), j.at("stride").at(0).get<int>(),
                j.at("stride").at(1).get<int>(), j.at("out").get<int>()};
  if (type == "dense") return Dense{j.at("units").get<int>()};
  if (type == "activation")
    return Activation{activation_from_name(j.at("kind").get<std::string>())};
  if (type == "dropout") return Dropout{j.at("p").get<double>()};
  if (type == "concat") return Concat{};
  if (type == "flatten") return Flatten{};
  throw InvalidArgument("unknown layer type '" + type + "'");
}

json layers_to_json(const std::vector<LayerSpec>& ls) {
  json a = json::array();
  for (const auto& l : ls) a.push_back(layer_to_json(l));
  return a;
}

std::vector<LayerSpec> layers_from_json(const json& a) {
  std::vector<LayerSpec> out;
  for (const auto& j : a) out.push_back(layer_from_json(j));
  return out;
}

Shape with_batch(int n, const Shape& s) {
  Shape out{n};
  out.insert(out.end(), s.begin(), s.end());
  return out;
}

}  // namespace

std::string describe(const LayerSpec& layer) {
  return std::visit(
      Overloaded{
          [](const Conv& c) {
            std::string s = "Conv(" + std::to_string(c.k) + ", stride-";
            if (c.stride_y == c.stride_x)
              s += std::to_string(c.stride_y);
            else
              s += "(" + std::to_string(c.stride_y) + "," +
                   std::to_string(c.stride_x) + ")";
            return s + ")-" + std::to_string(c.out_channels);
          },
          [](const Dense& d) { return "Dense(" + std::to_string(d.units) + ")"; },
          [](const Activation& a) { return std::string(activation_name(a.kind)); },
          [](const Dropout& d) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "DO(%g)", d.p);
            return std::string(buf);
          },
          [](const Concat&) { return std::string("Concat"); },
          [](const Flatten&) { return std::string("Flatten"); },
      },
      layer);
}

void to_json(json& j, const GraphSpec& g) {
  j = json::object();
  json branches = json::array();
  for (const auto& b : g.branches)
    branches.push_back(
        {{"name", b.name}, {"input", b.input}, {"layers", layers_to_json(b.layers)}});
  j["branches"] = branches;
  j["trunk"] = layers_to_json(g.trunk);
  json heads = json::array();
  for (const auto& h : g.heads)
    heads.push_back({{"name", h.name}, {"layers", layers_to_json(h.layers)}});
  j["heads"] = heads;
  j["head_init"] = g.head_init;
}

void from_json(const json& j, GraphSpec& g) {
  g = GraphSpec{};
  for (const auto& b : j.at("branches"))
    g.branches.push_back({b.at("name").get<std::string>(),
                          b.at("input").get<Shape>(),
                          layers_from_json(b.at("layers"))});
  g.trunk = layers_from_json(j.at("trunk"));
  for (const auto& h : j.at("heads"))
    g.heads.push_back(
        {h.at("name").get<std::string>(), layers_from_json(h.at("layers"))});
  g.head_init = j.at("head_init").get<double>();
}

// ---- construction ----------------------------------------------------------

Network::Network(GraphSpec spec, std::uint64_t init_seed) : spec_(std::move(spec)) {
  compile();
  init_params(init_seed);
}

Network::Network(GraphSpec spec, ParamStore params) : spec_(std::move(spec)) {
  compile();
  if (params.size() != params_.size())
    throw ShapeError("parameter set does not match the architecture");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params.name(i) != params_.name(i) ||
        params.value(i).shape() != params_.value(i).shape())
      throw ShapeError("parameter " + params.name(i) +
                       " does not match the architecture");
  }
  params_ = std::move(params);
}

Shape Network::compile_seq(const std::string& prefix,
                           const std::vector<LayerSpec>& layers, Shape cur,
                           CompiledSeq& out, bool is_trunk) {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    Compiled c;
    c.spec = layers[i];
    c.name = prefix + "/" + std::to_string(i) + ":" + describe(layers[i]);
    c.in = cur;
    const std::string pname = prefix + "/" + std::to_string(i);
    auto fail = [&](const std::string& why) {
      throw ShapeError("layer " + c.name + ": " + why + " (input " +
                       shape_string(cur) + ")");
    };
    std::visit(
        Overloaded{
            [&](const Conv& conv) {
              if (cur.size() != 3) fail("convolution expects a {C,H,W} input");
              if (conv.k < 1 || conv.stride_y < 1 || conv.stride_x < 1 ||
                  conv.out_channels < 1)
                fail("invalid convolution parameters");
              const auto g = kernels::conv_geometry(cur[0], cur[1], cur[2], conv.k,
                                                    conv.stride_y, conv.stride_x,
                                                    conv.out_channels);
              c.out = {g.cout, g.ho, g.wo};
              c.weight = params_.add(pname + "/weight",
                                     Tensor({conv.out_channels, cur[0], conv.k, conv.k}));
              c.bias = params_.add(pname + "/bias", Tensor({conv.out_channels}));
            },
            [&](const Dense& d) {
              if (cur.size() != 1) fail("dense expects a flat input; insert Flatten");
              if (d.units < 1) fail("dense needs at least one unit");
              c.out = {d.units};
              c.weight = params_.add(pname + "/weight", Tensor({d.units, cur[0]}));
              c.bias = params_.add(pname + "/bias", Tensor({d.units}));
            },
            [&](const Activation& a) {
              if (a.kind == ActivationKind::kSoftmax && cur.size() != 1)
                fail("softmax expects a flat input");
              c.out = cur;
            },
            [&](const Dropout& d) {
              if (!(d.p >= 0.0 && d.p < 1.0)) fail("dropout p must lie in [0, 1)");
              c.out = cur;
            },
            [&](const Concat&) {
              if (!(is_trunk && i == 0)) fail("Concat is only valid as the first trunk layer");
              c.out = cur;
            },
            [&](const Flatten&) { c.out = {static_cast<int>(shape_size(cur))}; },
        },
        layers[i]);
    cur = c.out;
    out.push_back(std::move(c));
  }
  return cur;
}

void Network::compile() {
  if (spec_.branches.empty()) throw ShapeError("graph has no input branches");
  params_ = ParamStore{};
  branches_.clear();
  heads_.clear();
  trunk_.clear();
  branch_widths_.clear();
  output_shapes_.clear();

  for (const auto& b : spec_.branches) {
    if (b.input.empty()) throw ShapeError("branch " + b.name + " has no input shape");
    CompiledSeq seq;
    const Shape out = compile_seq(b.name, b.layers, b.input, seq, false);
    if (out.size() != 1 && spec_.branches.size() > 1)
      throw ShapeError("branch " + b.name + " must end with a flat output, got " +
                       shape_string(out));
    branch_widths_.push_back(out.size() == 1 ? out[0] : -1);
    branches_.push_back(std::move(seq));
  }
  Shape merged;
  if (spec_.branches.size() == 1) {
    merged = branches_[0].empty() ? spec_.branches[0].input : branches_[0].back().out;
  } else {
    if (spec_.trunk.empty() || !std::holds_alternative<Concat>(spec_.trunk.front()))
      throw ShapeError("multiple branches require a Concat as the first trunk layer");
    int width = 0;
    for (int w : branch_widths_) width += w;
    merged = {width};
  }
  const Shape trunk_out = compile_seq("trunk", spec_.trunk, merged, trunk_, true);
  if (spec_.heads.empty()) {
    output_shapes_.push_back(trunk_out);
  }
  for (const auto& h : spec_.heads) {
    CompiledSeq seq;
    output_shapes_.push_back(compile_seq(h.name, h.layers, trunk_out, seq, false));
    heads_.push_back(std::move(seq));
  }
}

void Network::init_params(std::uint64_t seed) {
  Rng rng(seed);
  auto he_uniform = [&](Tensor& w, int fan_in) {
    const double limit = std::sqrt(6.0 / fan_in);
    for (auto& v : w.values()) v = static_cast<Real>(rng.uniform(-limit, limit));
  };
  auto init_seq = [&](const CompiledSeq& seq, bool is_head) {
    int last_dense = -1;
    if (is_head)
      for (std::size_t i = 0; i < seq.size(); ++i)
        if (std::holds_alternative<Dense>(seq[i].spec)) last_dense = static_cast<int>(i);
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const auto& c = seq[i];
      if (c.weight < 0) continue;
      Tensor& w = params_.value(c.weight);
      if (static_cast<int>(i) == last_dense) {
        for (auto& v : w.values())
          v = static_cast<Real>(rng.uniform(-spec_.head_init, spec_.head_init));
      } else {
        he_uniform(w, static_cast<int>(w.size() / w.dim(0)));
      }
      params_.value(c.bias).fill(Real(0));
    }
  };
  for (const auto& b : branches_) init_seq(b, false);
  init_seq(trunk_, false);
  for (const auto& h : heads_) init_seq(h, true);
}

int Network::num_outputs() const { return static_cast<int>(output_shapes_.size()); }

const Shape& Network::output_shape(int i) const { return output_shapes_.at(i); }

// ---- forward -------------------------------------------------------------

void Network::forward_seq(const CompiledSeq& seq, Tensor x, Mode mode, Rng* rng,
                          Tape::Sequence& rec) const {
  rec.acts.clear();
  rec.masks.assign(seq.size(), Tensor{});
  rec.acts.reserve(seq.size() + 1);
  rec.acts.push_back(std::move(x));
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const Compiled& c = seq[i];
    const Tensor& in = rec.acts.back();
    const int n = in.dim(0);
    Tensor y;
    std::visit(
        Overloaded{
            [&](const Conv& conv) {
              const auto g = kernels::conv_geometry(c.in[0], c.in[1], c.in[2], conv.k,
                                                    conv.stride_y, conv.stride_x,
                                                    conv.out_channels);
              kernels::conv_forward(in, params_.value(c.weight), params_.value(c.bias),
                                    g, y);
            },
            [&](const Dense&) {
              kernels::dense_forward(in, params_.value(c.weight),
                                     params_.value(c.bias), y);
            },
            [&](const Activation& a) {
              y = in;
              if (a.kind == ActivationKind::kElu) {
                for (auto& v : y.values()) v = v > 0 ? v : std::expm1(v);
              } else if (a.kind == ActivationKind::kSoftmax) {
                const int d = c.in[0];
                for (int r = 0; r < n; ++r) {
                  Real* row = y.data() + static_cast<std::size_t>(r) * d;
                  const Real mx = *std::max_element(row, row + d);
                  Real sum = 0;
                  for (int k = 0; k < d; ++k) sum += (row[k] = std::exp(row[k] - mx));
                  for (int k = 0; k < d; ++k) row[k] /= sum;
                }
              }
            },
            [&](const Dropout& d) {
              y = in;
              if (mode != Mode::kTrain || d.p == 0.0) return;
              if (!rng) throw InvalidArgument("layer " + c.name +
                                              ": training mode needs a dropout stream");
              Tensor mask(in.shape());
              const Real keep = static_cast<Real>(1.0 / (1.0 - d.p));
              for (std::size_t k = 0; k < mask.size(); ++k)
                mask[k] = rng->uniform() >= d.p ? keep : Real(0);
              for (std::size_t k = 0; k < y.size(); ++k) y[k] *= mask[k];
              rec.masks[i] = std::move(mask);
            },
            [&](const Concat&) { y = in; },
            [&](const Flatten&) { y = in.reshaped(with_batch(n, c.out)); },
        },
        c.spec);
    rec.acts.push_back(std::move(y));
  }
}

ForwardResult Network::forward(std::span<const Tensor> inputs, Mode mode,
                               Rng* dropout_rng) const {
  if (inputs.size() != branches_.size())
    throw ShapeError("network expects " + std::to_string(branches_.size()) +
                     " inputs, got " + std::to_string(inputs.size()));
  if (inputs[0].rank() < 1 || inputs[0].dim(0) < 1)
    throw ShapeError("network input needs a non-empty batch dimension");
  const int n = inputs[0].dim(0);
  ForwardResult res;
  res.tape.batch = n;
  res.tape.branches.resize(branches_.size());
  for (std::size_t b = 0; b < branches_.size(); ++b) {
    const Shape expect = with_batch(n, spec_.branches[b].input);
    if (inputs[b].shape() != expect)
      throw ShapeError("input of branch " + spec_.branches[b].name + ": expected " +
                       shape_string(expect) + ", got " +
                       shape_string(inputs[b].shape()));
    forward_seq(branches_[b], inputs[b], mode, dropout_rng, res.tape.branches[b]);
  }
  Tensor merged;
  if (branches_.size() == 1) {
    merged = res.tape.branches[0].acts.back();
  } else {
    int width = 0;
    for (int w : branch_widths_) width += w;
    merged = Tensor({n, width});
    int offset = 0;
    for (std::size_t b = 0; b < branches_.size(); ++b) {
      const Tensor& part = res.tape.branches[b].acts.back();
      const int w = branch_widths_[b];
      for (int r = 0; r < n; ++r)
        std::copy_n(part.data() + static_cast<std::size_t>(r) * w, w,
                    merged.data() + static_cast<std::size_t>(r) * width + offset);
      offset += w;
    }
  }
  forward_seq(trunk_, std::move(merged), mode, dropout_rng, res.tape.trunk);
  const Tensor& trunk_out = res.tape.trunk.acts.back();
  if (heads_.empty()) {
    res.outputs.push_back(trunk_out);
  } else {
    res.tape.heads.resize(heads_.size());
    for (std::size_t h = 0; h < heads_.size(); ++h) {
      forward_seq(heads_[h], trunk_out, mode, dropout_rng, res.tape.heads[h]);
      res.outputs.push_back(res.tape.heads[h].acts.back());
    }
  }
  for (const auto& o : res.outputs)
    if (!o.all_finite()) throw NonFiniteError("network produced a non-finite output");
  return res;
}

// ---- backward ------------------------------------------------------------

Tensor Network::backward_seq(const CompiledSeq& seq, const Tape::Sequence& rec,
                             Tensor grad, std::size_t from_layer, bool need_input,
                             Gradients& grads) const {
  for (std::size_t idx = from_layer; idx-- > 0;) {
    const Compiled& c = seq[idx];
    const Tensor& in = rec.acts[idx];
    const Tensor& out = rec.acts[idx + 1];
    const int n = in.dim(0);
    const bool want_dx = need_input || idx > 0;
    std::visit(
        Overloaded{
            [&](const Conv& conv) {
              const auto g = kernels::conv_geometry(c.in[0], c.in[1], c.in[2], conv.k,
                                                    conv.stride_y, conv.stride_x,
                                                    conv.out_channels);
              Tensor dx;
              kernels::conv_backward(in, params_.value(c.weight), grad, g,
                                     grads[c.weight], grads[c.bias],
                                     want_dx ? &dx : nullptr);
              grad = std::move(dx);
            },
            [&](const Dense&) {
              Tensor dx;
              kernels::dense_backward(in, params_.value(c.weight), grad,
                                      grads[c.weight], grads[c.bias],
                                      want_dx ? &dx : nullptr);
              grad = std::move(dx);
            },
            [&](const Activation& a) {
              if (a.kind == ActivationKind::kElu) {
                for (std::size_t k = 0; k < grad.size(); ++k)
                  if (!(out[k] > 0)) grad[k] *= out[k] + Real(1);
              } else if (a.kind == ActivationKind::kSoftmax) {
                const int d = c.in[0];
                for (int r = 0; r < n; ++r) {
                  Real* g = grad.data() + static_cast<std::size_t>(r) * d;
                  const Real* p = out.data() + static_cast<std::size_t>(r) * d;
                  Real dot = 0;
                  for (int k = 0; k < d; ++k) dot += g[k] * p[k];
                  for (int k = 0; k < d; ++k) g[k] = p[k] * (g[k] - dot);
                }
              }
            },
            [&](const Dropout&) {
              const Tensor& mask = rec.masks[idx];
              if (mask.empty()) return;
              for (std::size_t k = 0; k < grad.size(); ++k) grad[k] *= mask[k];
            },
            [&](const Concat&) {},
            [&](const Flatten&) { grad = std::move(grad).reshaped(in.shape()); },
        },
        c.spec);
    if (!want_dx) return Tensor{};
  }
  return grad;
}

void Network::backward(Tape& tape, std::span<const OutputGrad> output_grads,
                       Gradients& grads) const {
  if (tape.consumed) throw StateError("tape already consumed by a backward pass");
  tape.consumed = true;
  if (grads.size() != params_.size())
    throw ShapeError("gradient set does not match the parameter store");
  const int n = tape.batch;

  Tensor trunk_grad;
  std::size_t trunk_from = trunk_.size();
  auto add_into = [](Tensor& acc, Tensor g) {
    if (acc.empty()) {
      acc = std::move(g);
    } else {
      for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += g[k];
    }
  };
  for (const auto& og : output_grads) {
    if (og.output < 0 || og.output >= num_outputs())
      throw ShapeError("output gradient refers to output " + std::to_string(og.output));
    const CompiledSeq& seq = heads_.empty() ? trunk_ : heads_[og.output];
    std::size_t from = seq.size();
    Shape expect = with_batch(n, output_shapes_[og.output]);
    if (og.pre_activation) {
      if (seq.empty() || !std::holds_alternative<Activation>(seq.back().spec))
        throw ShapeError("pre-activation gradient needs a final activation layer");
      from = seq.size() - 1;
      expect = with_batch(n, seq.back().in);
    }
    if (og.grad.shape() != expect)
      throw ShapeError("output gradient: expected " + shape_string(expect) + ", got " +
                       shape_string(og.grad.shape()));
    if (heads_.empty()) {
      trunk_from = from;
      add_into(trunk_grad, og.grad);
    } else {
      add_into(trunk_grad,
               backward_seq(seq, tape.heads[og.output], og.grad, from, true, grads));
    }
  }
  if (trunk_grad.empty()) return;
  trunk_grad =
      backward_seq(trunk_, tape.trunk, std::move(trunk_grad), trunk_from, true, grads);
  if (branches_.size() == 1) {
    backward_seq(branches_[0], tape.branches[0], std::move(trunk_grad),
                 branches_[0].size(), false, grads);
    return;
  }
  int width = 0;
  for (int w : branch_widths_) width += w;
  int offset = 0;
  for (std::size_t b = 0; b < branches_.size(); ++b) {
    const int w = branch_widths_[b];
    Tensor part({n, w});
    for (int r = 0; r < n; ++r)
      std::copy_n(trunk_grad.data() + static_cast<std::size_t>(r) * width + offset, w,
                  part.data() + static_cast<std::size_t>(r) * w);
    backward_seq(branches_[b], tape.branches[b], std::move(part), branches_[b].size(),
                 false, grads);
    offset += w;
  }
}

Gradients Network::backward(Tape& tape, std::span<const OutputGrad> output_grads) const {
  Gradients g(params_);
  backward(tape, output_grads, g);
  return g;
}

const Tensor& Network::pre_activation(const Tape& tape, int output) const {
  const Tape::Sequence& rec = heads_.empty() ? tape.trunk : tape.heads.at(output);
  if (rec.acts.size() < 2) throw ShapeError("output has no final layer");
  return rec.acts[rec.acts.size() - 2];
}

}  // namespace sfg::nn
