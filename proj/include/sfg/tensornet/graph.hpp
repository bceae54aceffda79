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

#ifndef SFG_TENSORNET_GRAPH_HPP_
#define SFG_TENSORNET_GRAPH_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "sfg/core/rng.hpp"
#include "sfg/tensornet/params.hpp"
#include "sfg/tensornet/tensor.hpp"

namespace sfg::nn {

// ---- Layer descriptions ----------------------------------------------------

// 2-D convolution with "same" padding: output size is ceil(input / stride)
// per axis, padding split evenly with the extra pixel at the bottom/right.
struct Conv {
  int k = 3;
  int stride_y = 1;
  int stride_x = 1;
  int out_channels = 1;
  bool operator==(const Conv&) const = default;
};

struct Dense {
  int units = 1;
  bool operator==(const Dense&) const = default;
};

enum class ActivationKind { kElu, kSoftmax, kLinear };

struct Activation {
  ActivationKind kind = ActivationKind::kLinear;
  bool operator==(const Activation&) const = default;
};

// Inverted dropout: scaled by 1/(1-p) in training, identity in evaluation.
struct Dropout {
  double p = 0.0;
  bool operator==(const Dropout&) const = default;
};

// Merges the outputs of all branches; only valid as the first trunk layer.
struct Concat {
  bool operator==(const Concat&) const = default;
};

struct Flatten {
  bool operator==(const Flatten&) const = default;
};

using LayerSpec = std::variant<Conv, Dense, Activation, Dropout, Concat, Flatten>;

std::string describe(const LayerSpec& layer);

// An input branch (tower) is a layer sequence over one input tensor.
struct BranchSpec {
  std::string name;
  Shape input;  // per-sample shape: {C, H, W} or {D}
  std::vector<LayerSpec> layers;
  bool operator==(const BranchSpec&) const = default;
};

struct HeadSpec {
  std::string name;
  std::vector<LayerSpec> layers;
  bool operator==(const HeadSpec&) const = default;
};

// branches -> (concat) -> trunk -> heads. With no heads the trunk output is
// the single network output.
struct GraphSpec {
  std::vector<BranchSpec> branches;
  std::vector<LayerSpec> trunk;
  std::vector<HeadSpec> heads;
  // Uniform init half-width for the last Dense layer of each head; all other
  // Conv/Dense weights are He-uniform. Biases start at zero.
  double head_init = 1e-3;
  bool operator==(const GraphSpec&) const = default;
};

void to_json(nlohmann::json& j, const GraphSpec& g);
void from_json(const nlohmann::json& j, GraphSpec& g);

// ---- Execution ------------------------------------------------------------

enum class Mode { kTrain, kEval };

// Activations recorded by forward() for one backward() pass.
struct Tape {
  struct Sequence {
    std::vector<Tensor> acts;   // acts[0] = input, acts[i+1] = output of layer i
    std::vector<Tensor> masks;  // dropout masks, empty for other layers
  };
  std::vector<Sequence> branches;
  Sequence trunk;
  std::vector<Sequence> heads;
  int batch = 0;
  bool consumed = false;
};

struct ForwardResult {
  std::vector<Tensor> outputs;  // one per head (or the trunk output)
  Tape tape;
};

// Gradient flowing into one network output. With pre_activation set, `grad`
// is taken with respect to the input of the head's final Activation layer
// (e.g. policy logits), bypassing that layer.
struct OutputGrad {
  int output = 0;
  Tensor grad;
  bool pre_activation = false;
};

class Network {
 public:
  Network(GraphSpec spec, std::uint64_t init_seed);
  // Adopts existing parameters (e.g. from a checkpoint); names and shapes
  // must match the architecture.
  Network(GraphSpec spec, ParamStore params);

  const GraphSpec& spec() const { return spec_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  int num_outputs() const;
  // Per-sample output shape of output i.
  const Shape& output_shape(int i) const;
  std::size_t parameter_count() const { return params_.parameter_count(); }

  // inputs[b] has shape {N, ...branch input}. A dropout stream is required
  // in training mode when the graph contains dropout.
  ForwardResult forward(std::span<const Tensor> inputs, Mode mode,
                        Rng* dropout_rng = nullptr) const;

  // Accumulates parameter gradients into `grads` and marks the tape
  // consumed. Outputs without an entry receive zero gradient.
  void backward(Tape& tape, std::span<const OutputGrad> output_grads,
                Gradients& grads) const;
  Gradients backward(Tape& tape, std::span<const OutputGrad> output_grads) const;

  // Input of the final layer of output i as recorded on the tape (logits for
  // a softmax head).
  const Tensor& pre_activation(const Tape& tape, int output) const;

 private:
  struct Compiled {
    LayerSpec spec;
    std::string name;
    Shape in;   // per-sample
    Shape out;  // per-sample
    int weight = -1;
    int bias = -1;
  };
  using CompiledSeq = std::vector<Compiled>;

  void compile();
  void init_params(std::uint64_t seed);
  Shape compile_seq(const std::string& prefix, const std::vector<LayerSpec>& layers,
                    Shape in, CompiledSeq& out, bool is_trunk);

  void forward_seq(const CompiledSeq& seq, Tensor x, Mode mode, Rng* rng,
                   Tape::Sequence& rec) const;
  // Returns the gradient wrt the sequence input unless need_input is false.
  Tensor backward_seq(const CompiledSeq& seq, const Tape::Sequence& rec,
                      Tensor grad, std::size_t from_layer, bool need_input,
                      Gradients& grads) const;

  GraphSpec spec_;
  ParamStore params_;
  std::vector<CompiledSeq> branches_;
  CompiledSeq trunk_;
  std::vector<CompiledSeq> heads_;
  std::vector<int> branch_widths_;
  std::vector<Shape> output_shapes_;
};

}  // namespace sfg::nn

#endif  // SFG_TENSORNET_GRAPH_HPP_
