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

#ifndef SFG_TENSORNET_CHECKPOINT_HPP_
#define SFG_TENSORNET_CHECKPOINT_HPP_

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sfg/tensornet/tensor.hpp"

namespace sfg::nn {

inline constexpr const char* kCheckpointFormat = "sfg-ckpt/1";

// Container layout:
//   line 1: "sfg-ckpt/1"
//   line 2: byte length of the JSON header
//   JSON header (free-form metadata plus a "tensors" table of names/shapes)
//   tensor payloads in table order, each as 64-bit little-endian floats.
struct Checkpoint {
  nlohmann::json meta = nlohmann::json::object();
  std::vector<std::pair<std::string, Tensor>> tensors;

  // Throws InvalidArgument if absent.
  const Tensor& tensor(const std::string& name) const;
  bool has_tensor(const std::string& name) const;
};

// Writes through a temporary file and renames, so a crash never leaves a
// truncated checkpoint behind.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
// Throws IoError for unreadable or malformed files.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace sfg::nn

#endif  // SFG_TENSORNET_CHECKPOINT_HPP_
