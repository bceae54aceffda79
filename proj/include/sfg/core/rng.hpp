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

#ifndef SFG_CORE_RNG_HPP_
#define SFG_CORE_RNG_HPP_

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace sfg {

// Deterministic random stream. The engine is std::mt19937_64 (fully specified
// by the standard); the conversions to real/integer values are done here
// rather than through <random> distributions, whose output is
// implementation-defined.
class Rng {
 public:
  Rng() : engine_(0) {}
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Rejection sampling keeps it unbiased.
  std::uint64_t uniform_int(std::uint64_t n);

  // Serialized engine state (the standard's textual representation).
  std::string state() const;
  void set_state(const std::string& state);

  bool operator==(const Rng& other) const { return engine_ == other.engine_; }

 private:
  std::mt19937_64 engine_;
};

// Expands one base seed into independent named streams ("corpus", "init",
// "rollout", "dropout", "eval", ...).
std::uint64_t derive_seed(std::uint64_t base, std::string_view stream,
                          std::uint64_t index = 0);

inline Rng make_stream(std::uint64_t base, std::string_view stream,
                       std::uint64_t index = 0) {
  return Rng(derive_seed(base, stream, index));
}

}  // namespace sfg

#endif  // SFG_CORE_RNG_HPP_
