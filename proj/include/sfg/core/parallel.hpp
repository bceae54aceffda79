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

#ifndef SFG_CORE_PARALLEL_HPP_
#define SFG_CORE_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace sfg {

// Worker cap: SFG_THREADS if set (>= 1), otherwise hardware concurrency.
int max_threads();

// Runs fn(i) for i in [0, n) on up to max_threads() workers using a static
// contiguous partition. Results must be written to per-index slots; the first
// exception thrown by any worker is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace sfg

#endif  // SFG_CORE_PARALLEL_HPP_
