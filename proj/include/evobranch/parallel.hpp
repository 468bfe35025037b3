// Copyright 2026 The evobranch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef EVOBRANCH_PARALLEL_HPP_
#define EVOBRANCH_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace evobranch {

// Runs fn(0..n-1) on up to `workers` threads; workers <= 1 runs inline in
// index order. `fn` must not throw; callers record failures per index.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace evobranch

#endif  // EVOBRANCH_PARALLEL_HPP_
