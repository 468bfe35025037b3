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


#include "evobranch/metrics.hpp"

#include <cmath>

#include "evobranch/milp.hpp"

namespace evobranch {

double shifted_geomean(std::span<const double> values, double shift) {
  if (values.empty()) throw ContractViolation("shifted_geomean of an empty set");
  long double acc = 0.0L;
  for (double v : values) {
    if (!(v >= 0.0) || !(v + shift > 0.0)) throw ContractViolation("shifted_geomean needs v >= 0 and v + shift > 0");
    acc += std::log(static_cast<long double>(v) + shift);
  }
  const long double mean = acc / static_cast<long double>(values.size());
  return static_cast<double>(std::exp(mean) - static_cast<long double>(shift));
}

}  // namespace evobranch
