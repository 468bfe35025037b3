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


#ifndef EVOBRANCH_METRICS_HPP_
#define EVOBRANCH_METRICS_HPP_

#include <span>

namespace evobranch {

// exp(mean(log(v + shift))) - shift, accumulated in extended precision so that
// exact cases such as {1, 7} with shift 1 come out exact.
double shifted_geomean(std::span<const double> values, double shift = 1.0);

}  // namespace evobranch

#endif  // EVOBRANCH_METRICS_HPP_
