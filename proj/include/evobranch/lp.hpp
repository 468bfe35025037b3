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

#ifndef EVOBRANCH_LP_HPP_
#define EVOBRANCH_LP_HPP_

#include <memory>
#include <string_view>
#include <vector>

#include "evobranch/milp.hpp"

namespace evobranch {

enum class LpStatus {
  kOptimal,
  kInfeasible,
  kUnbounded,
  // A pivot below the pivot tolerance was the only way forward, or the final
  // basis failed the residual check after reinversion.
  kNumericFailure,
  kIterationLimit,
};

std::string_view to_string(LpStatus status);

enum class BasisStatus { kLower, kBasic, kUpper, kZero };

enum class PricingRule {
  // Smallest-index entering and leaving variable throughout.
  kBland,
  // Most negative reduced cost; drops to Bland's rule after a run of
  // degenerate pivots and returns once the objective moves again.
  kDantzigWithBland,
};

struct LpOptions {
  PricingRule pricing = PricingRule::kDantzigWithBland;
  long max_iterations = 200000;
};

// Opaque final simplex state, kept so that a child LP differing by one bound
// can be re-solved by dual simplex instead of from scratch.
class LpWarmStart;

struct LpResult {
  LpStatus status = LpStatus::kNumericFailure;
  std::vector<double> x;  // structural values, valid when optimal
  double objective = 0.0;
  std::vector<double> duals;          // one per row, <= 0 for a minimization
  std::vector<double> reduced_costs;  // one per structural variable
  std::vector<BasisStatus> basis;     // one per structural variable
  std::vector<double> row_slack;      // b - A x per row
  long iterations = 0;
  std::shared_ptr<const LpWarmStart> warm_start;

  bool optimal() const { return status == LpStatus::kOptimal; }
};

// Two-phase bounded-variable primal simplex over a dense tableau. Variable
// bounds come from `local_bounds`; a box with lower > upper is reported
// infeasible without pivoting.
LpResult solve_lp_relaxation(const MilpInstance& instance, const Bounds& local_bounds,
                             const LpOptions& options = {});

// Re-solves the LP held in `start` after replacing the bounds of `var` with
// [lo, hi]. Runs bounded dual simplex from the stored optimal basis, capped
// at `iteration_cap` pivots. On kIterationLimit the returned objective is the
// dual bound reached so far, which is a valid lower bound on the child LP.
LpResult resolve_with_bounds(const LpWarmStart& start, int var, double lo, double hi,
                             long iteration_cap);

}  // namespace evobranch

#endif  // EVOBRANCH_LP_HPP_
