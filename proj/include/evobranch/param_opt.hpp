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


// Skeleton tuning: a fast node-count filter against a baseline, then a
// seeded zeroth-order search over the parameter box.

#ifndef EVOBRANCH_PARAM_OPT_HPP_
#define EVOBRANCH_PARAM_OPT_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "evobranch/bnb.hpp"
#include "evobranch/dsl.hpp"

namespace evobranch {

inline constexpr double kFailedCost = std::numeric_limits<double>::infinity();
// Candidate nodes may not exceed this multiple of the baseline on any instance.
inline constexpr double kFilterRatio = 1.25;

enum class MetricKind { kNodes, kGap, kTime };

struct CostMetric {
  MetricKind kind = MetricKind::kNodes;
  double shift = 1.0;
  double time_limit = 0.0;  // seconds; required by kGap

  void validate() const;
};

struct OptBudget {
  int max_iterations = 50;  // cost evaluations
  long node_limit = 20000;
  double time_limit = 3600.0;
  std::uint64_t rng_seed = 0;

  void validate() const;
  BnbConfig solve_config() const;
};

struct InstanceOutcome {
  BnbStatus status = BnbStatus::kInfeasible;
  long nodes = 0;
  double time_s = 0.0;
  double gap = 1.0;
  bool failed = false;  // the policy threw
  std::string error;
};

struct CostEvaluation {
  double cost = kFailedCost;
  std::vector<InstanceOutcome> outcomes;
};

// Builds a fresh policy per solve so that solves can run on separate threads.
using PolicyFactory = std::function<std::unique_ptr<BranchingPolicy>()>;

// Shifted geometric mean of the per-instance measure; kFailedCost if any
// solve throws. For kGap the solve time limit is min(config, metric).
CostEvaluation evaluate_policy(const PolicyFactory& factory, std::span<const MilpInstance> instances,
                               const CostMetric& metric, const BnbConfig& config, int workers = 1);
double evaluate_cost(const ScoreProgram& program, std::span<const double> theta,
                     std::span<const MilpInstance> instances, const CostMetric& metric, const BnbConfig& config,
                     int workers = 1);

struct FilterResult {
  bool pass = false;
  int instance = -1;   // first violating instance (0-based), -1 on pass
  std::string reason;  // "eval_error@i" or "nodes@i:<c>><limit>"
};

// Worst-case rule: candidate[i] <= 1.25 * baseline[i] for every i.
FilterResult check_node_ratio(std::span<const long> candidate, std::span<const long> baseline);
// Solves the subset in order and stops at the first violation.
FilterResult fast_filter(const ScoreProgram& program, std::span<const double> theta0,
                         std::span<const MilpInstance> subset, std::span<const long> baseline_nodes,
                         const BnbConfig& config);
std::vector<long> baseline_node_counts(std::string_view policy, std::span<const MilpInstance> subset,
                                       const BnbConfig& config, int workers = 1);

struct Trial {
  std::vector<double> theta;
  double cost = kFailedCost;
  std::vector<InstanceOutcome> outcomes;
};

struct OptResult {
  std::vector<double> theta;
  double cost = kFailedCost;
  bool failed = false;  // every trial returned kFailedCost
  std::vector<Trial> trials;
  std::vector<double> best_so_far;  // one per trial
};

using BoxObjective = std::function<CostEvaluation(std::span<const double>)>;

// Trial 1 is theta0; trials 2..ceil(T/2) are a randomly shifted Halton design;
// the rest run Nelder-Mead from the incumbent, every vertex clamped to the
// box. Repeated points are memoized and never spend budget. The incumbent
// only moves on strict improvement.
OptResult minimize_in_box(const BoxObjective& objective, std::vector<double> theta0,
                          std::span<const std::pair<double, double>> bounds, const OptBudget& budget);

OptResult optimize_params(const ScoreProgram& skeleton, std::vector<double> theta0,
                          std::span<const MilpInstance> subset, const CostMetric& metric,
                          const OptBudget& budget, int workers = 1);

// trial,theta_0..,cost,nodes_<name>...
void write_trial_csv(std::ostream& out, const OptResult& result, std::span<const std::string> instance_names);

}  // namespace evobranch

#endif  // EVOBRANCH_PARAM_OPT_HPP_
