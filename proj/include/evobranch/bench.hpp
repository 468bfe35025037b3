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

#ifndef EVOBRANCH_BENCH_HPP_
#define EVOBRANCH_BENCH_HPP_

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evobranch/bnb.hpp"
#include "evobranch/param_opt.hpp"

namespace evobranch {

inline constexpr const char* kBenchHeader = "policy,instance,status,nodes,time_s,gap";
inline constexpr const char* kSummaryHeader = "policy,geomean_time_s,geomean_nodes,wins,finished,cells,win_by";

// Which cell value decides a win. Nodes are reproducible; time is not.
enum class WinMetric { kTime, kNodes };

std::string_view to_string(WinMetric metric);

struct BenchPolicy {
  std::string label;
  PolicyFactory factory;
};

// A builtin name ("rpb", "random", ...) or "dsl:<path>" for a score program
// with its own params.
BenchPolicy parse_policy_spec(std::string_view spec);

struct BenchConfig {
  BnbConfig solve;
  int workers = 1;
  WinMetric win_by = WinMetric::kTime;
};

struct BenchCell {
  std::string policy;
  std::string instance;
  std::string status;  // a BnbStatus name, or "error" when the policy threw
  long nodes = 0;
  double time_s = 0.0;
  double gap = 1.0;

  // Proved optimal or infeasible within the limits.
  bool finished() const { return status == "optimal" || status == "infeasible"; }
};

struct PolicySummary {
  std::string policy;
  // 1-shifted geometric means over the policy's cells, error cells left out;
  // NaN when nothing is left.
  double geomean_time_s = 0.0;
  double geomean_nodes = 0.0;
  int wins = 0;
  int finished = 0;
  int cells = 0;
};

struct RunReport {
  std::vector<std::string> policies;
  std::vector<std::string> instances;
  std::vector<BenchCell> cells;  // policy-major, in input order
  std::vector<PolicySummary> summary;
  WinMetric win_by = WinMetric::kTime;
};

// Per policy, the number of instances where it finished with the smallest
// value of `win_by` among finished cells. Exact ties credit every tied policy.
std::vector<int> compute_wins(std::span<const BenchCell> cells, std::span<const std::string> policies,
                              WinMetric win_by);

// Fills `summary` from `cells`.
void summarize(RunReport& report);

RunReport run_benchmark(std::span<const BenchPolicy> policies, std::span<const MilpInstance> instances,
                        const BenchConfig& config);

// Cell table, a blank line, then the summary table. Doubles are written in
// shortest round-trip form so every summary number can be recomputed.
void write_report_csv(std::ostream& out, const RunReport& report);
RunReport read_report_csv(std::string_view text);

}  // namespace evobranch

#endif  // EVOBRANCH_BENCH_HPP_
