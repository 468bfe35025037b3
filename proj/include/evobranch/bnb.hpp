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

#ifndef EVOBRANCH_BNB_HPP_
#define EVOBRANCH_BNB_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "evobranch/lp.hpp"
#include "evobranch/milp.hpp"

namespace evobranch {

inline constexpr double kPruneTolerance = 1e-9;

enum class NodeSelection { kBestBound, kDepthFirst };

struct BnbConfig {
  long node_limit = 1000000;
  double time_limit = 3600.0;  // seconds
  double integrality_tolerance = 1e-6;
  NodeSelection node_selection = NodeSelection::kBestBound;
  std::uint64_t rng_seed = 0;
  LpOptions lp;
  // Record one TraceEntry per processed node.
  bool record_trace = false;

  void validate() const;
};

enum class BnbStatus { kOptimal, kNodeLimit, kTimeLimit, kInfeasible };

std::string_view to_string(BnbStatus status);

struct TraceEntry {
  long node_id = 0;
  double parent_objective = 0.0;  // LP objective of the parent (root: own)
  double lp_objective = 0.0;      // +inf when the node LP was infeasible
  double global_bound = 0.0;      // lower bound over all open nodes at processing time
  std::optional<double> incumbent;
};

struct BnbStats {
  // Processed nodes below the root; a root-integral solve reports 0.
  long nodes = 0;
  double wall_time = 0.0;
  std::optional<double> incumbent_objective;
  std::vector<double> incumbent;
  double best_bound = -kInf;
  double gap = 1.0;
  BnbStatus status = BnbStatus::kInfeasible;
  long lp_iterations = 0;
  long numeric_failures = 0;
  std::vector<TraceEntry> trace;
};

// |incumbent - bound| / max(|incumbent|, 1e-10) clamped to [0, 1]; 1 without
// an incumbent.
double compute_gap(std::optional<double> incumbent, double bound);

enum class Direction { kDown = 0, kUp = 1 };

// Dynamic per-solve statistics read by the branching features.
class SearchState {
 public:
  SearchState() = default;
  explicit SearchState(int num_vars);

  int num_vars() const { return static_cast<int>(last_basic_.size()); }

  // Mean per-unit objective gain; 0 while no observation exists.
  double pseudocost(int var, Direction dir) const;
  long pseudocost_count(int var, Direction dir) const { return pc_count_[idx(dir)][var]; }
  double pseudocost_sum(int var, Direction dir) const { return pc_sum_[idx(dir)][var]; }
  long cutoffs(int var, Direction dir) const { return cutoff_[idx(dir)][var]; }
  long attempts(int var, Direction dir) const { return attempts_[idx(dir)][var]; }

  long total_lp_iterations() const { return total_lp_iterations_; }
  long last_basic(int var) const { return last_basic_[var]; }
  // (total - last_basic) / total, 0 while no LP iterations were counted.
  double scaled_age(int var) const;

  const std::vector<double>& incumbent() const { return incumbent_; }
  bool has_incumbent() const { return !incumbent_.empty(); }
  // Mean value over every incumbent found so far; 0 before the first.
  double historical_average(int var) const;
  long solutions_found() const { return solutions_found_; }

  void record_gain(int var, Direction dir, double per_unit_gain);
  void record_cutoff(int var, Direction dir);
  void record_attempt(int var, Direction dir);
  // Adds `lp` iterations to the total, then stamps its basic variables.
  void record_lp(const LpResult& lp);
  void record_solution(const std::vector<double>& x);

 private:
  static int idx(Direction dir) { return dir == Direction::kUp ? 1 : 0; }

  std::vector<double> pc_sum_[2];
  std::vector<long> pc_count_[2];
  std::vector<long> cutoff_[2];
  std::vector<long> attempts_[2];
  std::vector<long> last_basic_;
  long total_lp_iterations_ = 0;
  std::vector<double> incumbent_;
  std::vector<double> solution_sum_;
  long solutions_found_ = 0;
};

// Folds one child LP into `state`. A solved child adds
// (child_obj - parent_obj) / step to the (var, dir) pseudocost, with step =
// fractionality (down) or 1 - fractionality (up). An infeasible child, or one
// flagged `cut_off`, increments the cutoff counter.
void update_search_state(SearchState& state, int var, Direction dir, const LpResult& child,
                         double parent_objective, double fractionality, bool cut_off = false);

// Integer variables whose LP value is more than `tol` from the nearest
// integer, ascending.
std::vector<int> candidate_set(const LpResult& lp, const MilpInstance& instance, double tol);

// (down child: upper = floor(x), up child: lower = ceil(x)).
std::pair<Bounds, Bounds> branch(const Bounds& parent, int var, double x_value, double tol = 1e-6);

// Everything a branching policy may look at for one node.
struct NodeContext {
  const MilpInstance& instance;
  const Bounds& bounds;
  const LpResult& lp;
  const SearchState& state;
  long node_id = 0;
  int depth = 0;
  std::optional<double> incumbent_objective;
};

class BranchingPolicy {
 public:
  virtual ~BranchingPolicy() = default;
  virtual std::string name() const = 0;
  // Called once before each solve.
  virtual void begin_solve(const MilpInstance& /*instance*/, std::uint64_t /*seed*/) {}
  // Returns the chosen variable index, one of `candidates` (nonempty).
  // Policies that probe child LPs may record what they learn in `state`.
  virtual int select(const NodeContext& ctx, std::span<const int> candidates, SearchState& state) = 0;
};

BnbStats run_bnb(const MilpInstance& instance, BranchingPolicy& policy, const BnbConfig& config);

}  // namespace evobranch

#endif  // EVOBRANCH_BNB_HPP_
