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

#ifndef EVOBRANCH_POLICIES_HPP_
#define EVOBRANCH_POLICIES_HPP_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evobranch/bnb.hpp"

namespace evobranch {

// Candidate at the first maximal score. Throws ContractViolation on empty or
// mismatched input. NaN scores never win.
int select_branch_variable(std::span<const double> scores, std::span<const int> candidates);

// Policies that produce one score per candidate and branch on the argmax.
class ScoringPolicy : public BranchingPolicy {
 public:
  virtual std::vector<double> scores(const NodeContext& ctx, std::span<const int> candidates,
                                     SearchState& state) = 0;
  int select(const NodeContext& ctx, std::span<const int> candidates, SearchState& state) override;
};

class RandomPolicy : public ScoringPolicy {
 public:
  std::string name() const override { return "random"; }
  void begin_solve(const MilpInstance& instance, std::uint64_t seed) override;
  std::vector<double> scores(const NodeContext& ctx, std::span<const int> candidates,
                             SearchState& state) override;

 private:
  std::uint64_t seed_ = 0;
};

class MostFractionalPolicy : public ScoringPolicy {
 public:
  std::string name() const override { return "most_fractional"; }
  std::vector<double> scores(const NodeContext& ctx, std::span<const int> candidates,
                             SearchState& state) override;
};

// max(down·f, eps) · max(up·(1-f), eps). A direction without observations
// borrows the mean over initialized variables in that direction (1 if none).
class PseudocostPolicy : public ScoringPolicy {
 public:
  std::string name() const override { return "pseudocost"; }
  std::vector<double> scores(const NodeContext& ctx, std::span<const int> candidates,
                             SearchState& state) override;
};

struct StrongBranchingOptions {
  // Dual simplex pivots per child probe.
  long probe_iteration_cap = 1000;
};

// Scores each candidate by (gain_down + eps)(gain_up + eps) from both child
// LPs. An infeasible child counts as a very large gain; a child that fails
// numerically sinks the candidate to -inf. Probe results feed pseudocosts.
class StrongBranchingPolicy : public ScoringPolicy {
 public:
  explicit StrongBranchingPolicy(StrongBranchingOptions options = {}) : options_(options) {}
  std::string name() const override { return "strong_branching"; }
  std::vector<double> scores(const NodeContext& ctx, std::span<const int> candidates,
                             SearchState& state) override;

 private:
  StrongBranchingOptions options_;
};

// Reliability-style stand-in: strong branching for the first `warmup`
// branchings of a solve, pseudocost products afterwards.
class HybridPseudocostPolicy : public ScoringPolicy {
 public:
  explicit HybridPseudocostPolicy(int warmup = 8, StrongBranchingOptions options = {})
      : warmup_(warmup), strong_(options) {}
  std::string name() const override { return "rpb"; }
  void begin_solve(const MilpInstance& instance, std::uint64_t seed) override;
  std::vector<double> scores(const NodeContext& ctx, std::span<const int> candidates,
                             SearchState& state) override;

 private:
  int warmup_;
  int calls_ = 0;
  StrongBranchingPolicy strong_;
  PseudocostPolicy pseudocost_;
};

// random | most_fractional | pseudocost | strong_branching | rpb. Returns
// nullptr for unknown names.
std::unique_ptr<BranchingPolicy> make_builtin_policy(std::string_view name);

}  // namespace evobranch

#endif  // EVOBRANCH_POLICIES_HPP_
