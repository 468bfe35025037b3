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

#include "evobranch/policies.hpp"

#include <cmath>
#include <limits>

#include "evobranch/rng.hpp"

namespace evobranch {

namespace {

constexpr double kScoreEps = 1e-6;
// Stand-in gain for an infeasible child; large but finite so that products
// still rank candidates with one infeasible side by the other side.
constexpr double kInfeasibleGain = 1e10;

double fractional_part(double v) { return v - std::floor(v); }

}  // namespace

int select_branch_variable(std::span<const double> scores, std::span<const int> candidates) {
  if (candidates.empty() || scores.size() != candidates.size()) {
    throw ContractViolation("select_branch_variable needs equal-length nonempty inputs");
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < scores.size(); ++k) {
    if (scores[k] > scores[best] || (std::isnan(scores[best]) && !std::isnan(scores[k]))) best = k;
  }
  return candidates[best];
}

int ScoringPolicy::select(const NodeContext& ctx, std::span<const int> candidates, SearchState& state) {
  const std::vector<double> s = scores(ctx, candidates, state);
  return select_branch_variable(s, candidates);
}

void RandomPolicy::begin_solve(const MilpInstance& /*instance*/, std::uint64_t seed) { seed_ = seed; }

std::vector<double> RandomPolicy::scores(const NodeContext& ctx, std::span<const int> candidates,
                                         SearchState& /*state*/) {
  std::vector<double> out;
  out.reserve(candidates.size());
  for (int var : candidates) {
    out.push_back(counter_uniform(seed_, static_cast<std::uint64_t>(ctx.node_id), static_cast<std::uint64_t>(var)));
  }
  return out;
}

std::vector<double> MostFractionalPolicy::scores(const NodeContext& ctx, std::span<const int> candidates,
                                                 SearchState& /*state*/) {
  std::vector<double> out;
  out.reserve(candidates.size());
  for (int var : candidates) {
    const double f = fractional_part(ctx.lp.x[var]);
    out.push_back(std::min(f, 1.0 - f));
  }
  return out;
}

std::vector<double> PseudocostPolicy::scores(const NodeContext& ctx, std::span<const int> candidates,
                                             SearchState& state) {
  double mean[2] = {1.0, 1.0};
  for (Direction dir : {Direction::kDown, Direction::kUp}) {
    double sum = 0.0;
    long count = 0;
    for (int j = 0; j < state.num_vars(); ++j) {
      if (state.pseudocost_count(j, dir) > 0) {
        sum += state.pseudocost(j, dir);
        ++count;
      }
    }
    if (count > 0) mean[static_cast<int>(dir)] = sum / static_cast<double>(count);
  }
  auto pc = [&](int var, Direction dir) {
    return state.pseudocost_count(var, dir) > 0 ? state.pseudocost(var, dir) : mean[static_cast<int>(dir)];
  };
  std::vector<double> out;
  out.reserve(candidates.size());
  for (int var : candidates) {
    const double f = fractional_part(ctx.lp.x[var]);
    const double down = std::max(pc(var, Direction::kDown) * f, kScoreEps);
    const double up = std::max(pc(var, Direction::kUp) * (1.0 - f), kScoreEps);
    out.push_back(down * up);
  }
  return out;
}

std::vector<double> StrongBranchingPolicy::scores(const NodeContext& ctx, std::span<const int> candidates,
                                                  SearchState& state) {
  std::vector<double> out;
  out.reserve(candidates.size());
  const double parent = ctx.lp.objective;
  for (int var : candidates) {
    const double value = ctx.lp.x[var];
    const double f = fractional_part(value);
    double gain[2] = {0.0, 0.0};
    bool failed = false;
    for (Direction dir : {Direction::kDown, Direction::kUp}) {
      const double lo = dir == Direction::kDown ? ctx.bounds.lower[var] : std::ceil(value);
      const double hi = dir == Direction::kDown ? std::floor(value) : ctx.bounds.upper[var];
      LpResult child;
      if (ctx.lp.warm_start) {
        child = resolve_with_bounds(*ctx.lp.warm_start, var, lo, hi, options_.probe_iteration_cap);
      } else {
        Bounds b = ctx.bounds;
        b.lower[var] = lo;
        b.upper[var] = hi;
        child = solve_lp_relaxation(ctx.instance, b);
      }
      switch (child.status) {
        case LpStatus::kOptimal:
        case LpStatus::kIterationLimit:
          gain[static_cast<int>(dir)] = std::max(child.objective - parent, 0.0);
          break;
        case LpStatus::kInfeasible:
          gain[static_cast<int>(dir)] = kInfeasibleGain;
          break;
        default:
          failed = true;
          break;
      }
      if (child.status == LpStatus::kOptimal || child.status == LpStatus::kInfeasible) {
        update_search_state(state, var, dir, child, parent, f);
      }
    }
    out.push_back(failed ? -std::numeric_limits<double>::infinity()
                         : (gain[0] + kScoreEps) * (gain[1] + kScoreEps));
  }
  return out;
}

void HybridPseudocostPolicy::begin_solve(const MilpInstance& /*instance*/, std::uint64_t /*seed*/) { calls_ = 0; }

std::vector<double> HybridPseudocostPolicy::scores(const NodeContext& ctx, std::span<const int> candidates,
                                                   SearchState& state) {
  if (calls_++ < warmup_) return strong_.scores(ctx, candidates, state);
  return pseudocost_.scores(ctx, candidates, state);
}

std::unique_ptr<BranchingPolicy> make_builtin_policy(std::string_view name) {
  if (name == "random") return std::make_unique<RandomPolicy>();
  if (name == "most_fractional") return std::make_unique<MostFractionalPolicy>();
  if (name == "pseudocost" || name == "pseudocost_product") return std::make_unique<PseudocostPolicy>();
  if (name == "strong_branching" || name == "full_strong_branching") {
    return std::make_unique<StrongBranchingPolicy>();
  }
  if (name == "rpb") return std::make_unique<HybridPseudocostPolicy>();
  return nullptr;
}

}  // namespace evobranch
