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

#include "evobranch/bnb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace evobranch {

void BnbConfig::validate() const {
  if (node_limit < 1) throw std::invalid_argument("node_limit must be >= 1");
  if (!(time_limit > 0.0)) throw std::invalid_argument("time_limit must be > 0");
  if (!(integrality_tolerance > 0.0 && integrality_tolerance < 0.5)) {
    throw std::invalid_argument("integrality_tolerance must lie in (0, 0.5)");
  }
}

std::string_view to_string(BnbStatus status) {
  switch (status) {
    case BnbStatus::kOptimal: return "optimal";
    case BnbStatus::kNodeLimit: return "node_limit";
    case BnbStatus::kTimeLimit: return "time_limit";
    case BnbStatus::kInfeasible: return "infeasible";
  }
  return "unknown";
}

double compute_gap(std::optional<double> incumbent, double bound) {
  if (!incumbent) return 1.0;
  if (!std::isfinite(bound)) return 1.0;
  const double gap = std::abs(*incumbent - bound) / std::max(std::abs(*incumbent), 1e-10);
  return std::clamp(gap, 0.0, 1.0);
}

SearchState::SearchState(int num_vars) : last_basic_(num_vars, 0), solution_sum_(num_vars, 0.0) {
  for (int d = 0; d < 2; ++d) {
    pc_sum_[d].assign(num_vars, 0.0);
    pc_count_[d].assign(num_vars, 0);
    cutoff_[d].assign(num_vars, 0);
    attempts_[d].assign(num_vars, 0);
  }
}

double SearchState::pseudocost(int var, Direction dir) const {
  const long count = pc_count_[idx(dir)][var];
  return count == 0 ? 0.0 : pc_sum_[idx(dir)][var] / static_cast<double>(count);
}

double SearchState::scaled_age(int var) const {
  if (total_lp_iterations_ <= 0) return 0.0;
  return static_cast<double>(total_lp_iterations_ - last_basic_[var]) /
         static_cast<double>(total_lp_iterations_);
}

double SearchState::historical_average(int var) const {
  return solutions_found_ == 0 ? 0.0 : solution_sum_[var] / static_cast<double>(solutions_found_);
}

void SearchState::record_gain(int var, Direction dir, double per_unit_gain) {
  if (!std::isfinite(per_unit_gain)) return;
  pc_sum_[idx(dir)][var] += per_unit_gain;
  pc_count_[idx(dir)][var] += 1;
}

void SearchState::record_cutoff(int var, Direction dir) { cutoff_[idx(dir)][var] += 1; }

void SearchState::record_attempt(int var, Direction dir) { attempts_[idx(dir)][var] += 1; }

void SearchState::record_lp(const LpResult& lp) {
  total_lp_iterations_ += lp.iterations;
  for (std::size_t j = 0; j < lp.basis.size() && j < last_basic_.size(); ++j) {
    if (lp.basis[j] == BasisStatus::kBasic) last_basic_[j] = total_lp_iterations_;
  }
}

void SearchState::record_solution(const std::vector<double>& x) {
  incumbent_ = x;
  for (std::size_t j = 0; j < x.size() && j < solution_sum_.size(); ++j) solution_sum_[j] += x[j];
  ++solutions_found_;
}

void update_search_state(SearchState& state, int var, Direction dir, const LpResult& child,
                         double parent_objective, double fractionality, bool cut_off) {
  state.record_attempt(var, dir);
  if (child.status == LpStatus::kInfeasible) {
    state.record_cutoff(var, dir);
    return;
  }
  if (child.status != LpStatus::kOptimal) return;
  const double step = dir == Direction::kDown ? fractionality : 1.0 - fractionality;
  if (step > 0.0) {
    const double gain = std::max(child.objective - parent_objective, 0.0);
    state.record_gain(var, dir, gain / step);
  }
  if (cut_off) state.record_cutoff(var, dir);
}

std::vector<int> candidate_set(const LpResult& lp, const MilpInstance& instance, double tol) {
  if (!lp.optimal()) throw ContractViolation("candidate_set requires an optimal LP");
  std::vector<int> out;
  for (int j = 0; j < instance.num_vars(); ++j) {
    if (!instance.is_integer[j]) continue;
    const double frac = lp.x[j] - std::floor(lp.x[j]);
    if (std::min(frac, 1.0 - frac) > tol) out.push_back(j);
  }
  return out;
}

std::pair<Bounds, Bounds> branch(const Bounds& parent, int var, double x_value, double tol) {
  const double frac = x_value - std::floor(x_value);
  if (!std::isfinite(x_value) || std::min(frac, 1.0 - frac) <= tol) {
    throw ContractViolation("branch requires a fractional value");
  }
  Bounds down = parent;
  Bounds up = parent;
  down.upper[var] = std::floor(x_value);
  up.lower[var] = std::ceil(x_value);
  return {std::move(down), std::move(up)};
}

namespace {

struct BoundChange {
  int var;
  double lo;
  double hi;
};

struct OpenNode {
  long id = 0;
  double key = 0.0;  // lower bound inherited from the parent LP
  int depth = 0;
  std::vector<BoundChange> changes;
  int branch_var = -1;
  Direction dir = Direction::kDown;
  double parent_objective = 0.0;
  double parent_fraction = 0.0;
};

struct BestFirst {
  bool operator()(const OpenNode& a, const OpenNode& b) const {
    if (a.key != b.key) return a.key > b.key;
    return a.id > b.id;
  }
};

class Frontier {
 public:
  explicit Frontier(NodeSelection selection) : selection_(selection) {}

  bool empty() const { return selection_ == NodeSelection::kBestBound ? heap_.empty() : stack_.empty(); }

  void push(OpenNode node) {
    if (selection_ == NodeSelection::kBestBound) {
      heap_.push(std::move(node));
    } else {
      stack_.push_back(std::move(node));
    }
  }

  OpenNode pop() {
    if (selection_ == NodeSelection::kBestBound) {
      OpenNode node = heap_.top();
      heap_.pop();
      return node;
    }
    OpenNode node = std::move(stack_.back());
    stack_.pop_back();
    return node;
  }

  double min_key() const {
    if (selection_ == NodeSelection::kBestBound) return heap_.empty() ? kInf : heap_.top().key;
    double best = kInf;
    for (const auto& n : stack_) best = std::min(best, n.key);
    return best;
  }

 private:
  NodeSelection selection_;
  std::priority_queue<OpenNode, std::vector<OpenNode>, BestFirst> heap_;
  std::vector<OpenNode> stack_;
};

}  // namespace

BnbStats run_bnb(const MilpInstance& instance, BranchingPolicy& policy, const BnbConfig& config) {
  config.validate();
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  const int n = instance.num_vars();
  BnbStats stats;
  SearchState state(n);
  policy.begin_solve(instance, config.rng_seed);

  const Bounds root_bounds = Bounds::from(instance);
  Frontier frontier(config.node_selection);
  {
    OpenNode root;
    root.key = -kInf;
    frontier.push(std::move(root));
  }
  long next_id = 1;
  long processed = 0;
  std::optional<double> incumbent;
  bool limit_hit = false;

  Bounds bounds = root_bounds;
  while (!frontier.empty()) {
    if (processed > 0 && processed - 1 >= config.node_limit) {
      stats.status = BnbStatus::kNodeLimit;
      limit_hit = true;
      break;
    }
    if (elapsed() >= config.time_limit) {
      stats.status = BnbStatus::kTimeLimit;
      limit_hit = true;
      break;
    }
    const double global_bound = frontier.min_key();
    OpenNode node = frontier.pop();
    if (incumbent && node.key >= *incumbent - kPruneTolerance) continue;

    bounds.lower = root_bounds.lower;
    bounds.upper = root_bounds.upper;
    for (const auto& c : node.changes) {
      bounds.lower[c.var] = c.lo;
      bounds.upper[c.var] = c.hi;
    }
    const LpResult lp = solve_lp_relaxation(instance, bounds, config.lp);
    ++processed;
    stats.lp_iterations += lp.iterations;

    if (lp.status == LpStatus::kUnbounded) {
      throw std::runtime_error("LP relaxation is unbounded; bounded relaxations are required");
    }
    if (lp.status == LpStatus::kNumericFailure || lp.status == LpStatus::kIterationLimit) {
      ++stats.numeric_failures;
    }
    const bool solved = lp.optimal();
    const bool cut_off = solved && incumbent && lp.objective >= *incumbent - kPruneTolerance;
    if (node.branch_var >= 0) {
      update_search_state(state, node.branch_var, node.dir, lp, node.parent_objective, node.parent_fraction,
                          cut_off);
    }
    if (config.record_trace) {
      TraceEntry entry;
      entry.node_id = node.id;
      entry.parent_objective = node.branch_var >= 0 ? node.parent_objective : (solved ? lp.objective : kInf);
      entry.lp_objective = solved ? lp.objective : kInf;
      entry.global_bound = incumbent ? std::min(global_bound, *incumbent) : global_bound;
      entry.incumbent = incumbent;
      stats.trace.push_back(entry);
    }
    if (!solved || cut_off) {
      state.record_lp(lp);
      continue;
    }

    const std::vector<int> candidates = candidate_set(lp, instance, config.integrality_tolerance);
    if (candidates.empty()) {
      incumbent = lp.objective;
      std::vector<double> x = lp.x;
      for (int j = 0; j < n; ++j) {
        if (instance.is_integer[j]) x[j] = std::round(x[j]);
      }
      stats.incumbent = x;
      state.record_solution(x);
      state.record_lp(lp);
      continue;
    }

    NodeContext ctx{instance, bounds, lp, state, node.id, node.depth, incumbent};
    const int var = policy.select(ctx, candidates, state);
    if (!std::binary_search(candidates.begin(), candidates.end(), var)) {
      throw ContractViolation("policy '" + policy.name() + "' selected a non-candidate variable");
    }
    state.record_lp(lp);

    const double value = lp.x[var];
    const double fraction = value - std::floor(value);
    const double child_key = std::max(node.key, lp.objective);
    OpenNode down;
    down.id = next_id++;
    down.key = child_key;
    down.depth = node.depth + 1;
    down.changes = node.changes;
    down.changes.push_back({var, bounds.lower[var], std::floor(value)});
    down.branch_var = var;
    down.dir = Direction::kDown;
    down.parent_objective = lp.objective;
    down.parent_fraction = fraction;
    OpenNode up = down;
    up.id = next_id++;
    up.changes.back() = {var, std::ceil(value), bounds.upper[var]};
    up.dir = Direction::kUp;
    if (config.node_selection == NodeSelection::kDepthFirst) {
      frontier.push(std::move(up));
      frontier.push(std::move(down));
    } else {
      frontier.push(std::move(down));
      frontier.push(std::move(up));
    }
  }

  stats.nodes = std::max(processed - 1, 0L);
  stats.incumbent_objective = incumbent;
  if (limit_hit) {
    const double open = frontier.min_key();
    stats.best_bound = incumbent ? std::min(open, *incumbent) : open;
    stats.gap = compute_gap(incumbent, stats.best_bound);
  } else if (incumbent) {
    stats.status = BnbStatus::kOptimal;
    stats.best_bound = *incumbent;
    stats.gap = 0.0;
  } else {
    stats.status = BnbStatus::kInfeasible;
    stats.best_bound = kInf;
    stats.gap = 1.0;
  }
  stats.wall_time = elapsed();
  return stats;
}

}  // namespace evobranch
