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

#include "evobranch/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>

namespace evobranch {

std::string_view to_string(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
    case LpStatus::kNumericFailure: return "numeric_failure";
    case LpStatus::kIterationLimit: return "iteration_limit";
  }
  return "unknown";
}

namespace detail {

constexpr double kPrimalTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr double kPivotTol = 1e-11;
constexpr double kTieTol = 1e-12;
constexpr double kPhaseOneTol = 1e-7;
constexpr double kResidualTol = 1e-7;
constexpr int kDegenerateStreak = 50;

enum class VarState : std::uint8_t { kBasic, kAtLower, kAtUpper, kAtZero };

enum class Outcome { kOptimal, kUnbounded, kInfeasible, kNumericFailure, kIterationLimit };

// Dense tableau over columns [structural | slack | artificial]. Each row holds
// B^-1 times the corresponding row of `orig_`, and `beta_` the current values
// of the basic variables.
class Tableau {
 public:
  Tableau(const MilpInstance& instance, const Bounds& bounds)
      : instance_(&instance), bounds_(bounds), n_(instance.num_vars()), m_(instance.num_cons()) {
    std::vector<double> nb_value(n_);
    for (int j = 0; j < n_; ++j) {
      nb_value[j] = initial_value(bounds.lower[j], bounds.upper[j]);
    }
    std::vector<double> residual(m_);
    int artificials = 0;
    for (int i = 0; i < m_; ++i) {
      double activity = 0.0;
      for (const auto& t : instance.rows[i].terms) activity += t.coef * nb_value[t.var];
      residual[i] = instance.rows[i].rhs - activity;
      if (residual[i] < -kPrimalTol) ++artificials;
    }
    first_artificial_ = n_ + m_;
    cols_ = n_ + m_ + artificials;
    orig_.assign(static_cast<std::size_t>(m_) * cols_, 0.0);
    orig_rhs_.assign(m_, 0.0);
    lo_.assign(cols_, 0.0);
    hi_.assign(cols_, kInf);
    state_.assign(cols_, VarState::kAtLower);
    basis_.assign(m_, -1);
    row_of_.assign(cols_, -1);
    beta_.assign(m_, 0.0);
    for (int j = 0; j < n_; ++j) {
      lo_[j] = bounds.lower[j];
      hi_[j] = bounds.upper[j];
      state_[j] = initial_state(lo_[j], hi_[j]);
    }
    int next_art = first_artificial_;
    for (int i = 0; i < m_; ++i) {
      double* row = &orig_[static_cast<std::size_t>(i) * cols_];
      const bool needs_artificial = residual[i] < -kPrimalTol;
      const double sign = needs_artificial ? -1.0 : 1.0;
      for (const auto& t : instance.rows[i].terms) row[t.var] = sign * t.coef;
      row[n_ + i] = sign;
      orig_rhs_[i] = sign * instance.rows[i].rhs;
      if (needs_artificial) {
        row[next_art] = 1.0;
        set_basic(i, next_art);
        beta_[i] = -residual[i];
        ++next_art;
      } else {
        set_basic(i, n_ + i);
        beta_[i] = std::max(residual[i], 0.0);
      }
    }
    tab_ = orig_;
  }

  int num_structural() const { return n_; }
  bool has_artificials() const { return cols_ > first_artificial_; }

  Outcome solve(const LpOptions& options) {
    const long budget = options.max_iterations;
    if (has_artificials()) {
      std::vector<double> phase_one(cols_, 0.0);
      for (int j = first_artificial_; j < cols_; ++j) phase_one[j] = 1.0;
      const Outcome first = run_primal(phase_one, options.pricing, budget);
      if (first == Outcome::kIterationLimit || first == Outcome::kNumericFailure) return first;
      double infeasibility = 0.0;
      for (int i = 0; i < m_; ++i) {
        if (basis_[i] >= first_artificial_) infeasibility += std::abs(beta_[i]);
      }
      if (infeasibility > kPhaseOneTol) return Outcome::kInfeasible;
      drive_out_artificials();
    }
    return run_phase_two(options.pricing, budget);
  }

  // Applies a bound change then restores optimality by dual simplex. Returns
  // nullopt when the change breaks dual feasibility and a cold solve is needed.
  std::optional<Outcome> resolve(int var, double lo, double hi, long cap) {
    iterations_ = 0;
    bounds_.lower[var] = lo;
    bounds_.upper[var] = hi;
    if (lo > hi) return Outcome::kInfeasible;
    lo_[var] = lo;
    hi_[var] = hi;
    if (state_[var] != VarState::kBasic) {
      const double old_value = nonbasic_value(var);
      const bool keep = (state_[var] == VarState::kAtLower && std::isfinite(lo)) ||
                        (state_[var] == VarState::kAtUpper && std::isfinite(hi));
      if (!keep) state_[var] = initial_state(lo, hi);
      const double new_value = nonbasic_value(var);
      if (!dual_feasible(var)) return std::nullopt;
      const double delta = new_value - old_value;
      if (delta != 0.0) {
        for (int i = 0; i < m_; ++i) beta_[i] -= at(i, var) * delta;
      }
    }
    const Outcome dual = run_dual(cap);
    if (dual != Outcome::kOptimal) return dual;
    return run_phase_two(PricingRule::kDantzigWithBland, cap);
  }

  LpResult extract(Outcome outcome) const {
    LpResult result;
    result.iterations = iterations_;
    switch (outcome) {
      case Outcome::kOptimal: result.status = LpStatus::kOptimal; break;
      case Outcome::kUnbounded: result.status = LpStatus::kUnbounded; break;
      case Outcome::kInfeasible: result.status = LpStatus::kInfeasible; break;
      case Outcome::kNumericFailure: result.status = LpStatus::kNumericFailure; break;
      case Outcome::kIterationLimit: result.status = LpStatus::kIterationLimit; break;
    }
    if (outcome != Outcome::kOptimal && outcome != Outcome::kIterationLimit) return result;
    result.x.resize(n_);
    result.reduced_costs.resize(n_);
    result.basis.resize(n_);
    double objective = 0.0;
    for (int j = 0; j < n_; ++j) {
      result.x[j] = value_of(j);
      result.reduced_costs[j] = d_[j];
      objective += instance_->objective[j] * result.x[j];
      switch (state_[j]) {
        case VarState::kBasic: result.basis[j] = BasisStatus::kBasic; break;
        case VarState::kAtLower: result.basis[j] = BasisStatus::kLower; break;
        case VarState::kAtUpper: result.basis[j] = BasisStatus::kUpper; break;
        case VarState::kAtZero: result.basis[j] = BasisStatus::kZero; break;
      }
    }
    result.objective = objective;
    result.duals.resize(m_);
    result.row_slack.resize(m_);
    for (int i = 0; i < m_; ++i) {
      result.duals[i] = -d_[n_ + i];
      double activity = 0.0;
      for (const auto& t : instance_->rows[i].terms) activity += t.coef * result.x[t.var];
      result.row_slack[i] = instance_->rows[i].rhs - activity;
    }
    return result;
  }

  const MilpInstance& instance() const { return *instance_; }
  const Bounds& bounds() const { return bounds_; }

 private:
  static double initial_value(double lo, double hi) {
    if (std::isfinite(lo)) return lo;
    if (std::isfinite(hi)) return hi;
    return 0.0;
  }
  static VarState initial_state(double lo, double hi) {
    if (std::isfinite(lo)) return VarState::kAtLower;
    if (std::isfinite(hi)) return VarState::kAtUpper;
    return VarState::kAtZero;
  }

  double& at(int i, int j) { return tab_[static_cast<std::size_t>(i) * cols_ + j]; }
  double at(int i, int j) const { return tab_[static_cast<std::size_t>(i) * cols_ + j]; }

  void set_basic(int row, int col) {
    if (basis_[row] >= 0) row_of_[basis_[row]] = -1;
    basis_[row] = col;
    row_of_[col] = row;
    state_[col] = VarState::kBasic;
  }

  double nonbasic_value(int j) const {
    switch (state_[j]) {
      case VarState::kAtLower: return lo_[j];
      case VarState::kAtUpper: return hi_[j];
      default: return 0.0;
    }
  }
  double value_of(int j) const {
    return state_[j] == VarState::kBasic ? beta_[row_of_[j]] : nonbasic_value(j);
  }

  bool dual_feasible(int j) const {
    if (state_[j] == VarState::kBasic || lo_[j] == hi_[j]) return true;
    switch (state_[j]) {
      case VarState::kAtLower: return d_[j] >= -kDualTol;
      case VarState::kAtUpper: return d_[j] <= kDualTol;
      default: return std::abs(d_[j]) <= kDualTol;
    }
  }

  void compute_reduced_costs(const std::vector<double>& cost) {
    d_ = cost;
    for (int i = 0; i < m_; ++i) {
      const double cb = cost[basis_[i]];
      if (cb == 0.0) continue;
      const double* row = &tab_[static_cast<std::size_t>(i) * cols_];
      for (int j = 0; j < cols_; ++j) d_[j] -= cb * row[j];
    }
    for (int i = 0; i < m_; ++i) d_[basis_[i]] = 0.0;
  }

  void pivot(int r, int q) {
    double* prow = &tab_[static_cast<std::size_t>(r) * cols_];
    const double p = prow[q];
    nz_.clear();
    for (int j = 0; j < cols_; ++j) {
      if (prow[j] != 0.0) {
        prow[j] /= p;
        nz_.push_back(j);
      }
    }
    prow[q] = 1.0;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row = &tab_[static_cast<std::size_t>(i) * cols_];
      const double f = row[q];
      if (f == 0.0) continue;
      for (int j : nz_) row[j] -= f * prow[j];
      row[q] = 0.0;
    }
    const double fd = d_[q];
    if (fd != 0.0) {
      for (int j : nz_) d_[j] -= fd * prow[j];
    }
    d_[q] = 0.0;
    set_basic(r, q);
  }

  Outcome run_phase_two(PricingRule rule, long budget) {
    std::vector<double> cost(cols_, 0.0);
    for (int j = 0; j < n_; ++j) cost[j] = instance_->objective[j];
    for (int attempt = 0; attempt < 2; ++attempt) {
      const Outcome outcome = run_primal(cost, rule, budget);
      if (outcome != Outcome::kOptimal) return outcome;
      if (consistent()) return outcome;
      if (!reinvert()) return Outcome::kNumericFailure;
      compute_reduced_costs(cost);
      if (!primal_feasible()) return Outcome::kNumericFailure;
    }
    return consistent() ? Outcome::kOptimal : Outcome::kNumericFailure;
  }

  Outcome run_primal(const std::vector<double>& cost, PricingRule rule, long budget) {
    compute_reduced_costs(cost);
    bool bland = rule == PricingRule::kBland;
    int degenerate = 0;
    while (true) {
      if (iterations_ >= budget) return Outcome::kIterationLimit;
      int q = -1;
      int dir = 0;
      double best = 0.0;
      for (int j = 0; j < cols_; ++j) {
        const VarState s = state_[j];
        if (s == VarState::kBasic || lo_[j] == hi_[j]) continue;
        const double dj = d_[j];
        int jdir = 0;
        if (dj < -kDualTol && (s == VarState::kAtLower || s == VarState::kAtZero)) jdir = 1;
        if (dj > kDualTol && (s == VarState::kAtUpper || s == VarState::kAtZero)) jdir = -1;
        if (jdir == 0) continue;
        if (bland) {
          q = j;
          dir = jdir;
          break;
        }
        if (std::abs(dj) > best) {
          best = std::abs(dj);
          q = j;
          dir = jdir;
        }
      }
      if (q < 0) return Outcome::kOptimal;

      int leave = -1;
      double step = kInf;
      double leave_alpha = 0.0;
      bool saw_tiny = false;
      for (int i = 0; i < m_; ++i) {
        const double alpha = at(i, q);
        if (std::abs(alpha) <= kPivotTol) {
          if (alpha != 0.0) saw_tiny = true;
          continue;
        }
        const double rate = -alpha * dir;
        const int b = basis_[i];
        double limit;
        if (rate < 0.0) {
          if (!std::isfinite(lo_[b])) continue;
          limit = (beta_[i] - lo_[b]) / -rate;
        } else {
          if (!std::isfinite(hi_[b])) continue;
          limit = (hi_[b] - beta_[i]) / rate;
        }
        limit = std::max(limit, 0.0);
        bool take = false;
        if (leave < 0 || limit < step - kTieTol) {
          take = true;
        } else if (limit <= step + kTieTol) {
          take = bland ? b < basis_[leave] : std::abs(alpha) > std::abs(leave_alpha);
        }
        if (take) {
          leave = i;
          step = limit;
          leave_alpha = alpha;
        }
      }
      const double range = hi_[q] - lo_[q];
      const bool flip = std::isfinite(range) && (leave < 0 || range <= step + kTieTol);
      if (flip) step = range;
      if (!std::isfinite(step)) {
        return saw_tiny ? Outcome::kNumericFailure : Outcome::kUnbounded;
      }

      const double entering_value = nonbasic_value(q) + dir * step;
      if (step != 0.0) {
        for (int i = 0; i < m_; ++i) beta_[i] -= at(i, q) * dir * step;
      }
      if (flip) {
        state_[q] = dir > 0 ? VarState::kAtUpper : VarState::kAtLower;
      } else {
        const int b = basis_[leave];
        const double rate = -leave_alpha * dir;
        pivot(leave, q);
        state_[b] = rate < 0.0 ? VarState::kAtLower : VarState::kAtUpper;
        if (b >= first_artificial_) hi_[b] = 0.0;
        beta_[leave] = entering_value;
      }
      ++iterations_;
      if (step <= kTieTol) {
        ++degenerate;
      } else {
        degenerate = 0;
      }
      if (rule == PricingRule::kDantzigWithBland) bland = degenerate > kDegenerateStreak;
    }
  }

  Outcome run_dual(long budget) {
    while (true) {
      int r = -1;
      double worst = kPrimalTol;
      for (int i = 0; i < m_; ++i) {
        const int b = basis_[i];
        const double violation = std::max(lo_[b] - beta_[i], beta_[i] - hi_[b]);
        if (violation > worst) {
          worst = violation;
          r = i;
        }
      }
      if (r < 0) return Outcome::kOptimal;
      if (iterations_ >= budget) return Outcome::kIterationLimit;
      const int b = basis_[r];
      const bool raise = beta_[r] < lo_[b];
      int q = -1;
      double ratio = kInf;
      double q_alpha = 0.0;
      for (int j = 0; j < cols_; ++j) {
        const VarState s = state_[j];
        if (s == VarState::kBasic || lo_[j] == hi_[j]) continue;
        const double alpha = at(r, j);
        if (std::abs(alpha) <= kPivotTol) continue;
        // x_b moves by -alpha * dx_j.
        bool eligible;
        if (s == VarState::kAtLower) {
          eligible = raise ? alpha < 0.0 : alpha > 0.0;
        } else if (s == VarState::kAtUpper) {
          eligible = raise ? alpha > 0.0 : alpha < 0.0;
        } else {
          eligible = true;
        }
        if (!eligible) continue;
        const double candidate = std::abs(d_[j]) / std::abs(alpha);
        if (candidate < ratio - kTieTol ||
            (candidate <= ratio + kTieTol && std::abs(alpha) > std::abs(q_alpha))) {
          ratio = candidate;
          q = j;
          q_alpha = alpha;
        }
      }
      if (q < 0) return Outcome::kInfeasible;
      const double target = raise ? lo_[b] : hi_[b];
      const double dx = -(target - beta_[r]) / q_alpha;
      const double entering_value = nonbasic_value(q) + dx;
      for (int i = 0; i < m_; ++i) beta_[i] -= at(i, q) * dx;
      pivot(r, q);
      state_[b] = raise ? VarState::kAtLower : VarState::kAtUpper;
      beta_[r] = entering_value;
      ++iterations_;
    }
  }

  void drive_out_artificials() {
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < first_artificial_) continue;
      int q = -1;
      double best = 1e-7;
      for (int j = 0; j < first_artificial_; ++j) {
        if (state_[j] == VarState::kBasic) continue;
        if (std::abs(at(i, j)) > best) {
          best = std::abs(at(i, j));
          q = j;
        }
      }
      const int art = basis_[i];
      if (q < 0) {
        // Redundant row; the artificial stays basic, fixed at zero.
        hi_[art] = 0.0;
        continue;
      }
      // beta_[i] is zero up to tolerance, so the entering variable keeps its
      // current value.
      const double entering_value = nonbasic_value(q);
      pivot(i, q);
      state_[art] = VarState::kAtLower;
      hi_[art] = 0.0;
      beta_[i] = entering_value;
    }
    for (int j = first_artificial_; j < cols_; ++j) hi_[j] = 0.0;
  }

  // Internal consistency of the tableau: orig * values == orig_rhs.
  bool consistent() const {
    for (int i = 0; i < m_; ++i) {
      const double* row = &orig_[static_cast<std::size_t>(i) * cols_];
      double activity = 0.0;
      double scale = std::abs(orig_rhs_[i]);
      for (int j = 0; j < cols_; ++j) {
        if (row[j] == 0.0) continue;
        const double term = row[j] * value_of(j);
        activity += term;
        scale = std::max(scale, std::abs(term));
      }
      if (std::abs(activity - orig_rhs_[i]) > kResidualTol * (1.0 + scale)) return false;
    }
    return primal_feasible();
  }

  bool primal_feasible() const {
    for (int i = 0; i < m_; ++i) {
      const int b = basis_[i];
      if (beta_[i] < lo_[b] - kResidualTol || beta_[i] > hi_[b] + kResidualTol) return false;
    }
    return true;
  }

  // Rebuilds the tableau from the original rows for the current basis.
  bool reinvert() {
    tab_ = orig_;
    std::vector<double> rhs = orig_rhs_;
    std::vector<int> columns = basis_;
    std::vector<bool> used(m_, false);
    std::vector<int> new_basis(m_, -1);
    for (int col : columns) {
      int r = -1;
      double best = kPivotTol;
      for (int i = 0; i < m_; ++i) {
        if (used[i]) continue;
        if (std::abs(at(i, col)) > best) {
          best = std::abs(at(i, col));
          r = i;
        }
      }
      if (r < 0) return false;
      double* prow = &tab_[static_cast<std::size_t>(r) * cols_];
      const double p = prow[col];
      for (int j = 0; j < cols_; ++j) prow[j] /= p;
      rhs[r] /= p;
      for (int i = 0; i < m_; ++i) {
        if (i == r) continue;
        double* row = &tab_[static_cast<std::size_t>(i) * cols_];
        const double f = row[col];
        if (f == 0.0) continue;
        for (int j = 0; j < cols_; ++j) row[j] -= f * prow[j];
        rhs[i] -= f * rhs[r];
      }
      used[r] = true;
      new_basis[r] = col;
    }
    for (int i = 0; i < m_; ++i) {
      basis_[i] = new_basis[i];
      row_of_[new_basis[i]] = i;
    }
    for (int i = 0; i < m_; ++i) {
      double value = rhs[i];
      const double* row = &tab_[static_cast<std::size_t>(i) * cols_];
      for (int j = 0; j < cols_; ++j) {
        if (state_[j] == VarState::kBasic || row[j] == 0.0) continue;
        value -= row[j] * nonbasic_value(j);
      }
      beta_[i] = value;
    }
    return true;
  }

  const MilpInstance* instance_;
  Bounds bounds_;
  int n_ = 0;
  int m_ = 0;
  int cols_ = 0;
  int first_artificial_ = 0;
  std::vector<double> orig_;
  std::vector<double> orig_rhs_;
  std::vector<double> tab_;
  std::vector<double> beta_;
  std::vector<double> d_;
  std::vector<double> lo_;
  std::vector<double> hi_;
  std::vector<VarState> state_;
  std::vector<int> basis_;
  std::vector<int> row_of_;
  std::vector<int> nz_;
  long iterations_ = 0;
};

}  // namespace detail

class LpWarmStart {
 public:
  explicit LpWarmStart(detail::Tableau tableau) : tableau(std::move(tableau)) {}
  detail::Tableau tableau;
};

LpResult solve_lp_relaxation(const MilpInstance& instance, const Bounds& local_bounds,
                             const LpOptions& options) {
  const int n = instance.num_vars();
  if (static_cast<int>(local_bounds.lower.size()) != n ||
      static_cast<int>(local_bounds.upper.size()) != n || !local_bounds.consistent()) {
    throw ContractViolation("local bounds do not match the instance");
  }
  for (int j = 0; j < n; ++j) {
    if (local_bounds.lower[j] > local_bounds.upper[j]) {
      LpResult result;
      result.status = LpStatus::kInfeasible;
      return result;
    }
  }
  detail::Tableau tableau(instance, local_bounds);
  const detail::Outcome outcome = tableau.solve(options);
  LpResult result = tableau.extract(outcome);
  if (outcome == detail::Outcome::kOptimal) {
    result.warm_start = std::make_shared<const LpWarmStart>(std::move(tableau));
  }
  return result;
}

LpResult resolve_with_bounds(const LpWarmStart& start, int var, double lo, double hi,
                             long iteration_cap) {
  detail::Tableau tableau = start.tableau;
  if (var < 0 || var >= tableau.num_structural()) {
    throw ContractViolation("warm-start variable index out of range");
  }
  const auto outcome = tableau.resolve(var, lo, hi, iteration_cap);
  if (!outcome) {
    LpOptions options;
    options.max_iterations = iteration_cap;
    return solve_lp_relaxation(tableau.instance(), tableau.bounds(), options);
  }
  LpResult result = tableau.extract(*outcome);
  if (*outcome == detail::Outcome::kOptimal) {
    result.warm_start = std::make_shared<const LpWarmStart>(std::move(tableau));
  }
  return result;
}

}  // namespace evobranch
