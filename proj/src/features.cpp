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

#include "evobranch/features.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace evobranch {

namespace {

constexpr double kBoundTol = 1e-9;
constexpr double kDegenerateRange = 1e-12;

void put_stats(double* out, const Stats& s, bool with_count, bool with_sum) {
  int k = 0;
  if (with_count) out[k++] = s.count;
  if (with_sum) out[k++] = s.sum;
  out[k++] = s.mean;
  out[k++] = s.std;
  out[k++] = s.min;
  out[k++] = s.max;
}

struct MinMax {
  bool any = false;
  double min = 0.0;
  double max = 0.0;
  void add(double v) {
    if (!any) {
      min = max = v;
      any = true;
    } else {
      min = std::min(min, v);
      max = std::max(max, v);
    }
  }
};

}  // namespace

Stats summarize(std::span<const double> values) {
  Stats s;
  if (values.empty()) return s;
  s.count = static_cast<double>(values.size());
  s.min = values[0];
  s.max = values[0];
  for (double v : values) {
    s.sum += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean = s.sum / s.count;
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(var / s.count);
  return s;
}

StaticFeatureCache precompute_static(const MilpInstance& instance) {
  const int n = instance.num_vars();
  const int m = instance.num_cons();
  StaticFeatureCache cache;
  cache.columns.resize(n);
  cache.row_nnz.assign(m, 0.0);
  cache.row_abs_sum.assign(m, 0.0);
  cache.row_pos_sum.assign(m, 0.0);
  cache.row_neg_abs_sum.assign(m, 0.0);
  cache.rhs.resize(m);
  cache.column_norm.assign(n, 0.0);
  for (int j = 0; j < m; ++j) {
    const Constraint& row = instance.rows[j];
    cache.rhs[j] = row.rhs;
    for (const Term& t : row.terms) {
      if (t.coef == 0.0) continue;
      cache.columns[t.var].push_back({j, t.coef});
      cache.row_nnz[j] += 1.0;
      cache.row_abs_sum[j] += std::abs(t.coef);
      if (t.coef > 0.0) {
        cache.row_pos_sum[j] += t.coef;
      } else {
        cache.row_neg_abs_sum[j] -= t.coef;
      }
      cache.column_norm[t.var] += t.coef * t.coef;
    }
  }
  cache.per_var.resize(n);
  std::vector<double> degree, pos, neg;
  for (int i = 0; i < n; ++i) {
    cache.column_norm[i] = std::sqrt(cache.column_norm[i]);
    degree.clear();
    pos.clear();
    neg.clear();
    for (const auto& e : cache.columns[i]) {
      degree.push_back(cache.row_nnz[e.row]);
      (e.coef > 0.0 ? pos : neg).push_back(e.coef);
    }
    std::vector<double>& f = cache.per_var[i];
    f.assign(18, 0.0);
    const double c = instance.objective[i];
    f[0] = c;
    f[1] = std::max(c, 0.0);
    f[2] = std::max(-c, 0.0);
    f[3] = static_cast<double>(cache.columns[i].size());
    put_stats(&f[4], summarize(degree), false, false);
    const Stats p = summarize(pos);
    f[8] = p.count;
    put_stats(&f[9], p, false, false);
    const Stats q = summarize(neg);
    f[13] = q.count;
    put_stats(&f[14], q, false, false);
  }
  return cache;
}

FeatureMatrix extract_features(const NodeContext& ctx, const StaticFeatureCache& cache,
                               std::span<const int> candidates) {
  if (!ctx.lp.optimal()) throw ContractViolation("extract_features requires an optimal LP");
  const MilpInstance& inst = ctx.instance;
  const LpResult& lp = ctx.lp;
  const SearchState& state = ctx.state;
  const int m = inst.num_cons();
  if (static_cast<int>(lp.x.size()) != inst.num_vars() || static_cast<int>(lp.row_slack.size()) != m ||
      static_cast<int>(cache.columns.size()) != inst.num_vars()) {
    throw ContractViolation("extract_features: dimension mismatch");
  }

  std::vector<char> active(m);
  for (int j = 0; j < m; ++j) active[j] = lp.row_slack[j] <= kActiveSlack;
  std::vector<double> cand_abs_sum(m, 0.0);
  for (int var : candidates) {
    for (const auto& e : cache.columns[var]) cand_abs_sum[e.row] += std::abs(e.coef);
  }

  FeatureMatrix out;
  out.rows = static_cast<int>(candidates.size());
  out.candidates.assign(candidates.begin(), candidates.end());
  out.values.assign(static_cast<std::size_t>(out.rows) * kNumFeatures, 0.0);

  std::vector<double> dyn_degree;
  std::vector<double> weighted[4];
  for (int r = 0; r < out.rows; ++r) {
    const int i = candidates[r];
    double* f = out.values.data() + static_cast<std::size_t>(r) * kNumFeatures;
    const double lo = ctx.bounds.lower[i];
    const double hi = ctx.bounds.upper[i];
    const double x = lp.x[i];
    const double frac = x - std::floor(x);
    const bool integer = inst.is_integer[i] != 0;
    const bool binary = integer && inst.lower[i] == 0.0 && inst.upper[i] == 1.0;

    f[0] = inst.objective[i];
    f[1] = binary ? 1.0 : 0.0;
    f[2] = integer && !binary ? 1.0 : 0.0;
    f[3] = 0.0;
    f[4] = integer ? 0.0 : 1.0;
    f[5] = std::isfinite(lo) ? 1.0 : 0.0;
    f[6] = std::isfinite(hi) ? 1.0 : 0.0;
    f[7] = lp.reduced_costs[i] / (cache.column_norm[i] + kFeatureEps);
    f[8] = x;
    f[9] = frac;
    f[10] = std::isfinite(lo) && std::abs(x - lo) <= kBoundTol ? 1.0 : 0.0;
    f[11] = std::isfinite(hi) && std::abs(x - hi) <= kBoundTol ? 1.0 : 0.0;
    f[12] = state.scaled_age(i);
    f[13] = state.has_incumbent() ? state.incumbent()[i] : 0.0;
    f[14] = state.historical_average(i);
    switch (lp.basis[i]) {
      case BasisStatus::kLower: f[15] = 1.0; break;
      case BasisStatus::kBasic: f[16] = 1.0; break;
      case BasisStatus::kUpper: f[17] = 1.0; break;
      case BasisStatus::kZero: f[18] = 1.0; break;
    }

    std::copy(cache.per_var[i].begin(), cache.per_var[i].end(), f + 19);
    f[37] = frac;
    f[38] = 1.0 - frac;

    const double up = state.pseudocost(i, Direction::kUp);
    const double down = state.pseudocost(i, Direction::kDown);
    f[39] = up;
    f[40] = down;
    f[41] = up / (down + kFeatureEps);
    f[42] = up + down;
    f[43] = up * down;
    const double cut_up = static_cast<double>(state.cutoffs(i, Direction::kUp));
    const double cut_down = static_cast<double>(state.cutoffs(i, Direction::kDown));
    f[44] = cut_up;
    f[45] = cut_down;
    f[46] = cut_up / (static_cast<double>(state.attempts(i, Direction::kUp)) + kFeatureEps);
    f[47] = cut_down / (static_cast<double>(state.attempts(i, Direction::kDown)) + kFeatureEps);

    dyn_degree.clear();
    for (auto& w : weighted) w.clear();
    MinMax rhs_pos, rhs_neg, pos_pos, pos_neg, neg_pos, neg_neg;
    for (const auto& e : cache.columns[i]) {
      const int j = e.row;
      const double a = e.coef;
      const double b = cache.rhs[j];
      if (b > 0.0) rhs_pos.add(a / (std::abs(b) + kFeatureEps));
      if (b < 0.0) rhs_neg.add(a / (std::abs(b) + kFeatureEps));
      if (a > 0.0) {
        pos_pos.add(a / (cache.row_pos_sum[j] + kFeatureEps));
        pos_neg.add(a / (cache.row_neg_abs_sum[j] + kFeatureEps));
      } else {
        neg_pos.add(-a / (cache.row_pos_sum[j] + kFeatureEps));
        neg_neg.add(-a / (cache.row_neg_abs_sum[j] + kFeatureEps));
      }
      if (!active[j]) continue;
      dyn_degree.push_back(cache.row_nnz[j]);
      weighted[0].push_back(a);
      weighted[1].push_back(a / (cache.row_abs_sum[j] + kFeatureEps));
      weighted[2].push_back(a / (cand_abs_sum[j] + kFeatureEps));
      weighted[3].push_back(std::abs(lp.duals[j]) * a);
    }
    const Stats dyn = summarize(dyn_degree);
    put_stats(f + 48, dyn, false, false);
    f[52] = dyn.mean / (f[23] + kFeatureEps);
    f[53] = dyn.min / (f[25] + kFeatureEps);
    f[54] = dyn.max / (f[26] + kFeatureEps);

    const MinMax* ratio_groups[] = {&rhs_pos, &rhs_neg, &pos_pos, &pos_neg, &neg_pos, &neg_neg};
    for (int g = 0; g < 6; ++g) {
      f[55 + 2 * g] = ratio_groups[g]->min;
      f[56 + 2 * g] = ratio_groups[g]->max;
    }
    for (int s = 0; s < 4; ++s) put_stats(f + 67 + 6 * s, summarize(weighted[s]), true, true);
  }
  return out;
}

FeatureMatrix normalize_per_node(const FeatureMatrix& m) {
  FeatureMatrix out = m;
  for (int c = 0; c < kNumFeatures; ++c) {
    double lo = kInf;
    double hi = -kInf;
    for (int r = 0; r < m.rows; ++r) {
      lo = std::min(lo, m.at(r, c));
      hi = std::max(hi, m.at(r, c));
    }
    const double range = hi - lo;
    for (int r = 0; r < m.rows; ++r) {
      out.at(r, c) = range > kDegenerateRange ? std::clamp((m.at(r, c) - lo) / range, 0.0, 1.0) : 0.0;
    }
  }
  out.normalized = true;
  return out;
}

const std::vector<FeatureDoc>& feature_docs() {
  static const std::vector<FeatureDoc> docs = [] {
    std::vector<FeatureDoc> d = {
        {0, "variable", "objective coefficient", "c_i"},
        {1, "variable", "type: binary", "integer with global bounds [0,1]"},
        {2, "variable", "type: integer", "integer, not binary"},
        {3, "variable", "type: implicit integer", "always 0"},
        {4, "variable", "type: continuous", "not integer"},
        {5, "variable", "has lower bound", "local lower bound finite"},
        {6, "variable", "has upper bound", "local upper bound finite"},
        {7, "variable", "normalized reduced cost", "d_i / (||A_col_i||_2 + eps)"},
        {8, "variable", "LP value", "x_i"},
        {9, "variable", "LP fractional part", "x_i - floor(x_i)"},
        {10, "variable", "at lower bound", "|x_i - l_i| <= 1e-9"},
        {11, "variable", "at upper bound", "|x_i - u_i| <= 1e-9"},
        {12, "variable", "scaled age", "(iters - last basic iter) / iters; 0 before any iteration"},
        {13, "variable", "incumbent value", "x_i in incumbent; 0 without one"},
        {14, "variable", "average incumbent value", "mean of x_i over all incumbents found"},
        {15, "variable", "basis: at lower", "nonbasic at lower bound"},
        {16, "variable", "basis: basic", "basic"},
        {17, "variable", "basis: at upper", "nonbasic at upper bound"},
        {18, "variable", "basis: zero", "free nonbasic at 0"},
        {19, "objective", "objective raw", "c_i"},
        {20, "objective", "objective positive part", "max(c_i, 0)"},
        {21, "objective", "objective negative part", "max(-c_i, 0)"},
        {22, "static", "constraint count", "rows with a_ji != 0"},
    };
    const char* stat4[] = {"mean", "std", "min", "max"};
    for (int k = 0; k < 4; ++k) {
      d.push_back({23 + k, "static", std::string("degree ") + stat4[k], "row nnz over rows containing the variable"});
    }
    const char* stat5[] = {"count", "mean", "std", "min", "max"};
    for (int k = 0; k < 5; ++k) {
      d.push_back({27 + k, "static", std::string("positive coef ") + stat5[k], "over a_ji > 0 in the column"});
    }
    for (int k = 0; k < 5; ++k) {
      d.push_back({32 + k, "static", std::string("negative coef ") + stat5[k], "over a_ji < 0 in the column, signed"});
    }
    d.push_back({37, "slack", "fractional distance", "x_i - floor(x_i)"});
    d.push_back({38, "slack", "ceiling distance", "ceil-side distance 1 - frac"});
    d.push_back({39, "pseudocost", "pseudocost up", "mean per-unit gain, up branch; 0 if none"});
    d.push_back({40, "pseudocost", "pseudocost down", "mean per-unit gain, down branch; 0 if none"});
    d.push_back({41, "pseudocost", "pseudocost ratio", "up / (down + eps)"});
    d.push_back({42, "pseudocost", "pseudocost sum", "up + down"});
    d.push_back({43, "pseudocost", "pseudocost product", "up * down"});
    d.push_back({44, "cutoff", "cutoffs up", "up children infeasible or pruned"});
    d.push_back({45, "cutoff", "cutoffs down", "down children infeasible or pruned"});
    d.push_back({46, "cutoff", "cutoff ratio up", "cutoffs up / (up children + eps)"});
    d.push_back({47, "cutoff", "cutoff ratio down", "cutoffs down / (down children + eps)"});
    for (int k = 0; k < 4; ++k) {
      d.push_back({48 + k, "dynamic", std::string("active degree ") + stat4[k], "row nnz over active rows containing the variable"});
    }
    d.push_back({52, "dynamic", "degree ratio mean", "f48 / (f23 + eps)"});
    d.push_back({53, "dynamic", "degree ratio min", "f50 / (f25 + eps)"});
    d.push_back({54, "dynamic", "degree ratio max", "f51 / (f26 + eps)"});
    const char* ratio_names[] = {
        "coef/rhs, rhs>0",          "coef/rhs, rhs<0",          "pos coef / row pos sum",
        "pos coef / row |neg| sum", "|neg coef| / row pos sum", "|neg coef| / row |neg| sum"};
    const char* ratio_formulas[] = {
        "a_ji / (|b_j| + eps) over rows with b_j > 0",
        "a_ji / (|b_j| + eps) over rows with b_j < 0",
        "a_ji / (sum_k max(a_jk,0) + eps) over rows with a_ji > 0",
        "a_ji / (sum_k max(-a_jk,0) + eps) over rows with a_ji > 0",
        "|a_ji| / (sum_k max(a_jk,0) + eps) over rows with a_ji < 0",
        "|a_ji| / (sum_k max(-a_jk,0) + eps) over rows with a_ji < 0"};
    for (int g = 0; g < 6; ++g) {
      d.push_back({55 + 2 * g, "ratio", std::string(ratio_names[g]) + " min", ratio_formulas[g]});
      d.push_back({56 + 2 * g, "ratio", std::string(ratio_names[g]) + " max", ratio_formulas[g]});
    }
    const char* schemes[] = {"unit", "1/sum_all", "1/sum_candidate", "dual"};
    const char* stat6[] = {"count", "sum", "mean", "std", "min", "max"};
    const char* scheme_formulas[] = {
        "a_ji over active rows containing the variable",
        "a_ji / (sum_k |a_jk| + eps) over active rows",
        "a_ji / (sum over candidates k of |a_jk| + eps) over active rows",
        "|dual_j| * a_ji over active rows"};
    for (int s = 0; s < 4; ++s) {
      for (int k = 0; k < 6; ++k) {
        d.push_back({67 + 6 * s + k, "active", std::string(schemes[s]) + " " + stat6[k], scheme_formulas[s]});
      }
    }
    return d;
  }();
  return docs;
}

std::string format_feature_table() {
  std::string out = "index | group | name | formula\n";
  for (const FeatureDoc& d : feature_docs()) {
    out += fmt::format("{} | {} | {} | {}\n", d.index, d.group, d.name, d.formula);
  }
  out += "\nActive rows have slack <= 1e-7 at the node LP. Statistics over an empty set are 0,\n"
         "std is the population std, eps = 1e-8.\n";
  return out;
}

}  // namespace evobranch
