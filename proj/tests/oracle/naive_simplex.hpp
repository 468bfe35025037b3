// Test-only reference LP solver. Textbook two-phase tableau simplex with
// Bland's rule on the standard form min c^T y, [A I] [y; s] = b, y, s >= 0.
// Deliberately shares no code with the library solver.
#ifndef EVOBRANCH_TESTS_NAIVE_SIMPLEX_HPP_
#define EVOBRANCH_TESTS_NAIVE_SIMPLEX_HPP_

#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

enum class Status { kOptimal, kInfeasible, kUnbounded };

struct Solution {
  Status status = Status::kInfeasible;
  double objective = 0.0;
  std::vector<double> x;
};

// min c^T x  s.t. A x <= b, lo <= x <= hi, lo finite.
inline Solution naive_simplex(const std::vector<double>& c, const std::vector<std::vector<double>>& a,
                              const std::vector<double>& b, const std::vector<double>& lo,
                              const std::vector<double>& hi) {
  const double inf = std::numeric_limits<double>::infinity();
  const int n = static_cast<int>(c.size());
  for (int j = 0; j < n; ++j) {
    if (lo[j] > hi[j]) return {};
  }
  // Rows of the shifted problem: original rows then upper-bound rows.
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double shift = 0.0;
    for (int j = 0; j < n; ++j) shift += a[i][j] * lo[j];
    rows.push_back(a[i]);
    rhs.push_back(b[i] - shift);
  }
  for (int j = 0; j < n; ++j) {
    if (hi[j] == inf) continue;
    std::vector<double> r(n, 0.0);
    r[j] = 1.0;
    rows.push_back(r);
    rhs.push_back(hi[j] - lo[j]);
  }
  const int m = static_cast<int>(rows.size());
  // Columns: y (n), slack (m), artificial (m). Last column is the rhs.
  const int width = n + 2 * m + 1;
  std::vector<std::vector<double>> t(m, std::vector<double>(width, 0.0));
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) {
    const double sign = rhs[i] < 0 ? -1.0 : 1.0;
    for (int j = 0; j < n; ++j) t[i][j] = sign * rows[i][j];
    t[i][n + i] = sign;
    t[i][n + m + i] = 1.0;
    t[i][width - 1] = sign * rhs[i];
    basis[i] = n + m + i;
  }

  auto run = [&](const std::vector<double>& cost, int allowed) -> Status {
    while (true) {
      // Reduced costs.
      int enter = -1;
      for (int j = 0; j < allowed; ++j) {
        bool is_basic = false;
        for (int i = 0; i < m; ++i) is_basic = is_basic || basis[i] == j;
        if (is_basic) continue;
        double d = cost[j];
        for (int i = 0; i < m; ++i) d -= cost[basis[i]] * t[i][j];
        if (d < -1e-10) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return Status::kOptimal;
      int leave = -1;
      double best = inf;
      for (int i = 0; i < m; ++i) {
        if (t[i][enter] <= 1e-12) continue;
        const double ratio = t[i][width - 1] / t[i][enter];
        if (ratio < best - 1e-13 || (std::abs(ratio - best) <= 1e-13 && basis[i] < basis[leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave < 0) return Status::kUnbounded;
      const double p = t[leave][enter];
      for (double& v : t[leave]) v /= p;
      for (int i = 0; i < m; ++i) {
        if (i == leave) continue;
        const double f = t[i][enter];
        if (f == 0.0) continue;
        for (int j = 0; j < width; ++j) t[i][j] -= f * t[leave][j];
      }
      basis[leave] = enter;
    }
  };

  std::vector<double> phase1(n + 2 * m, 0.0);
  for (int i = 0; i < m; ++i) phase1[n + m + i] = 1.0;
  run(phase1, n + 2 * m);
  double infeasibility = 0.0;
  for (int i = 0; i < m; ++i) {
    if (basis[i] >= n + m) infeasibility += t[i][width - 1];
  }
  if (infeasibility > 1e-7) return {};
  // Pivot remaining zero-level artificials out where possible.
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n + m) continue;
    for (int j = 0; j < n + m; ++j) {
      if (std::abs(t[i][j]) > 1e-9) {
        const double p = t[i][j];
        for (double& v : t[i]) v /= p;
        for (int k = 0; k < m; ++k) {
          if (k == i) continue;
          const double f = t[k][j];
          if (f == 0.0) continue;
          for (int col = 0; col < width; ++col) t[k][col] -= f * t[i][col];
        }
        basis[i] = j;
        break;
      }
    }
  }
  std::vector<double> phase2(n + 2 * m, 0.0);
  for (int j = 0; j < n; ++j) phase2[j] = c[j];
  // Artificials are excluded from entering in phase two.
  const Status status = run(phase2, n + m);
  Solution solution;
  solution.status = status;
  if (status != Status::kOptimal) return solution;
  solution.x = lo;
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n) solution.x[basis[i]] += t[i][width - 1];
  }
  for (int j = 0; j < n; ++j) solution.objective += c[j] * solution.x[j];
  return solution;
}

}  // namespace oracle

#endif  // EVOBRANCH_TESTS_NAIVE_SIMPLEX_HPP_
