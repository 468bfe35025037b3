// Seeded random LP / MILP models shared by unit and acceptance tests.
#ifndef EVOBRANCH_TESTS_RANDOM_MODELS_HPP_
#define EVOBRANCH_TESTS_RANDOM_MODELS_HPP_

#include <random>
#include <vector>

#include "evobranch/milp.hpp"
#include "oracle/naive_simplex.hpp"

namespace oracle {

struct DenseModel {
  std::vector<double> c;
  std::vector<std::vector<double>> a;
  std::vector<double> b;
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<bool> integer;
};

inline evobranch::MilpInstance to_instance(const DenseModel& model) {
  evobranch::MilpInstance inst;
  for (std::size_t j = 0; j < model.c.size(); ++j) {
    inst.add_var(model.c[j], model.lo[j], model.hi[j], !model.integer.empty() && model.integer[j]);
  }
  for (std::size_t i = 0; i < model.a.size(); ++i) {
    std::vector<evobranch::Term> terms;
    for (std::size_t j = 0; j < model.c.size(); ++j) {
      if (model.a[i][j] != 0.0) terms.push_back({static_cast<int>(j), model.a[i][j]});
    }
    if (terms.empty()) terms.push_back({0, 0.0});
    inst.add_le(std::move(terms), model.b[i]);
  }
  return inst;
}

// A feasible, bounded LP: b = A x0 + nonnegative slack for some x0 in the box.
inline DenseModel random_feasible_lp(std::mt19937_64& rng, int rows, int cols) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> pos(0.0, 1.0);
  DenseModel m;
  m.c.resize(cols);
  m.lo.resize(cols);
  m.hi.resize(cols);
  std::vector<double> x0(cols);
  for (int j = 0; j < cols; ++j) {
    m.c[j] = unit(rng);
    m.lo[j] = pos(rng) < 0.3 ? -2.0 * pos(rng) : 0.0;
    m.hi[j] = m.lo[j] + 1.0 + 4.0 * pos(rng);
    x0[j] = m.lo[j] + (m.hi[j] - m.lo[j]) * pos(rng);
  }
  for (int i = 0; i < rows; ++i) {
    std::vector<double> row(cols, 0.0);
    bool any = false;
    for (int j = 0; j < cols; ++j) {
      if (pos(rng) < 0.6) {
        row[j] = unit(rng);
        any = true;
      }
    }
    if (!any) row[i % cols] = 1.0;
    double activity = 0.0;
    for (int j = 0; j < cols; ++j) activity += row[j] * x0[j];
    m.a.push_back(row);
    m.b.push_back(activity + 0.5 * pos(rng));
  }
  return m;
}

// Up to 8 binaries plus optional continuous variables; may be infeasible.
inline DenseModel random_small_milp(std::mt19937_64& rng, int binaries, int continuous, int rows) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> pos(0.0, 1.0);
  std::uniform_int_distribution<int> coef(-5, 5);
  DenseModel m;
  const int cols = binaries + continuous;
  for (int j = 0; j < cols; ++j) {
    const bool is_int = j < binaries;
    m.c.push_back(static_cast<double>(coef(rng)) + 0.25 * unit(rng));
    m.lo.push_back(0.0);
    m.hi.push_back(is_int ? 1.0 : 1.0 + 2.0 * pos(rng));
    m.integer.push_back(is_int);
  }
  for (int i = 0; i < rows; ++i) {
    std::vector<double> row(cols, 0.0);
    double positive_mass = 0.0;
    for (int j = 0; j < cols; ++j) {
      if (pos(rng) < 0.6) {
        row[j] = static_cast<double>(coef(rng)) + 0.5 * unit(rng);
        positive_mass += std::max(row[j], 0.0);
      }
    }
    if (positive_mass == 0.0 && cols > 0) row[i % cols] = 1.0;
    m.a.push_back(row);
    m.b.push_back(0.6 * positive_mass * pos(rng) + unit(rng));
  }
  return m;
}

struct BruteForceResult {
  bool feasible = false;
  double objective = 0.0;
};

// Enumerates every 0/1 assignment of the integer (binary) variables and solves
// the LP over the continuous remainder with the naive oracle.
inline BruteForceResult brute_force_milp(const DenseModel& m) {
  const int n = static_cast<int>(m.c.size());
  std::vector<int> ints;
  for (int j = 0; j < n; ++j) {
    if (m.integer[j]) ints.push_back(j);
  }
  BruteForceResult best;
  const long total = 1L << ints.size();
  for (long mask = 0; mask < total; ++mask) {
    std::vector<double> lo = m.lo;
    std::vector<double> hi = m.hi;
    for (std::size_t k = 0; k < ints.size(); ++k) {
      const double v = (mask >> k) & 1 ? 1.0 : 0.0;
      lo[ints[k]] = v;
      hi[ints[k]] = v;
    }
    const Solution s = naive_simplex(m.c, m.a, m.b, lo, hi);
    if (s.status != Status::kOptimal) continue;
    if (!best.feasible || s.objective < best.objective) {
      best.feasible = true;
      best.objective = s.objective;
    }
  }
  return best;
}

}  // namespace oracle

#endif  // EVOBRANCH_TESTS_RANDOM_MODELS_HPP_
