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

#include "evobranch/milp.hpp"

#include <cmath>
#include <string>

namespace evobranch {

int MilpInstance::num_integer() const {
  int count = 0;
  for (auto flag : is_integer) count += flag ? 1 : 0;
  return count;
}

int MilpInstance::add_var(double cost, double lo, double hi, bool integer) {
  objective.push_back(cost);
  lower.push_back(lo);
  upper.push_back(hi);
  is_integer.push_back(integer ? 1 : 0);
  return num_vars() - 1;
}

void MilpInstance::add_le(std::vector<Term> terms, double rhs) {
  rows.push_back(Constraint{std::move(terms), rhs});
}

void MilpInstance::add_ge(std::vector<Term> terms, double rhs) {
  for (auto& t : terms) t.coef = -t.coef;
  rows.push_back(Constraint{std::move(terms), -rhs});
}

void MilpInstance::add_eq(const std::vector<Term>& terms, double rhs) {
  add_le(terms, rhs);
  add_ge(terms, rhs);
}

void MilpInstance::validate() const {
  const auto n = objective.size();
  if (lower.size() != n || upper.size() != n || is_integer.size() != n) {
    throw std::invalid_argument("dimension mismatch between objective, bounds and integrality");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(objective[i])) {
      throw std::invalid_argument("non-finite objective coefficient at var " + std::to_string(i));
    }
    if (std::isnan(lower[i]) || std::isnan(upper[i]) || lower[i] > upper[i]) {
      throw std::invalid_argument("invalid bounds at var " + std::to_string(i));
    }
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.terms.empty()) {
      throw std::invalid_argument("empty constraint row " + std::to_string(r));
    }
    if (!std::isfinite(row.rhs)) {
      throw std::invalid_argument("non-finite rhs in row " + std::to_string(r));
    }
    std::vector<bool> seen(n, false);
    for (const auto& t : row.terms) {
      if (t.var < 0 || static_cast<std::size_t>(t.var) >= n) {
        throw std::invalid_argument("variable index out of range in row " + std::to_string(r));
      }
      if (!std::isfinite(t.coef)) {
        throw std::invalid_argument("non-finite coefficient in row " + std::to_string(r));
      }
      if (seen[t.var]) {
        throw std::invalid_argument("duplicate variable in row " + std::to_string(r));
      }
      seen[t.var] = true;
    }
  }
}

bool Bounds::consistent() const {
  if (lower.size() != upper.size()) return false;
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (std::isnan(lower[i]) || std::isnan(upper[i])) return false;
  }
  return true;
}

}  // namespace evobranch
