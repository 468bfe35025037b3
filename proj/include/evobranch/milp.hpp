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

#ifndef EVOBRANCH_MILP_HPP_
#define EVOBRANCH_MILP_HPP_

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace evobranch {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Thrown when a caller breaks a documented precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct Term {
  int var = 0;
  double coef = 0.0;

  friend bool operator==(const Term&, const Term&) = default;
};

// sum(terms) <= rhs
struct Constraint {
  std::vector<Term> terms;
  double rhs = 0.0;

  friend bool operator==(const Constraint&, const Constraint&) = default;
};

// A minimization MILP in all-<= row form:
//   min c^T x  s.t.  A x <= b,  lower <= x <= upper,  x_i integer where marked.
struct MilpInstance {
  std::string name;
  std::vector<double> objective;
  std::vector<Constraint> rows;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::uint8_t> is_integer;

  int num_vars() const { return static_cast<int>(objective.size()); }
  int num_cons() const { return static_cast<int>(rows.size()); }
  int num_integer() const;

  // Returns the index of the new variable.
  int add_var(double cost, double lo, double hi, bool integer);
  void add_le(std::vector<Term> terms, double rhs);
  // Stored negated as -terms <= -rhs.
  void add_ge(std::vector<Term> terms, double rhs);
  // Stored as a <= and a negated >= row.
  void add_eq(const std::vector<Term>& terms, double rhs);

  // Throws std::invalid_argument describing the first broken invariant.
  void validate() const;

  friend bool operator==(const MilpInstance&, const MilpInstance&) = default;
};

// Local variable bounds of a branch-and-bound node.
struct Bounds {
  std::vector<double> lower;
  std::vector<double> upper;

  static Bounds from(const MilpInstance& instance) {
    return Bounds{instance.lower, instance.upper};
  }
  bool consistent() const;

  friend bool operator==(const Bounds&, const Bounds&) = default;
};

}  // namespace evobranch

#endif  // EVOBRANCH_MILP_HPP_
