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

// Score programs: a small expression language mapping the per-candidate
// feature matrix to one score per candidate.
//
//   program  := ["spl/1" NL] header{3} "score" ":" NL stmt* "return" expr NL*
//   header   := "used_features" ":" "[" [int {"," int}] "]" NL
//             | "params" ":" "[" [num {"," num}] "]" NL
//             | "bounds" ":" "[" ["[" num "," num "]" {"," ...}] "]" NL
//   stmt     := "let" ident "=" expr NL
//   expr     := term {("+" | "-") term}
//   term     := unary {("*" | "/") unary}
//   unary    := "-" unary | primary
//   primary  := number | ident | "(" expr ")"
//             | "feature" "(" int ")" | "param" "(" int ")"
//             | fn1 "(" expr ")"                 fn1 = neg abs tanh exp sqrt log1p
//             | fn2 "(" expr "," expr ")"        fn2 = min max pow
//             | "clip" "(" expr "," expr "," expr ")"
//
// feature(i) is a vector over candidates; params and literals are scalars.
// Binary operators broadcast. Newlines inside parentheses or brackets are
// ignored; '#' starts a comment.

#ifndef EVOBRANCH_DSL_HPP_
#define EVOBRANCH_DSL_HPP_

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "evobranch/features.hpp"
#include "evobranch/policies.hpp"

namespace evobranch {

inline constexpr int kMaxUsedFeatures = 10;
inline constexpr std::string_view kProgramHeader = "spl/1";

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, const std::string& message);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

enum class Op {
  kFeature,
  kParam,
  kLiteral,
  kName,
  kNeg,
  kAbs,
  kTanh,
  kExp,
  kSqrt,
  kLog1p,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kMin,
  kMax,
  kPow,
  kClip,
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  Op op = Op::kLiteral;
  int index = 0;      // feature or param index
  double value = 0.0;  // literal
  std::string name;   // let-bound name
  std::vector<ExprPtr> args;

  static ExprPtr feature(int i);
  static ExprPtr param(int j);
  static ExprPtr literal(double v);
  static ExprPtr ref(std::string name);
  static ExprPtr make(Op op, std::vector<ExprPtr> args);
};

// Structural equality; literals compare bit-exactly.
bool same_expr(const Expr& a, const Expr& b);

struct Binding {
  std::string name;
  ExprPtr expr;
};

struct ScoreProgram {
  std::vector<int> used_features;  // ascending
  std::vector<double> params;      // theta0
  std::vector<std::pair<double, double>> bounds;
  std::vector<Binding> lets;
  ExprPtr result;
  // Non-fatal notes from parsing, e.g. clamped initial parameters.
  std::vector<std::string> warnings;
};

// Compares everything except warnings.
bool same_program(const ScoreProgram& a, const ScoreProgram& b);

// Parses and validates. Throws ParseError.
ScoreProgram parse_program(std::string_view text);
// Checks a programmatically built program against the same rules as
// parse_program; clamps params into bounds. Throws ParseError (line 0).
void validate_program(ScoreProgram& program);

std::string serialize_expr(const Expr& e);
std::string serialize_program(const ScoreProgram& program);

class EvalError : public std::runtime_error {
 public:
  explicit EvalError(const std::string& node)
      : std::runtime_error("non-finite value at " + node), node_(node) {}
  const std::string& node() const { return node_; }

 private:
  std::string node_;
};

// One score per row of `features`. Throws EvalError on any non-finite
// intermediate value and ContractViolation on a theta of the wrong arity.
std::vector<double> evaluate(const ScoreProgram& program, std::span<const double> theta,
                             const FeatureMatrix& features);

// Argmax of a score program over normalized node features.
class DslPolicy : public ScoringPolicy {
 public:
  DslPolicy(std::shared_ptr<const ScoreProgram> program, std::vector<double> theta,
            std::string name = "dsl");
  std::string name() const override { return name_; }
  void begin_solve(const MilpInstance& instance, std::uint64_t seed) override;
  std::vector<double> scores(const NodeContext& ctx, std::span<const int> candidates,
                             SearchState& state) override;

 private:
  std::shared_ptr<const ScoreProgram> program_;
  std::vector<double> theta_;
  std::string name_;
  StaticFeatureCache cache_;
};

}  // namespace evobranch

#endif  // EVOBRANCH_DSL_HPP_
