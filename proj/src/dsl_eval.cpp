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

#include <algorithm>
#include <cmath>
#include <map>

#include "evobranch/dsl.hpp"

namespace evobranch {

namespace {

// A scalar is stored as a single element and broadcast on use.
struct Value {
  bool vector = false;
  std::vector<double> v;

  double at(std::size_t r) const { return vector ? v[r] : v[0]; }
};

constexpr double kSoftplusSwitch = 30.0;

double softplus(double x) { return x > kSoftplusSwitch ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

class Evaluator {
 public:
  Evaluator(std::span<const double> theta, const FeatureMatrix& features) : theta_(theta), features_(features) {}

  void bind(const std::string& name, Value value) { names_[name] = std::move(value); }

  Value eval(const Expr& e) {
    Value out;
    switch (e.op) {
      case Op::kFeature:
        out.vector = true;
        out.v.resize(features_.rows);
        for (int r = 0; r < features_.rows; ++r) out.v[r] = features_.at(r, e.index);
        break;
      case Op::kParam:
        out.v = {theta_[e.index]};
        break;
      case Op::kLiteral:
        out.v = {e.value};
        break;
      case Op::kName:
        return names_.at(e.name);
      case Op::kLog1p:
        if (e.args[0]->op == Op::kExp) {
          out = eval(*e.args[0]->args[0]);
          for (double& x : out.v) x = softplus(x);
          break;
        }
        [[fallthrough]];
      case Op::kNeg:
      case Op::kAbs:
      case Op::kTanh:
      case Op::kExp:
      case Op::kSqrt:
        out = eval(*e.args[0]);
        for (double& x : out.v) x = unary(e.op, x);
        break;
      case Op::kClip: {
        const Value x = eval(*e.args[0]);
        const Value lo = eval(*e.args[1]);
        const Value hi = eval(*e.args[2]);
        out = shape(x.vector || lo.vector || hi.vector);
        for (std::size_t r = 0; r < out.v.size(); ++r) out.v[r] = std::min(std::max(x.at(r), lo.at(r)), hi.at(r));
        break;
      }
      default: {
        const Value a = eval(*e.args[0]);
        const Value b = eval(*e.args[1]);
        out = shape(a.vector || b.vector);
        for (std::size_t r = 0; r < out.v.size(); ++r) out.v[r] = binary(e.op, a.at(r), b.at(r));
        break;
      }
    }
    for (double x : out.v) {
      if (!std::isfinite(x)) throw EvalError(serialize_expr(e));
    }
    return out;
  }

 private:
  Value shape(bool vector) const {
    Value v;
    v.vector = vector;
    v.v.assign(vector ? static_cast<std::size_t>(features_.rows) : 1, 0.0);
    return v;
  }

  static double unary(Op op, double x) {
    switch (op) {
      case Op::kNeg: return -x;
      case Op::kAbs: return std::abs(x);
      case Op::kTanh: return std::tanh(x);
      case Op::kExp: return std::exp(x);
      case Op::kSqrt: return std::sqrt(x);
      case Op::kLog1p: return std::log1p(x);
      default: return x;
    }
  }

  static double binary(Op op, double a, double b) {
    switch (op) {
      case Op::kAdd: return a + b;
      case Op::kSub: return a - b;
      case Op::kMul: return a * b;
      case Op::kDiv: return a / b;
      case Op::kMin: return std::min(a, b);
      case Op::kMax: return std::max(a, b);
      case Op::kPow: return std::pow(a, b);
      default: return a;
    }
  }

  std::span<const double> theta_;
  const FeatureMatrix& features_;
  std::map<std::string, Value> names_;
};

}  // namespace

std::vector<double> evaluate(const ScoreProgram& program, std::span<const double> theta,
                             const FeatureMatrix& features) {
  if (theta.size() != program.params.size()) {
    throw ContractViolation("evaluate: theta has " + std::to_string(theta.size()) + " entries, program expects " +
                            std::to_string(program.params.size()));
  }
  Evaluator ev(theta, features);
  for (const Binding& b : program.lets) ev.bind(b.name, ev.eval(*b.expr));
  const Value result = ev.eval(*program.result);
  std::vector<double> out(static_cast<std::size_t>(features.rows));
  for (int r = 0; r < features.rows; ++r) out[r] = result.at(r);
  return out;
}

DslPolicy::DslPolicy(std::shared_ptr<const ScoreProgram> program, std::vector<double> theta, std::string name)
    : program_(std::move(program)), theta_(std::move(theta)), name_(std::move(name)) {
  if (!program_ || theta_.size() != program_->params.size()) {
    throw ContractViolation("DslPolicy: theta arity does not match the program");
  }
}

void DslPolicy::begin_solve(const MilpInstance& instance, std::uint64_t /*seed*/) {
  cache_ = precompute_static(instance);
}

std::vector<double> DslPolicy::scores(const NodeContext& ctx, std::span<const int> candidates,
                                      SearchState& /*state*/) {
  const FeatureMatrix raw = extract_features(ctx, cache_, candidates);
  return evaluate(*program_, theta_, normalize_per_node(raw));
}

}  // namespace evobranch
