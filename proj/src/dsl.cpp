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

#include "evobranch/dsl.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <set>

#include <fmt/format.h>

#include "evobranch/text.hpp"

namespace evobranch {

ParseError::ParseError(int line, int column, const std::string& message)
    : std::runtime_error(line > 0 ? fmt::format("{}:{}: {}", line, column, message) : message),
      line_(line),
      column_(column) {}

ExprPtr Expr::feature(int i) {
  auto e = std::make_shared<Expr>();
  e->op = Op::kFeature;
  e->index = i;
  return e;
}

ExprPtr Expr::param(int j) {
  auto e = std::make_shared<Expr>();
  e->op = Op::kParam;
  e->index = j;
  return e;
}

ExprPtr Expr::literal(double v) {
  auto e = std::make_shared<Expr>();
  e->op = Op::kLiteral;
  e->value = v;
  return e;
}

ExprPtr Expr::ref(std::string name) {
  auto e = std::make_shared<Expr>();
  e->op = Op::kName;
  e->name = std::move(name);
  return e;
}

ExprPtr Expr::make(Op op, std::vector<ExprPtr> args) {
  auto e = std::make_shared<Expr>();
  e->op = op;
  e->args = std::move(args);
  return e;
}

bool same_expr(const Expr& a, const Expr& b) {
  if (a.op != b.op || a.args.size() != b.args.size()) return false;
  switch (a.op) {
    case Op::kFeature:
    case Op::kParam:
      return a.index == b.index;
    case Op::kLiteral:
      return std::bit_cast<std::uint64_t>(a.value) == std::bit_cast<std::uint64_t>(b.value);
    case Op::kName:
      return a.name == b.name;
    default:
      break;
  }
  for (std::size_t k = 0; k < a.args.size(); ++k) {
    if (!same_expr(*a.args[k], *b.args[k])) return false;
  }
  return true;
}

bool same_program(const ScoreProgram& a, const ScoreProgram& b) {
  if (a.used_features != b.used_features || a.bounds != b.bounds || a.lets.size() != b.lets.size()) return false;
  if (a.params.size() != b.params.size()) return false;
  for (std::size_t k = 0; k < a.params.size(); ++k) {
    if (std::bit_cast<std::uint64_t>(a.params[k]) != std::bit_cast<std::uint64_t>(b.params[k])) return false;
  }
  for (std::size_t k = 0; k < a.lets.size(); ++k) {
    if (a.lets[k].name != b.lets[k].name || !same_expr(*a.lets[k].expr, *b.lets[k].expr)) return false;
  }
  return a.result && b.result && same_expr(*a.result, *b.result);
}

namespace {

struct FunctionInfo {
  std::string_view name;
  Op op;
  int arity;
};

constexpr FunctionInfo kFunctions[] = {
    {"neg", Op::kNeg, 1},   {"abs", Op::kAbs, 1},   {"tanh", Op::kTanh, 1}, {"exp", Op::kExp, 1},
    {"sqrt", Op::kSqrt, 1}, {"log1p", Op::kLog1p, 1}, {"min", Op::kMin, 2},  {"max", Op::kMax, 2},
    {"pow", Op::kPow, 2},   {"clip", Op::kClip, 3},
};

const FunctionInfo* find_function(std::string_view name) {
  for (const auto& f : kFunctions) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

bool is_reserved(std::string_view name) {
  return find_function(name) || name == "let" || name == "return" || name == "feature" || name == "param" ||
         name == "score" || name == "used_features" || name == "params" || name == "bounds";
}

enum class Tok { kNumber, kIdent, kPunct, kNewline, kEnd };

struct Token {
  Tok kind;
  std::string text;
  int line;
  int column;
};

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  int depth = 0;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    i += n;
    col += static_cast<int>(n);
  };
  while (i < src.size()) {
    const char ch = src[i];
    if (ch == '\n') {
      // A line that starts with an infix operator continues the previous one.
      std::size_t ahead = i + 1;
      while (ahead < src.size() && (src[ahead] == ' ' || src[ahead] == '\t' || src[ahead] == '\r')) ++ahead;
      const bool continued = ahead < src.size() && std::string_view("+-*/").find(src[ahead]) != std::string_view::npos;
      if (depth == 0 && !continued && !out.empty() && out.back().kind != Tok::kNewline) {
        out.push_back({Tok::kNewline, "\\n", line, col});
      }
      ++i;
      ++line;
      col = 1;
      continue;
    }
    if (ch == ' ' || ch == '\t' || ch == '\r') {
      advance(1);
      continue;
    }
    if (ch == '#') {
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    const int start_col = col;
    if (std::isdigit(static_cast<unsigned char>(ch)) || (ch == '.' && i + 1 < src.size() &&
                                                         std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i;
      while (j < src.size() && (std::isdigit(static_cast<unsigned char>(src[j])) || src[j] == '.')) ++j;
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          j = k;
          while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
        }
      }
      out.push_back({Tok::kNumber, std::string(src.substr(i, j - i)), line, start_col});
      advance(j - i);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      out.push_back({Tok::kIdent, std::string(src.substr(i, j - i)), line, start_col});
      advance(j - i);
      continue;
    }
    if (std::string_view("()[],:=+-*/").find(ch) != std::string_view::npos) {
      if (ch == '(' || ch == '[') ++depth;
      if ((ch == ')' || ch == ']') && depth > 0) --depth;
      out.push_back({Tok::kPunct, std::string(1, ch), line, start_col});
      advance(1);
      continue;
    }
    throw ParseError(line, start_col, fmt::format("unexpected character '{}'", ch));
  }
  out.push_back({Tok::kEnd, "end of input", line, col});
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  ScoreProgram program() {
    ScoreProgram p;
    skip_newlines();
    // Optional version line "spl/1".
    if (peek().kind == Tok::kIdent && peek().text == "spl" && peek(1).text == "/") {
      const Token& t = next();
      next();
      const Token& v = next();
      if (v.text != "1") throw ParseError(t.line, t.column, "unsupported program version 'spl/" + v.text + "'");
      newline();
    }
    bool seen_features = false, seen_params = false, seen_bounds = false;
    for (;;) {
      skip_newlines();
      const Token& t = peek();
      if (t.kind != Tok::kIdent) throw error(t, "expected a header line or 'score:'");
      if (t.text == "score") break;
      next();
      expect(":");
      for (std::size_t k = pos_; toks_[k].kind != Tok::kNewline && toks_[k].kind != Tok::kEnd; ++k) {
        if (toks_[k].text == "*") {
          throw error(toks_[k], "list repetition is not allowed; arity must be explicit");
        }
      }
      if (t.text == "used_features") {
        if (seen_features) throw error(t, "duplicate used_features header");
        seen_features = true;
        for (double v : number_list()) {
          if (v != std::floor(v) || std::abs(v) > 1e6) throw error(t, "feature indices must be integers");
          p.used_features.push_back(static_cast<int>(v));
        }
      } else if (t.text == "params") {
        if (seen_params) throw error(t, "duplicate params header");
        seen_params = true;
        p.params = number_list();
      } else if (t.text == "bounds") {
        if (seen_bounds) throw error(t, "duplicate bounds header");
        seen_bounds = true;
        p.bounds = bounds_list();
      } else {
        throw error(t, "unknown header '" + t.text + "'");
      }
      newline();
    }
    const Token& score = next();
    if (!seen_features) throw error(score, "missing used_features header");
    if (!seen_params) throw error(score, "missing params header");
    if (!seen_bounds) throw error(score, "bounds arity: missing bounds header");
    expect(":");
    newline();
    std::set<std::string> names;
    for (;;) {
      skip_newlines();
      const Token& t = peek();
      if (t.kind == Tok::kIdent && t.text == "let") {
        next();
        const Token& id = next();
        if (id.kind != Tok::kIdent) throw error(id, "expected a name after 'let'");
        if (is_reserved(id.text)) throw error(id, "'" + id.text + "' is reserved");
        if (names.count(id.text)) throw error(id, "'" + id.text + "' is already bound");
        expect("=");
        ExprPtr e = expr(names);
        names.insert(id.text);
        p.lets.push_back({id.text, std::move(e)});
        end_of_statement();
      } else if (t.kind == Tok::kIdent && t.text == "return") {
        next();
        p.result = expr(names);
        end_of_statement();
        skip_newlines();
        if (peek().kind != Tok::kEnd) throw error(peek(), "statements after return");
        break;
      } else if (t.kind == Tok::kEnd) {
        throw error(t, "missing return statement");
      } else {
        throw error(t, "expected 'let' or 'return'");
      }
    }
    return p;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  static ParseError error(const Token& t, const std::string& message) {
    return ParseError(t.line, t.column, message + " (at '" + t.text + "')");
  }
  void expect(std::string_view punct) {
    const Token& t = next();
    if (t.kind != Tok::kPunct || t.text != punct) throw error(t, fmt::format("expected '{}'", punct));
  }
  void skip_newlines() {
    while (peek().kind == Tok::kNewline) next();
  }
  void newline() {
    const Token& t = next();
    if (t.kind != Tok::kNewline) throw error(t, "expected end of line");
  }
  void end_of_statement() {
    if (peek().kind == Tok::kEnd) return;
    newline();
  }

  double number() {
    bool negative = false;
    if (peek().text == "-") {
      next();
      negative = true;
    }
    const Token& t = next();
    if (t.kind != Tok::kNumber) throw error(t, "expected a number");
    const auto v = parse_double(t.text);
    if (!v || !std::isfinite(*v)) throw error(t, "invalid number");
    return negative ? -*v : *v;
  }

  std::vector<double> number_list() {
    std::vector<double> out;
    expect("[");
    if (peek().text == "]") {
      next();
      return out;
    }
    for (;;) {
      out.push_back(number());
      if (peek().text == ",") {
        next();
        if (peek().text == "]") break;  // trailing comma
        continue;
      }
      break;
    }
    expect("]");
    return out;
  }

  std::vector<std::pair<double, double>> bounds_list() {
    std::vector<std::pair<double, double>> out;
    expect("[");
    while (peek().text == "[") {
      const Token& open = peek();
      const std::vector<double> pair = number_list();
      if (pair.size() != 2) throw error(open, "each bound must be a [lo, hi] pair");
      out.emplace_back(pair[0], pair[1]);
      if (peek().text != ",") break;
      next();
    }
    if (peek().kind == Tok::kNumber) throw error(peek(), "bounds must be a list of [lo, hi] pairs");
    expect("]");
    return out;
  }

  ExprPtr expr(const std::set<std::string>& names) {
    ExprPtr lhs = term(names);
    while (peek().text == "+" || peek().text == "-") {
      const Op op = next().text == "+" ? Op::kAdd : Op::kSub;
      lhs = Expr::make(op, {lhs, term(names)});
    }
    return lhs;
  }

  ExprPtr term(const std::set<std::string>& names) {
    ExprPtr lhs = unary(names);
    while (peek().text == "*" || peek().text == "/") {
      const Op op = next().text == "*" ? Op::kMul : Op::kDiv;
      lhs = Expr::make(op, {lhs, unary(names)});
    }
    return lhs;
  }

  ExprPtr unary(const std::set<std::string>& names) {
    if (peek().text == "-") {
      next();
      return Expr::make(Op::kNeg, {unary(names)});
    }
    return primary(names);
  }

  int index_arg() {
    expect("(");
    const Token& t = next();
    if (t.kind != Tok::kNumber) throw error(t, "expected an integer index");
    const auto v = parse_int(t.text);
    if (!v || *v < 0 || *v > 1000000) throw error(t, "expected a nonnegative integer index");
    expect(")");
    return static_cast<int>(*v);
  }

  ExprPtr primary(const std::set<std::string>& names) {
    const Token& t = next();
    if (t.kind == Tok::kNumber) {
      const auto v = parse_double(t.text);
      if (!v || !std::isfinite(*v)) throw error(t, "invalid number");
      return Expr::literal(*v);
    }
    if (t.kind == Tok::kPunct && t.text == "(") {
      ExprPtr e = expr(names);
      expect(")");
      return e;
    }
    if (t.kind != Tok::kIdent) throw error(t, "expected an expression");
    if (t.text == "feature") {
      const int i = index_arg();
      if (i >= kNumFeatures) throw error(t, fmt::format("feature index {} outside [0, {}]", i, kNumFeatures - 1));
      return Expr::feature(i);
    }
    if (t.text == "param") return Expr::param(index_arg());
    if (const FunctionInfo* fn = find_function(t.text)) {
      expect("(");
      std::vector<ExprPtr> args;
      for (int k = 0; k < fn->arity; ++k) {
        if (k > 0) expect(",");
        args.push_back(expr(names));
      }
      if (peek().text == ",") throw error(peek(), fmt::format("{} takes {} argument(s)", fn->name, fn->arity));
      expect(")");
      return Expr::make(fn->op, std::move(args));
    }
    if (is_reserved(t.text)) throw error(t, "unexpected '" + t.text + "'");
    if (!names.count(t.text)) throw error(t, "unbound name '" + t.text + "'");
    return Expr::ref(t.text);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

void collect(const Expr& e, std::set<int>& features, int& max_param) {
  if (e.op == Op::kFeature) features.insert(e.index);
  if (e.op == Op::kParam) max_param = std::max(max_param, e.index);
  for (const auto& a : e.args) collect(*a, features, max_param);
}

int precedence(Op op) {
  switch (op) {
    case Op::kAdd:
    case Op::kSub: return 1;
    case Op::kMul:
    case Op::kDiv: return 2;
    case Op::kNeg: return 3;
    default: return 4;
  }
}

void write_expr(const Expr& e, std::string& out) {
  switch (e.op) {
    case Op::kFeature:
      out += fmt::format("feature({})", e.index);
      return;
    case Op::kParam:
      out += fmt::format("param({})", e.index);
      return;
    case Op::kLiteral:
      out += format_g17(e.value);
      return;
    case Op::kName:
      out += e.name;
      return;
    case Op::kNeg: {
      const bool paren = precedence(e.args[0]->op) < 3;
      out += paren ? "-(" : "-";
      write_expr(*e.args[0], out);
      if (paren) out += ")";
      return;
    }
    case Op::kAdd:
    case Op::kSub:
    case Op::kMul:
    case Op::kDiv: {
      const int p = precedence(e.op);
      const bool lp = precedence(e.args[0]->op) < p;
      const bool rp = precedence(e.args[1]->op) <= p;
      if (lp) out += "(";
      write_expr(*e.args[0], out);
      if (lp) out += ")";
      out += e.op == Op::kAdd ? " + " : e.op == Op::kSub ? " - " : e.op == Op::kMul ? " * " : " / ";
      if (rp) out += "(";
      write_expr(*e.args[1], out);
      if (rp) out += ")";
      return;
    }
    default:
      break;
  }
  for (const auto& f : kFunctions) {
    if (f.op != e.op) continue;
    out += f.name;
    out += "(";
    for (std::size_t k = 0; k < e.args.size(); ++k) {
      if (k > 0) out += ", ";
      write_expr(*e.args[k], out);
    }
    out += ")";
    return;
  }
}

}  // namespace

void validate_program(ScoreProgram& p) {
  auto fail = [](const std::string& msg) { return ParseError(0, 0, msg); };
  if (!p.result) throw fail("missing return statement");
  std::sort(p.used_features.begin(), p.used_features.end());
  if (std::adjacent_find(p.used_features.begin(), p.used_features.end()) != p.used_features.end()) {
    throw fail("duplicate index in used_features");
  }
  for (int i : p.used_features) {
    if (i < 0 || i >= kNumFeatures) throw fail(fmt::format("feature index {} outside [0, {}]", i, kNumFeatures - 1));
  }
  if (p.used_features.size() > static_cast<std::size_t>(kMaxUsedFeatures)) {
    throw fail(fmt::format("{} features declared; at most {} allowed", p.used_features.size(), kMaxUsedFeatures));
  }
  std::set<int> referenced;
  int max_param = -1;
  std::set<std::string> bound;
  for (const Binding& b : p.lets) {
    if (is_reserved(b.name) || bound.count(b.name)) throw fail("invalid or duplicate name '" + b.name + "'");
    collect(*b.expr, referenced, max_param);
    bound.insert(b.name);
  }
  collect(*p.result, referenced, max_param);
  if (referenced.size() > static_cast<std::size_t>(kMaxUsedFeatures)) {
    throw fail(fmt::format("{} distinct features referenced; at most {} allowed", referenced.size(), kMaxUsedFeatures));
  }
  for (int i : referenced) {
    if (!std::binary_search(p.used_features.begin(), p.used_features.end(), i)) {
      throw fail(fmt::format("feature({}) is referenced but not declared in used_features", i));
    }
  }
  for (int i : p.used_features) {
    if (!referenced.count(i)) throw fail(fmt::format("feature {} is declared in used_features but never referenced", i));
  }
  if (p.bounds.size() != p.params.size()) {
    throw fail(fmt::format("bounds arity mismatch: {} params but {} bounds", p.params.size(), p.bounds.size()));
  }
  if (max_param >= static_cast<int>(p.params.size())) {
    throw fail(fmt::format("param({}) is referenced but only {} params are declared", max_param, p.params.size()));
  }
  for (std::size_t j = 0; j < p.params.size(); ++j) {
    auto [lo, hi] = p.bounds[j];
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
      throw fail(fmt::format("bound {} must satisfy lo <= hi with finite values", j));
    }
    const double clamped = std::clamp(p.params[j], lo, hi);
    if (clamped != p.params[j]) {
      p.warnings.push_back(fmt::format("param {} = {} clamped to {}", j, format_shortest(p.params[j]),
                                       format_shortest(clamped)));
      p.params[j] = clamped;
    }
  }
}

ScoreProgram parse_program(std::string_view text) {
  Parser parser(tokenize(text));
  ScoreProgram p = parser.program();
  validate_program(p);
  return p;
}

std::string serialize_expr(const Expr& e) {
  std::string out;
  write_expr(e, out);
  return out;
}

std::string serialize_program(const ScoreProgram& p) {
  std::string out(kProgramHeader);
  out += "\nused_features: [";
  for (std::size_t k = 0; k < p.used_features.size(); ++k) {
    out += (k ? ", " : "") + std::to_string(p.used_features[k]);
  }
  out += "]\nparams: [";
  for (std::size_t k = 0; k < p.params.size(); ++k) out += (k ? ", " : "") + format_g17(p.params[k]);
  out += "]\nbounds: [";
  for (std::size_t k = 0; k < p.bounds.size(); ++k) {
    out += fmt::format("{}[{}, {}]", k ? ", " : "", format_g17(p.bounds[k].first), format_g17(p.bounds[k].second));
  }
  out += "]\nscore:\n";
  for (const Binding& b : p.lets) out += "  let " + b.name + " = " + serialize_expr(*b.expr) + "\n";
  out += "  return " + serialize_expr(*p.result) + "\n";
  return out;
}

}  // namespace evobranch
