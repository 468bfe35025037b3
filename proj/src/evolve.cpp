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


#include "evobranch/evolve.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <json.hpp>
#include <stdexcept>

#include "evobranch/features.hpp"
#include "evobranch/text.hpp"

namespace evobranch {

using ojson = nlohmann::ordered_json;

int island_of(const ScoreProgram& program, int island_count) {
  if (island_count < 1) throw ContractViolation("island_count must be >= 1");
  std::vector<int> used = program.used_features;
  std::sort(used.begin(), used.end());
  std::string key;
  for (std::size_t k = 0; k < used.size(); ++k) {
    if (k) key += ',';
    key += std::to_string(used[k]);
  }
  return static_cast<int>(fnv1a64(key) % static_cast<std::uint64_t>(island_count));
}

std::string record_to_json(const ProgramRecord& r) {
  ojson j;
  j["v"] = kDatabaseVersion;
  j["id"] = r.id;
  j["program"] = serialize_program(r.program);
  j["theta"] = r.theta;
  j["cost"] = r.cost;
  j["subset_cost"] = r.subset_cost;
  j["island"] = r.island;
  j["parent"] = r.parent ? ojson(*r.parent) : ojson(nullptr);
  j["iteration"] = r.iteration;
  return j.dump();
}

ProgramRecord record_from_json(std::string_view line) {
  const auto j = nlohmann::json::parse(line);
  if (j.at("v").get<int>() != kDatabaseVersion) throw std::runtime_error("unsupported database version");
  ProgramRecord r;
  r.id = j.at("id").get<long>();
  r.program = parse_program(j.at("program").get<std::string>());
  r.theta = j.at("theta").get<std::vector<double>>();
  r.cost = j.at("cost").get<double>();
  r.subset_cost = j.at("subset_cost").get<double>();
  r.island = j.at("island").get<int>();
  if (!j.at("parent").is_null()) r.parent = j.at("parent").get<long>();
  r.iteration = j.at("iteration").get<int>();
  return r;
}

IslandDatabase::IslandDatabase(int island_count) : island_count_(island_count) {
  if (island_count < 1) throw ContractViolation("island_count must be >= 1");
  islands_.resize(island_count);
}

const ProgramRecord& IslandDatabase::insert(ProgramRecord record) {
  if (!std::isfinite(record.cost)) throw ContractViolation("only finite-cost programs are stored");
  record.id = records_.empty() ? 0 : records_.back().id + 1;
  restore(std::move(record));
  return records_.back();
}

void IslandDatabase::restore(ProgramRecord record) {
  if (!records_.empty() && record.id <= records_.back().id) throw ContractViolation("record ids must increase");
  record.island = island_of(record.program, island_count_);
  islands_[record.island].push_back(records_.size());
  records_.push_back(std::move(record));
}

const ProgramRecord& IslandDatabase::at_id(long id) const {
  const auto it = std::lower_bound(records_.begin(), records_.end(), id,
                                   [](const ProgramRecord& r, long v) { return r.id < v; });
  if (it == records_.end() || it->id != id) throw ContractViolation("no record with id " + std::to_string(id));
  return *it;
}

const std::vector<std::size_t>& IslandDatabase::island(int k) const { return islands_.at(k); }

const ProgramRecord& IslandDatabase::best() const {
  if (records_.empty()) throw ContractViolation("empty database");
  const ProgramRecord* best = &records_.front();
  for (const auto& r : records_) {
    if (r.cost < best->cost) best = &r;
  }
  return *best;
}

int IslandDatabase::best_island() const {
  int best = -1;
  double best_mean = 0.0;
  for (int k = 0; k < island_count_; ++k) {
    if (islands_[k].empty()) continue;
    double sum = 0.0;
    for (std::size_t i : islands_[k]) sum += records_[i].cost;
    const double mean = sum / static_cast<double>(islands_[k].size());
    if (best < 0 || mean < best_mean) {
      best = k;
      best_mean = mean;
    }
  }
  if (best < 0) throw ContractViolation("empty database");
  return best;
}

std::string IslandDatabase::to_jsonl() const {
  std::string out;
  for (const auto& r : records_) {
    out += record_to_json(r);
    out += '\n';
  }
  return out;
}

IslandDatabase IslandDatabase::from_jsonl(std::string_view text, int island_count) {
  IslandDatabase db(island_count);
  std::vector<std::string_view> lines;
  for (auto line : split_lines(text)) {
    if (!trim(line).empty()) lines.push_back(line);
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      db.restore(record_from_json(lines[i]));
    } catch (const std::exception& e) {
      // A torn final line from an interrupted append is dropped.
      if (i + 1 == lines.size()) break;
      throw std::runtime_error("database line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return db;
}

ParentDraw sample_parent(const IslandDatabase& db, Rng& rng, double exploration_prob) {
  if (db.empty()) throw ContractViolation("sample_parent on an empty database");
  const auto& records = db.records();
  if (rng.uniform() < exploration_prob) {
    const auto i = rng.uniform_int(0, static_cast<std::int64_t>(records.size()) - 1);
    return {&records[static_cast<std::size_t>(i)], true};
  }
  std::vector<std::size_t> members = db.island(db.best_island());
  std::stable_sort(members.begin(), members.end(),
                   [&](std::size_t a, std::size_t b) { return records[a].cost < records[b].cost; });
  const double n = static_cast<double>(members.size());
  const double total = n * (n + 1.0) / 2.0;
  double draw = rng.uniform() * total;
  for (std::size_t r = 0; r < members.size(); ++r) {
    const double w = n - static_cast<double>(r);
    if (draw < w) return {&records[members[r]], false};
    draw -= w;
  }
  return {&records[members.back()], false};
}

std::vector<std::string> program_tokens(std::string_view source) {
  std::vector<std::string> out;
  std::size_t i = 0;
  auto wordy = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; };
  while (i < source.size()) {
    const char c = source[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (wordy(c)) {
      const std::size_t start = i;
      while (i < source.size() && wordy(source[i])) ++i;
      out.emplace_back(source.substr(start, i - start));
    } else {
      out.emplace_back(1, c);
      ++i;
    }
  }
  return out;
}

double token_edit_distance(std::span<const std::string> a, std::span<const std::string> b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 0.0;
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return static_cast<double>(prev[b.size()]) / static_cast<double>(longest);
}

double feature_jaccard_distance(const ScoreProgram& a, const ScoreProgram& b) {
  std::vector<int> x = a.used_features;
  std::vector<int> y = b.used_features;
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  std::vector<int> both;
  std::vector<int> either;
  std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(both));
  std::set_union(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(either));
  if (either.empty()) return 0.0;
  return 1.0 - static_cast<double>(both.size()) / static_cast<double>(either.size());
}

double program_distance(const ScoreProgram& a, const ScoreProgram& b) {
  const auto ta = program_tokens(serialize_program(a));
  const auto tb = program_tokens(serialize_program(b));
  return 0.5 * token_edit_distance(ta, tb) + 0.5 * feature_jaccard_distance(a, b);
}

namespace {

constexpr double kMaxSubsetEnumeration = 200000.0;

double choose(std::size_t n, std::size_t k) {
  double c = 1.0;
  for (std::size_t i = 0; i < k; ++i) c = c * static_cast<double>(n - i) / static_cast<double>(i + 1);
  return c;
}

}  // namespace

std::vector<const ProgramRecord*> sample_inspirations(const IslandDatabase& db, const ProgramRecord& parent, int k) {
  const auto& records = db.records();
  std::vector<std::size_t> others;
  for (std::size_t i : db.island(island_of(parent.program, db.island_count()))) {
    if (records[i].id != parent.id) others.push_back(i);
  }
  std::vector<std::size_t> by_cost = others;
  std::stable_sort(by_cost.begin(), by_cost.end(),
                   [&](std::size_t a, std::size_t b) { return records[a].cost < records[b].cost; });
  const std::size_t top_n = std::min(by_cost.size(), static_cast<std::size_t>((std::max(k, 0) + 1) / 2));
  std::vector<const ProgramRecord*> out;
  for (std::size_t r = 0; r < top_n; ++r) out.push_back(&records[by_cost[r]]);

  std::vector<std::size_t> pool;
  for (std::size_t i : others) {
    if (std::find(by_cost.begin(), by_cost.begin() + static_cast<long>(top_n), i) == by_cost.begin() + static_cast<long>(top_n)) {
      pool.push_back(i);
    }
  }
  const std::size_t m = std::min(pool.size(), static_cast<std::size_t>(std::max(k, 0) / 2));
  if (m == 0) return out;

  const auto parent_tokens = program_tokens(serialize_program(parent.program));
  std::vector<std::vector<std::string>> tokens;
  for (std::size_t i : pool) tokens.push_back(program_tokens(serialize_program(records[i].program)));
  const std::size_t n = pool.size();
  std::vector<double> to_parent(n);
  std::vector<std::vector<double>> pair(n, std::vector<double>(n, 0.0));
  for (std::size_t a = 0; a < n; ++a) {
    to_parent[a] = 0.5 * token_edit_distance(tokens[a], parent_tokens) +
                   0.5 * feature_jaccard_distance(records[pool[a]].program, parent.program);
    for (std::size_t b = a + 1; b < n; ++b) {
      pair[a][b] = pair[b][a] = 0.5 * token_edit_distance(tokens[a], tokens[b]) +
                                0.5 * feature_jaccard_distance(records[pool[a]].program, records[pool[b]].program);
    }
  }
  auto gain = [&](const std::vector<std::size_t>& chosen, std::size_t c) {
    double g = to_parent[c];
    for (std::size_t s : chosen) g += pair[s][c];
    return g;
  };

  std::vector<std::size_t> best;
  if (choose(n, m) <= kMaxSubsetEnumeration) {
    // Lexicographic enumeration; only a strictly better set replaces the first.
    std::vector<std::size_t> idx(m);
    for (std::size_t i = 0; i < m; ++i) idx[i] = i;
    double best_score = -1.0;
    while (true) {
      double score = 0.0;
      std::vector<std::size_t> prefix;
      for (std::size_t c : idx) {
        score += gain(prefix, c);
        prefix.push_back(c);
      }
      if (score > best_score) {
        best_score = score;
        best = idx;
      }
      std::size_t pos = m;
      while (pos > 0 && idx[pos - 1] == n - m + pos - 1) --pos;
      if (pos == 0) break;
      ++idx[pos - 1];
      for (std::size_t i = pos; i < m; ++i) idx[i] = idx[i - 1] + 1;
    }
  } else {
    std::vector<bool> used(n, false);
    while (best.size() < m) {
      std::size_t pick = n;
      double pick_gain = -1.0;
      for (std::size_t c = 0; c < n; ++c) {
        if (used[c]) continue;
        const double g = gain(best, c);
        if (g > pick_gain) {
          pick_gain = g;
          pick = c;
        }
      }
      used[pick] = true;
      best.push_back(pick);
    }
  }
  for (std::size_t c : best) out.push_back(&records[pool[c]]);
  return out;
}

std::string dsl_grammar_text() {
  return R"(A program is a header followed by a score body:

  used_features: [i, j, ...]      feature indices read by the body, 0..90, at most 10
  params: [v0, v1, ...]           initial parameter values
  bounds: [[lo0, hi0], ...]       one explicit pair per parameter
  score:
    let name = expr               zero or more bindings, one per line
    return expr

expr is built from
  numbers, let-bound names, feature(i), param(j)
  + - * / and unary minus, with the usual precedence and parentheses
  abs(x) tanh(x) exp(x) sqrt(x) log1p(x) neg(x)
  min(x, y) max(x, y) pow(x, y) clip(x, lo, hi)

feature(i) is a vector with one entry per candidate; params and numbers are
scalars and broadcast. A line starting with an operator continues the
previous line. '#' starts a comment. Any non-finite intermediate value makes
the program invalid. Every feature(i) in the body must be listed in
used_features, and every param(j) must have a bound.
)";
}

std::string program_with_theta(const ScoreProgram& program, std::span<const double> theta) {
  ScoreProgram copy = program;
  copy.params.assign(theta.begin(), theta.end());
  return serialize_program(copy);
}

namespace {

std::string metrics_line(const ProgramRecord& r) {
  return "cost=" + format_shortest(r.cost) + " subset_cost=" + format_shortest(r.subset_cost) +
         " iteration=" + std::to_string(r.iteration) + " id=" + std::to_string(r.id);
}

}  // namespace

PromptBundle build_prompt(const ProgramRecord& parent, std::span<const ProgramRecord* const> inspirations,
                          std::string_view feature_doc, std::string_view grammar) {
  PromptBundle p;
  p.system =
      "You design variable selection rules for a branch-and-bound MILP solver.\n"
      "\n"
      "A rule is a score program. At every node it receives a matrix with one row per\n"
      "fractional candidate and 91 feature columns, each column rescaled to [0, 1] over\n"
      "the candidates of that node, plus a parameter vector. It returns one number per\n"
      "candidate and the solver branches on the highest. Programs are judged by the\n"
      "solver cost they produce, where lower is better.\n"
      "\n"
      "Requirements:\n"
      "- write the program in the score language described below\n"
      "- read at most 10 distinct features and list exactly those in used_features\n"
      "- move tunable constants into params and give each one a [lo, hi] pair in bounds;\n"
      "  write every pair out, shorthand such as [0, 1] * 10 is rejected\n"
      "- reply with the complete program inside a single fenced code block\n"
      "\n"
      "# Score language\n";
  p.system += grammar;
  p.system += "\n# Features\n";
  p.system += feature_doc;
  if (!p.system.empty() && p.system.back() != '\n') p.system += '\n';

  p.user = "# Current program\n";
  p.user += "metrics: " + metrics_line(parent) + "\n";
  p.user += "```\n" + program_with_theta(parent.program, parent.theta) + "```\n\n";
  p.user += "# Inspiration programs\n";
  if (inspirations.empty()) {
    p.user += "(none)\n";
  } else {
    for (std::size_t k = 0; k < inspirations.size(); ++k) {
      const ProgramRecord& r = *inspirations[k];
      p.user += "## Inspiration " + std::to_string(k + 1) + "\n";
      p.user += "metrics: " + metrics_line(r) + "\n";
      p.user += "```\n" + program_with_theta(r.program, r.theta) + "```\n";
    }
  }
  p.user +=
      "\n# Task\n"
      "Write a new version of the current program that should lower its cost. The\n"
      "inspiration programs are there for ideas and need not be copied. Keep the header\n"
      "layout and reply with the full program in one fenced code block.\n";
  return p;
}

}  // namespace evobranch
