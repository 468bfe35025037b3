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

#include "evobranch/bench.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <memory>
#include <ostream>
#include <stdexcept>

#include "evobranch/dsl.hpp"
#include "evobranch/metrics.hpp"
#include "evobranch/parallel.hpp"
#include "evobranch/policies.hpp"
#include "evobranch/text.hpp"

namespace evobranch {

std::string_view to_string(WinMetric metric) { return metric == WinMetric::kNodes ? "nodes" : "time"; }

BenchPolicy parse_policy_spec(std::string_view spec) {
  if (spec.starts_with("dsl:")) {
    const std::filesystem::path path(spec.substr(4));
    auto program = std::make_shared<const ScoreProgram>(parse_program(read_file(path)));
    return {std::string(spec), [program] { return std::make_unique<DslPolicy>(program, program->params); }};
  }
  if (!make_builtin_policy(spec)) throw std::invalid_argument("unknown policy '" + std::string(spec) + "'");
  const std::string name(spec);
  return {name, [name] { return make_builtin_policy(name); }};
}

std::vector<int> compute_wins(std::span<const BenchCell> cells, std::span<const std::string> policies,
                              WinMetric win_by) {
  if (policies.size() < 2) throw ContractViolation("compute_wins needs at least two policies");
  std::vector<int> wins(policies.size(), 0);
  auto key = [&](const BenchCell& c) {
    return win_by == WinMetric::kNodes ? static_cast<double>(c.nodes) : c.time_s;
  };
  auto policy_index = [&](const std::string& name) {
    for (std::size_t p = 0; p < policies.size(); ++p) {
      if (policies[p] == name) return p;
    }
    throw ContractViolation("cell for unknown policy '" + name + "'");
  };
  // group by instance, keeping first-seen order
  std::vector<std::string> instances;
  for (const BenchCell& c : cells) {
    if (std::find(instances.begin(), instances.end(), c.instance) == instances.end()) instances.push_back(c.instance);
  }
  for (const std::string& inst : instances) {
    double best = kInf;
    for (const BenchCell& c : cells) {
      if (c.instance == inst && c.finished()) best = std::min(best, key(c));
    }
    for (const BenchCell& c : cells) {
      if (c.instance == inst && c.finished() && key(c) == best) ++wins[policy_index(c.policy)];
    }
  }
  return wins;
}

void summarize(RunReport& report) {
  report.summary.clear();
  std::vector<int> wins(report.policies.size(), 0);
  if (report.policies.size() >= 2) wins = compute_wins(report.cells, report.policies, report.win_by);
  for (std::size_t p = 0; p < report.policies.size(); ++p) {
    PolicySummary s;
    s.policy = report.policies[p];
    s.wins = wins[p];
    std::vector<double> times;
    std::vector<double> nodes;
    for (const BenchCell& c : report.cells) {
      if (c.policy != s.policy) continue;
      ++s.cells;
      if (c.finished()) ++s.finished;
      if (c.status == "error") continue;
      times.push_back(c.time_s);
      nodes.push_back(static_cast<double>(c.nodes));
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.geomean_time_s = times.empty() ? nan : shifted_geomean(times);
    s.geomean_nodes = nodes.empty() ? nan : shifted_geomean(nodes);
    report.summary.push_back(s);
  }
}

RunReport run_benchmark(std::span<const BenchPolicy> policies, std::span<const MilpInstance> instances,
                        const BenchConfig& config) {
  if (policies.empty() || instances.empty()) throw ContractViolation("benchmark needs policies and instances");
  config.solve.validate();
  RunReport report;
  report.win_by = config.win_by;
  for (const auto& p : policies) report.policies.push_back(p.label);
  for (std::size_t i = 0; i < instances.size(); ++i) {
    report.instances.push_back(instances[i].name.empty() ? "instance" + std::to_string(i) : instances[i].name);
  }
  const std::size_t n_inst = instances.size();
  report.cells.resize(policies.size() * n_inst);
  parallel_for(report.cells.size(), config.workers, [&](std::size_t k) {
    const std::size_t p = k / n_inst;
    const std::size_t i = k % n_inst;
    BenchCell& cell = report.cells[k];
    cell.policy = report.policies[p];
    cell.instance = report.instances[i];
    try {
      auto policy = policies[p].factory();
      const BnbStats s = run_bnb(instances[i], *policy, config.solve);
      cell.status = to_string(s.status);
      cell.nodes = s.nodes;
      cell.time_s = s.wall_time;
      cell.gap = s.gap;
    } catch (const std::exception&) {
      cell.status = "error";
    }
  });
  summarize(report);
  return report;
}

namespace {

std::string number(double v) { return std::isnan(v) ? "nan" : format_shortest(v); }

double parse_number(std::string_view field, std::size_t line) {
  if (field == "nan") return std::numeric_limits<double>::quiet_NaN();
  const auto v = parse_double(field);
  if (!v) throw std::runtime_error("report line " + std::to_string(line) + ": bad number '" + std::string(field) + "'");
  return *v;
}

long parse_count(std::string_view field, std::size_t line) {
  const auto v = parse_int(field);
  if (!v) throw std::runtime_error("report line " + std::to_string(line) + ": bad count '" + std::string(field) + "'");
  return static_cast<long>(*v);
}

std::vector<std::string_view> fields_of(std::string_view row) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t pos; (pos = row.find(',', start)) != std::string_view::npos; start = pos + 1) {
    out.push_back(row.substr(start, pos - start));
  }
  out.push_back(row.substr(start));
  return out;
}

void check_field(const std::string& s) {
  if (s.find_first_of(",\n\r") != std::string::npos) throw ContractViolation("CSV field contains a separator: " + s);
}

}  // namespace

void write_report_csv(std::ostream& out, const RunReport& report) {
  out << kBenchHeader << '\n';
  for (const BenchCell& c : report.cells) {
    check_field(c.policy);
    check_field(c.instance);
    out << c.policy << ',' << c.instance << ',' << c.status << ',' << c.nodes << ',' << number(c.time_s) << ','
        << number(c.gap) << '\n';
  }
  out << '\n' << kSummaryHeader << '\n';
  for (const PolicySummary& s : report.summary) {
    out << s.policy << ',' << number(s.geomean_time_s) << ',' << number(s.geomean_nodes) << ',' << s.wins << ','
        << s.finished << ',' << s.cells << ',' << to_string(report.win_by) << '\n';
  }
}

RunReport read_report_csv(std::string_view text) {
  RunReport report;
  const auto lines = split_lines(text);
  std::size_t k = 0;
  if (lines.empty() || trim(lines[0]) != kBenchHeader) throw std::runtime_error("report: missing cell header");
  for (k = 1; k < lines.size() && !trim(lines[k]).empty(); ++k) {
    const auto f = fields_of(trim(lines[k]));
    if (f.size() != 6) throw std::runtime_error("report line " + std::to_string(k + 1) + ": expected 6 fields");
    BenchCell c{std::string(f[0]), std::string(f[1]), std::string(f[2]), parse_count(f[3], k + 1),
                parse_number(f[4], k + 1), parse_number(f[5], k + 1)};
    if (std::find(report.policies.begin(), report.policies.end(), c.policy) == report.policies.end()) {
      report.policies.push_back(c.policy);
    }
    if (std::find(report.instances.begin(), report.instances.end(), c.instance) == report.instances.end()) {
      report.instances.push_back(c.instance);
    }
    report.cells.push_back(std::move(c));
  }
  while (k < lines.size() && trim(lines[k]).empty()) ++k;
  if (k >= lines.size() || trim(lines[k]) != kSummaryHeader) throw std::runtime_error("report: missing summary header");
  for (++k; k < lines.size(); ++k) {
    if (trim(lines[k]).empty()) continue;
    const auto f = fields_of(trim(lines[k]));
    if (f.size() != 7) throw std::runtime_error("report line " + std::to_string(k + 1) + ": expected 7 fields");
    PolicySummary s;
    s.policy = std::string(f[0]);
    s.geomean_time_s = parse_number(f[1], k + 1);
    s.geomean_nodes = parse_number(f[2], k + 1);
    s.wins = static_cast<int>(parse_count(f[3], k + 1));
    s.finished = static_cast<int>(parse_count(f[4], k + 1));
    s.cells = static_cast<int>(parse_count(f[5], k + 1));
    report.win_by = f[6] == "nodes" ? WinMetric::kNodes : WinMetric::kTime;
    report.summary.push_back(s);
  }
  return report;
}

}  // namespace evobranch
