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

// Command-line front end: generate, solve, tune, evolve, bench, report.
// Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.

#include <CLI11.hpp>
#include <fmt/core.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "evobranch/bench.hpp"
#include "evobranch/config.hpp"
#include "evobranch/dsl.hpp"
#include "evobranch/evolve.hpp"
#include "evobranch/features.hpp"
#include "evobranch/instances.hpp"
#include "evobranch/llm.hpp"
#include "evobranch/param_opt.hpp"
#include "evobranch/policies.hpp"
#include "evobranch/text.hpp"

namespace fs = std::filesystem;
using namespace evobranch;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string config;
  int workers = 1;
  bool quiet = false;
};

struct Limits {
  std::optional<long> node_limit;
  std::optional<double> time_limit;
};

void add_limits(CLI::App* cmd, Limits& l) {
  cmd->add_option("--node-limit", l.node_limit, "B&B node limit per solve");
  cmd->add_option("--time-limit", l.time_limit, "time limit per solve, seconds");
}

KeyValueConfig optional_config(const Globals& g) {
  return g.config.empty() ? KeyValueConfig{} : KeyValueConfig::load(g.config);
}

BnbConfig solve_config(const Globals& g, const Limits& l) {
  BnbConfig cfg = solve_config_from(optional_config(g));
  if (l.node_limit) cfg.node_limit = *l.node_limit;
  if (l.time_limit) cfg.time_limit = *l.time_limit;
  if (g.seed) cfg.rng_seed = *g.seed;
  return cfg;
}

// Instances named after their file, so reports line up with the inputs.
std::vector<MilpInstance> load_instances(const std::vector<std::string>& files) {
  std::vector<MilpInstance> out;
  for (const auto& f : files) {
    MilpInstance inst = read_instance(f);
    inst.name = fs::path(f).stem().string();
    out.push_back(std::move(inst));
  }
  return out;
}

MetricKind parse_metric(const std::string& s) {
  if (s == "nodes") return MetricKind::kNodes;
  if (s == "gap") return MetricKind::kGap;
  if (s == "time") return MetricKind::kTime;
  throw UsageError("unknown metric '" + s + "'");
}

// ---- generate

struct GenerateArgs {
  std::string preset;
  std::string family;
  int size_a = 0;
  int size_b = 0;
  double density = 0.05;
  int count = 1;
  std::string out;
};

int cmd_generate(const Globals& g, const GenerateArgs& a) {
  GeneratorSpec spec;
  if (!a.preset.empty()) {
    const auto p = find_preset(a.preset);
    if (!p) throw UsageError("unknown preset '" + a.preset + "'");
    spec = *p;
  } else {
    const auto f = parse_family(a.family);
    if (!f) throw UsageError("give --preset or a known --family");
    spec.family = *f;
    spec.size_a = a.size_a;
    spec.size_b = a.size_b;
    spec.density = a.density;
  }
  spec.count = a.count;
  spec.seed = g.seed.value_or(0);
  fs::create_directories(a.out);
  for (const MilpInstance& inst : generate(spec)) {
    const fs::path path = fs::path(a.out) / (inst.name + ".mip");
    write_instance(path, inst);
    if (!g.quiet) fmt::print("{}\n", path.string());
  }
  return 0;
}

// ---- solve

struct SolveArgs {
  std::string instance;
  std::string policy = "rpb";
  Limits limits;
};

int cmd_solve(const Globals& g, const SolveArgs& a) {
  const MilpInstance inst = read_instance(a.instance);
  const BenchPolicy policy = parse_policy_spec(a.policy);
  auto p = policy.factory();
  const BnbStats s = run_bnb(inst, *p, solve_config(g, a.limits));
  fmt::print("status {}\nnodes {}\n", to_string(s.status), s.nodes);
  fmt::print("objective {}\n", s.incumbent_objective ? format_shortest(*s.incumbent_objective) : "none");
  fmt::print("bound {}\ngap {}\ntime_s {}\n", format_shortest(s.best_bound), format_shortest(s.gap),
             format_shortest(s.wall_time));
  return 0;
}

// ---- tune

struct TuneArgs {
  std::string program;
  std::vector<std::string> instances;
  int trials = 50;
  std::string metric = "nodes";
  double metric_time_limit = 0.0;
  std::string trials_csv;
  std::string out_program;
  Limits limits;
};

int cmd_tune(const Globals& g, const TuneArgs& a) {
  const ScoreProgram skeleton = parse_program(read_file(a.program));
  const auto instances = load_instances(a.instances);
  const BnbConfig base = solve_config(g, a.limits);
  OptBudget budget;
  budget.max_iterations = a.trials;
  budget.node_limit = base.node_limit;
  budget.time_limit = base.time_limit;
  budget.rng_seed = base.rng_seed;
  CostMetric metric{parse_metric(a.metric), 1.0, a.metric_time_limit};
  const OptResult r = optimize_params(skeleton, skeleton.params, instances, metric, budget, g.workers);
  if (!a.trials_csv.empty()) {
    std::ofstream out(a.trials_csv);
    std::vector<std::string> names;
    for (const auto& inst : instances) names.push_back(inst.name);
    write_trial_csv(out, r, names);
  }
  if (!a.out_program.empty()) write_file_atomic(a.out_program, program_with_theta(skeleton, r.theta));
  std::string theta;
  for (double v : r.theta) theta += (theta.empty() ? "" : ", ") + format_shortest(v);
  fmt::print("theta [{}]\ncost {}\ntrials {}\n", theta, format_shortest(r.cost), r.trials.size());
  return r.failed ? 2 : 0;
}

// ---- evolve

struct EvolveArgs {
  std::optional<int> iterations;
};

int cmd_evolve(const Globals& g, const EvolveArgs& a) {
  if (g.config.empty()) throw UsageError("evolve needs --config <file>");
  const KeyValueConfig kv = KeyValueConfig::load(g.config);
  EvolutionConfig cfg = evolution_config_from(kv, fs::absolute(g.config).parent_path());
  if (g.seed) cfg.seed = cfg.tuning.rng_seed = *g.seed;
  if (g.workers > 1) cfg.workers = g.workers;
  if (a.iterations) cfg.iterations = *a.iterations;
  fs::create_directories(cfg.database.parent_path());
  auto llm = make_llm_client(cfg.llm);
  const EvolutionResult r = evolve(cfg, *llm);
  if (!g.quiet) {
    if (r.resumed_from > 0) fmt::print("resumed after iteration {}\n", r.resumed_from);
    for (const char* name : kEventNames) {
      const auto it = r.event_counts.find(name);
      fmt::print("{} {}\n", name, it == r.event_counts.end() ? 0 : it->second);
    }
  }
  fmt::print("best cost {} (id {}, iteration {})\n", format_shortest(r.best.cost), r.best.id, r.best.iteration);
  fmt::print("{}", program_with_theta(r.best.program, r.best.theta));
  return 0;
}

// ---- bench

struct BenchArgs {
  std::vector<std::string> policies;
  std::vector<std::string> instances;
  std::string out;
  std::string win_by = "time";
  Limits limits;
};

void print_summary(const RunReport& r) {
  fmt::print("{:<28} {:>14} {:>14} {:>6} {:>9}\n", "policy", "geomean_time_s", "geomean_nodes", "wins", "finished");
  for (const PolicySummary& s : r.summary) {
    fmt::print("{:<28} {:>14.4f} {:>14.2f} {:>6} {:>5}/{:<3}\n", s.policy, s.geomean_time_s, s.geomean_nodes, s.wins,
               s.finished, s.cells);
  }
}

int cmd_bench(const Globals& g, const BenchArgs& a) {
  if (a.win_by != "time" && a.win_by != "nodes") throw UsageError("--win-by is time or nodes");
  std::vector<BenchPolicy> policies;
  try {
    for (const auto& p : a.policies) policies.push_back(parse_policy_spec(p));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto instances = load_instances(a.instances);
  BenchConfig cfg;
  cfg.solve = solve_config(g, a.limits);
  cfg.workers = g.workers;
  cfg.win_by = a.win_by == "nodes" ? WinMetric::kNodes : WinMetric::kTime;
  const RunReport r = run_benchmark(policies, instances, cfg);
  if (a.out.empty()) {
    write_report_csv(std::cout, r);
  } else {
    std::ostringstream csv;
    write_report_csv(csv, r);
    write_file_atomic(a.out, csv.str());
    if (!g.quiet) print_summary(r);
  }
  return 0;
}

// ---- report

struct ReportArgs {
  bool features = false;
  std::string database;
  std::string trials;
  std::string bench;
  int islands = 4;
};

int cmd_report(const Globals& g, const ReportArgs& a) {
  (void)g;
  if (!a.features && a.database.empty() && a.trials.empty() && a.bench.empty()) {
    throw UsageError("report needs --features, --database, --trials or --bench");
  }
  if (a.features) fmt::print("{}", format_feature_table());
  if (!a.database.empty()) {
    const IslandDatabase db = IslandDatabase::from_jsonl(read_file(a.database), a.islands);
    fmt::print("programs {}\n", db.size());
    for (int k = 0; k < a.islands; ++k) {
      const auto& members = db.island(k);
      if (members.empty()) {
        fmt::print("island {}: empty\n", k);
        continue;
      }
      const ProgramRecord* best = nullptr;
      for (std::size_t i : members) {
        if (!best || db.records()[i].cost < best->cost) best = &db.records()[i];
      }
      fmt::print("island {}: {} programs, best cost {} (id {})\n", k, members.size(), format_shortest(best->cost),
                 best->id);
    }
    if (db.size() > 0) {
      const ProgramRecord& best = db.best();
      fmt::print("best id {} cost {}\n{}", best.id, format_shortest(best.cost),
                 program_with_theta(best.program, best.theta));
    }
  }
  if (!a.trials.empty()) {
    // trial,theta_0..,cost,nodes_<name>..: report the cheapest row
    const std::string text = read_file(a.trials);
    const auto lines = split_lines(text);
    if (lines.empty()) throw std::runtime_error("empty trial log");
    const std::string header(trim(lines[0]));
    std::size_t cost_col = 0;
    {
      std::size_t col = 0;
      std::size_t start = 0;
      for (std::size_t pos = 0; pos <= header.size(); ++pos) {
        if (pos == header.size() || header[pos] == ',') {
          if (header.substr(start, pos - start) == "cost") cost_col = col;
          ++col;
          start = pos + 1;
        }
      }
    }
    if (cost_col == 0) throw std::runtime_error("trial log has no cost column");
    std::string best_row;
    double best = kInf;
    for (std::size_t k = 1; k < lines.size(); ++k) {
      const std::string row(trim(lines[k]));
      if (row.empty()) continue;
      std::size_t start = 0;
      for (std::size_t c = 0; c < cost_col; ++c) start = row.find(',', start) + 1;
      const auto v = parse_double(row.substr(start, row.find(',', start) - start));
      if (v && *v < best) {
        best = *v;
        best_row = row;
      }
    }
    fmt::print("trials {}\nbest {}\n{}\n{}\n", lines.size() - 1, format_shortest(best), header, best_row);
  }
  if (!a.bench.empty()) {
    RunReport r = read_report_csv(read_file(a.bench));
    print_summary(r);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"evobranch: branching policies for a small MILP solver, searched with a language model"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--config", g.config, "TOML-style key/value file");
  app.add_option("--workers", g.workers, "parallel solves")->check(CLI::PositiveNumber);
  app.add_flag("--quiet", g.quiet, "less output");

  GenerateArgs gen;
  auto* c_gen = app.add_subcommand("generate", "write generated instances");
  c_gen->add_option("--preset", gen.preset, "named size preset, e.g. setcover-desk");
  c_gen->add_option("--family", gen.family, "setcover, cauctions, facilities or indset");
  c_gen->add_option("--size-a", gen.size_a, "rows, items, facilities or nodes");
  c_gen->add_option("--size-b", gen.size_b, "cols, bids, customers or affinity");
  c_gen->add_option("--density", gen.density, "set cover density");
  c_gen->add_option("--count", gen.count, "number of instances")->check(CLI::PositiveNumber);
  c_gen->add_option("--out", gen.out, "output directory")->required();

  SolveArgs solve;
  auto* c_solve = app.add_subcommand("solve", "solve one instance");
  c_solve->add_option("--instance", solve.instance, "instance file")->required()->check(CLI::ExistingFile);
  c_solve->add_option("--policy", solve.policy, "builtin name or dsl:<file>");
  add_limits(c_solve, solve.limits);

  TuneArgs tune;
  auto* c_tune = app.add_subcommand("tune", "tune the params of a score program");
  c_tune->add_option("--program", tune.program, "score program")->required()->check(CLI::ExistingFile);
  c_tune->add_option("--instances", tune.instances, "instance files")->required()->check(CLI::ExistingFile);
  c_tune->add_option("--trials", tune.trials, "evaluation budget")->check(CLI::PositiveNumber);
  c_tune->add_option("--metric", tune.metric, "nodes, gap or time");
  c_tune->add_option("--metric-time-limit", tune.metric_time_limit, "solve time limit for the gap metric");
  c_tune->add_option("--trials-csv", tune.trials_csv, "write every trial here");
  c_tune->add_option("--out-program", tune.out_program, "write the tuned program here");
  add_limits(c_tune, tune.limits);

  EvolveArgs evo;
  auto* c_evo = app.add_subcommand("evolve", "run the program search described by --config");
  c_evo->add_option("--iterations", evo.iterations, "override evolve.iterations");

  BenchArgs bench;
  auto* c_bench = app.add_subcommand("bench", "run policies over instances");
  c_bench->add_option("--policy", bench.policies, "builtin name or dsl:<file>, repeatable")->required();
  c_bench->add_option("--instances", bench.instances, "instance files")->required()->check(CLI::ExistingFile);
  c_bench->add_option("--out", bench.out, "report CSV (default stdout)");
  c_bench->add_option("--win-by", bench.win_by, "time or nodes");
  add_limits(c_bench, bench.limits);

  ReportArgs rep;
  auto* c_rep = app.add_subcommand("report", "summarize databases, trial logs and bench reports");
  c_rep->add_flag("--features", rep.features, "print the feature table");
  c_rep->add_option("--database", rep.database, "program database")->check(CLI::ExistingFile);
  c_rep->add_option("--trials", rep.trials, "trial CSV from tune")->check(CLI::ExistingFile);
  c_rep->add_option("--bench", rep.bench, "report CSV from bench")->check(CLI::ExistingFile);
  c_rep->add_option("--islands", rep.islands, "island count of the database")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*c_gen) return cmd_generate(g, gen);
    if (*c_solve) return cmd_solve(g, solve);
    if (*c_tune) return cmd_tune(g, tune);
    if (*c_evo) return cmd_evolve(g, evo);
    if (*c_bench) return cmd_bench(g, bench);
    if (*c_rep) return cmd_report(g, rep);
  } catch (const UsageError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  } catch (const ConfigError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return 1;
}
