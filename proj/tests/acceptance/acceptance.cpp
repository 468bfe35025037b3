// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "evobranch/bench.hpp"
#include "evobranch/bnb.hpp"
#include "evobranch/dsl.hpp"
#include "evobranch/evolve.hpp"
#include "evobranch/features.hpp"
#include "evobranch/instances.hpp"
#include "evobranch/llm.hpp"
#include "evobranch/lp.hpp"
#include "evobranch/metrics.hpp"
#include "evobranch/param_opt.hpp"
#include "evobranch/policies.hpp"
#include "evobranch/rng.hpp"
#include "evobranch/text.hpp"
#include "oracle/naive_simplex.hpp"
#include "oracle/random_models.hpp"
#include "support/evolve_setup.hpp"
#include "support/feature_fixture.hpp"

using namespace evobranch;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fixed(double v) { return fmt::format("{:.2f}", v); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
  std::fflush(stdout);
}

// Plain 1-shifted geometric mean, written out here on purpose.
double geo1(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += std::log(x + 1.0);
  return std::exp(s / static_cast<double>(v.size())) - 1.0;
}

// ---- 1

double enumerate_binary(const oracle::DenseModel& m, bool& feasible) {
  const int n = static_cast<int>(m.c.size());
  double best = kInf;
  feasible = false;
  for (long mask = 0; mask < (1L << n); ++mask) {
    bool ok = true;
    for (std::size_t i = 0; i < m.a.size() && ok; ++i) {
      double lhs = 0.0;
      for (int j = 0; j < n; ++j) lhs += m.a[i][j] * ((mask >> j) & 1);
      ok = lhs <= m.b[i] + 1e-9;
    }
    if (!ok) continue;
    double obj = 0.0;
    for (int j = 0; j < n; ++j) obj += m.c[j] * ((mask >> j) & 1);
    feasible = true;
    best = std::min(best, obj);
  }
  return best;
}

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> nb(1, 8);
  std::uniform_int_distribution<int> nr(1, 10);
  const char* policies[] = {"most_fractional", "random", "pseudocost", "strong_branching", "rpb"};
  int agree = 0;
  int feasible_count = 0;
  for (int t = 0; t < 100; ++t) {
    const oracle::DenseModel m = oracle::random_small_milp(rng, nb(rng), 0, nr(rng));
    bool feasible = false;
    const double truth = enumerate_binary(m, feasible);
    auto policy = make_builtin_policy(policies[t % 5]);
    BnbConfig cfg;
    cfg.rng_seed = static_cast<std::uint64_t>(t);
    const BnbStats s = run_bnb(oracle::to_instance(m), *policy, cfg);
    feasible_count += feasible;
    if (!feasible) {
      agree += s.status == BnbStatus::kInfeasible;
    } else {
      agree += s.status == BnbStatus::kOptimal && std::abs(*s.incumbent_objective - truth) <= 1e-6;
    }
  }
  const double secs = seconds_since(t0);
  return {agree == 100 && secs < 30.0, std::to_string(agree) + "/100 agree (" + std::to_string(feasible_count) +
                                           " feasible), " + fixed(secs) + " s"};
}

// ---- 2

Outcome simplex_fixtures() {
  int bad = 0;
  {
    MilpInstance one;
    one.add_var(-1.0, 0.0, 1.5, false);
    const LpResult lp = solve_lp_relaxation(one, Bounds::from(one));
    bad += !(lp.optimal() && std::abs(lp.objective + 1.5) <= 1e-8 && std::abs(lp.x[0] - 1.5) <= 1e-8);
  }
  {
    MilpInstance two;
    two.add_var(-1.0, 0.0, 1.0, false);
    two.add_var(-1.0, 0.0, 1.0, false);
    two.add_le({{0, 1.0}, {1, 1.0}}, 1.0);
    const LpResult lp = solve_lp_relaxation(two, Bounds::from(two));
    bad += !(lp.optimal() && std::abs(lp.objective + 1.0) <= 1e-8);
  }
  std::mt19937_64 rng(50);
  int matched = 0;
  for (int t = 0; t < 50; ++t) {
    const auto model = oracle::random_feasible_lp(rng, 10, 20);
    const auto ref = oracle::naive_simplex(model.c, model.a, model.b, model.lo, model.hi);
    const MilpInstance inst = oracle::to_instance(model);
    const LpResult lp = solve_lp_relaxation(inst, Bounds::from(inst));
    matched += ref.status == oracle::Status::kOptimal && lp.optimal() && std::abs(lp.objective - ref.objective) <= 1e-7;
  }
  return {bad == 0 && matched == 50,
          std::to_string(2 - bad) + "/2 fixtures, " + std::to_string(matched) + "/50 random LPs match"};
}

// ---- 3

Outcome feature_contract() {
  GeneratorSpec spec = *find_preset("setcover-desk");
  spec.count = 10;
  long nodes_seen = 0;
  long bad = 0;
  for (const MilpInstance& inst : generate(spec)) {
    const StaticFeatureCache cache = precompute_static(inst);
    support::Probe probe([&](const NodeContext& ctx, std::span<const int> cands) {
      ++nodes_seen;
      const FeatureMatrix raw = extract_features(ctx, cache, cands);
      if (raw.rows != static_cast<int>(cands.size()) ||
          raw.values.size() != cands.size() * static_cast<std::size_t>(kNumFeatures)) {
        ++bad;
      }
      for (double v : raw.values) bad += !std::isfinite(v);
      for (double v : normalize_per_node(raw).values) bad += !(v >= 0.0 && v <= 1.0);
    });
    BnbConfig cfg;
    cfg.node_limit = 25;
    run_bnb(inst, probe, cfg);
  }
  support::FixtureNode n = support::fixture_node();
  const StaticFeatureCache cache = precompute_static(n.instance);
  const std::vector<int> cands{0, 1};
  const FeatureMatrix m =
      extract_features(NodeContext{n.instance, n.bounds, n.lp, n.state, 0, 0, std::nullopt}, cache, cands);
  const auto expected = support::read_feature_fixture(std::string(EVOBRANCH_FIXTURE_DIR) + "/feature_node.txt");
  double worst = 0.0;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < kNumFeatures; ++c) worst = std::max(worst, std::abs(m.at(r, c) - expected[r][c]));
  }
  return {nodes_seen > 0 && bad == 0 && worst <= 1e-9,
          std::to_string(nodes_seen) + " nodes checked, " + std::to_string(bad) +
              " violations, fixture max error " + format_shortest(worst)};
}

// ---- 4

Outcome dsl_regression() {
  const char* names[] = {"setcover", "cauctions", "facilities", "indset", "item_placement", "nnverify"};
  std::vector<ScoreProgram> programs;
  int round_trips = 0;
  for (const char* name : names) {
    ScoreProgram p = parse_program(read_file(std::string(EVOBRANCH_PROGRAM_DIR) + "/" + name + ".spl"));
    const std::string text = serialize_program(p);
    round_trips += same_program(p, parse_program(text)) && serialize_program(parse_program(text)) == text;
    programs.push_back(std::move(p));
  }
  const bool printed = programs[0].params.size() == 7 && programs[0].params[1] == 0.5887010792086566;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  long non_finite = 0;
  for (int t = 0; t < 1000; ++t) {
    FeatureMatrix m;
    m.rows = 1 + t % 17;
    m.normalized = true;
    m.values.resize(static_cast<std::size_t>(m.rows) * kNumFeatures);
    for (double& v : m.values) {
      const double r = u(rng);
      v = r < 0.1 ? 0.0 : r > 0.9 ? 1.0 : u(rng);
    }
    for (const ScoreProgram& p : programs) {
      for (double s : evaluate(p, p.params, m)) non_finite += !std::isfinite(s);
    }
  }
  return {round_trips == 6 && printed && non_finite == 0,
          std::to_string(round_trips) + "/6 round-trip, printed theta " + (printed ? "kept" : "LOST") + ", " +
              std::to_string(non_finite) + " non-finite scores over 1000 matrices"};
}

// ---- 5

std::vector<std::string> split_commas(const std::string& row) {
  std::vector<std::string> out;
  std::stringstream ss(row);
  for (std::string f; std::getline(ss, f, ',');) out.push_back(f);
  return out;
}

Outcome metric_exactness() {
  const bool exact = shifted_geomean(std::vector<double>{1.0, 7.0}, 1.0) == 3.0;
  std::vector<MilpInstance> instances;
  for (std::uint64_t seed = 0; instances.size() < 5; ++seed) instances.push_back(gen_set_cover(50, 100, 0.06, seed));
  const std::vector<BenchPolicy> policies{parse_policy_spec("random"), parse_policy_spec("most_fractional"),
                                          parse_policy_spec("pseudocost")};
  int mismatches = 0;
  int checked = 0;
  for (WinMetric win : {WinMetric::kTime, WinMetric::kNodes}) {
    BenchConfig cfg;
    cfg.win_by = win;
    std::ostringstream csv;
    write_report_csv(csv, run_benchmark(policies, instances, cfg));
    // re-read the text by hand and recompute every summary number
    std::istringstream in(csv.str());
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<std::string>> cells;
    while (std::getline(in, line) && !line.empty()) cells.push_back(split_commas(line));
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto s = split_commas(line);
      std::vector<double> t;
      std::vector<double> nd;
      int finished = 0;
      int wins = 0;
      for (const auto& c : cells) {
        if (c[0] != s[0]) continue;
        t.push_back(std::stod(c[4]));
        nd.push_back(std::stod(c[3]));
        const bool fin = c[2] == "optimal" || c[2] == "infeasible";
        finished += fin;
        if (!fin) continue;
        const int key = win == WinMetric::kNodes ? 3 : 4;
        bool best = true;
        for (const auto& o : cells) {
          const bool ofin = o[2] == "optimal" || o[2] == "infeasible";
          if (o[1] == c[1] && ofin && std::stod(o[key]) < std::stod(c[key])) best = false;
        }
        wins += best;
      }
      ++checked;
      mismatches += std::abs(std::stod(s[1]) - geo1(t)) > 1e-12 * std::max(1.0, geo1(t));
      mismatches += std::abs(std::stod(s[2]) - geo1(nd)) > 1e-12 * std::max(1.0, geo1(nd));
      mismatches += std::stoi(s[3]) != wins;
      mismatches += std::stoi(s[4]) != finished;
    }
  }
  return {exact && mismatches == 0 && checked == 6,
          std::string("geomean{1,7}=3 ") + (exact ? "exact" : "NOT exact") + ", " + std::to_string(checked) +
              " summary rows recomputed, " + std::to_string(mismatches) + " mismatches"};
}

// ---- 6

Outcome filter_boundary() {
  const FilterResult at = check_node_ratio(std::vector<long>{125}, std::vector<long>{100});
  const FilterResult over = check_node_ratio(std::vector<long>{126}, std::vector<long>{100});
  return {at.pass && !over.pass, std::string("125/100 ") + (at.pass ? "passes" : "fails") + ", 126/100 " +
                                     (over.pass ? "passes" : "fails") + " (" + over.reason + ")"};
}

// ---- 7

Outcome tuner() {
  auto run = [](int dims, std::uint64_t seed, int& calls) {
    std::vector<std::pair<double, double>> box(dims, {0.0, 1.0});
    calls = 0;
    const BoxObjective f = [&](std::span<const double> t) {
      ++calls;
      double v = (t[0] - 0.3) * (t[0] - 0.3);
      if (dims == 2) v = (t[0] - 0.2) * (t[0] - 0.2) + (t[1] - 0.8) * (t[1] - 0.8);
      return CostEvaluation{v, {}};
    };
    OptBudget b;
    b.max_iterations = 50;
    b.rng_seed = seed;
    return minimize_in_box(f, std::vector<double>(dims, dims == 1 ? 0.9 : 0.5), box, b);
  };
  int c1 = 0;
  int c2 = 0;
  const OptResult one = run(1, 7, c1);
  const OptResult two = run(2, 7, c2);
  auto monotone = [](const OptResult& r) {
    for (std::size_t t = 1; t < r.best_so_far.size(); ++t) {
      if (r.best_so_far[t] > r.best_so_far[t - 1]) return false;
    }
    return true;
  };
  const bool ok = one.cost <= 1e-2 && two.cost <= 5e-2 && c1 <= 50 && c2 <= 50 && monotone(one) && monotone(two);
  return {ok, "1-D cost " + format_shortest(one.cost) + " in " + std::to_string(c1) + " evals, 2-D cost " +
                  format_shortest(two.cost) + " in " + std::to_string(c2) + " evals"};
}

// ---- 8

Outcome end_to_end_evolution() {
  const auto replies = ScriptedLlmClient::split_fixture(read_file(support::fixture("evolve_three.txt")));
  support::TempDir a_dir("acc_evolve_a");
  support::TempDir b_dir("acc_evolve_b");
  support::TempDir c_dir("acc_evolve_c");
  const EvolutionConfig a = support::evolve_config(a_dir.path(), 3);
  // oracle: evaluate each fixture program directly on the full set
  double best_direct = kInf;
  ScoreProgram best_program;
  for (const auto& r : replies) {
    const ScoreProgram p = parse_llm_response(r);
    const double cost = evaluate_cost(p, p.params, a.instances, a.metric, a.tuning.solve_config());
    if (cost < best_direct) {
      best_direct = cost;
      best_program = p;
    }
  }
  ScriptedLlmClient la(replies);
  const EvolutionResult ra = evolve(a, la);
  const bool known_best = ra.best.cost == best_direct && same_program(ra.best.program, best_program);

  const EvolutionConfig b = support::evolve_config(b_dir.path(), 3);
  ScriptedLlmClient lb(replies);
  evolve(b, lb);
  const bool deterministic = read_file(a.database) == read_file(b.database);

  bool nonincreasing = true;
  for (std::size_t t = 1; t < ra.best_cost_history.size(); ++t) {
    nonincreasing = nonincreasing && ra.best_cost_history[t] <= ra.best_cost_history[t - 1];
  }

  EvolutionConfig c = support::evolve_config(c_dir.path(), 2);
  ScriptedLlmClient lc1(replies);
  evolve(c, lc1);
  append_line(c.database, R"({"v":1,"id":3,"program":"torn","iteration":3})");
  c.iterations = 3;
  ScriptedLlmClient lc2(replies);
  evolve(c, lc2);
  const bool resumed = read_file(c.database) == read_file(a.database);

  return {known_best && deterministic && nonincreasing && resumed,
          std::string("known best ") + (known_best ? "found" : "MISSED") + " (cost " + format_shortest(ra.best.cost) +
              "), db " + (deterministic ? "byte-identical" : "DIFFERS") + ", curve " +
              (nonincreasing ? "nonincreasing" : "RISES") + ", resume " + (resumed ? "matches" : "DIFFERS")};
}

// ---- 9 and 10 share one benchmark over the desk set cover suite

struct SuiteNodes {
  double random = 0.0;
  double most_fractional = 0.0;
  double strong_branching = 0.0;
  double discovered = 0.0;
  double seconds = 0.0;
};

const SuiteNodes& desk_suite() {
  static const SuiteNodes nodes = [] {
    const auto t0 = Clock::now();
    GeneratorSpec spec = *find_preset("setcover-desk");
    spec.count = 20;
    const auto instances = generate(spec);
    const std::vector<BenchPolicy> policies{
        parse_policy_spec("random"), parse_policy_spec("most_fractional"), parse_policy_spec("strong_branching"),
        parse_policy_spec("dsl:" EVOBRANCH_PROGRAM_DIR "/setcover.spl")};
    BenchConfig cfg;
    cfg.win_by = WinMetric::kNodes;
    const RunReport r = run_benchmark(policies, instances, cfg);
    std::vector<double> per[4];
    for (std::size_t k = 0; k < r.cells.size(); ++k) {
      per[k / instances.size()].push_back(static_cast<double>(r.cells[k].nodes));
    }
    SuiteNodes s;
    s.random = geo1(per[0]);
    s.most_fractional = geo1(per[1]);
    s.strong_branching = geo1(per[2]);
    s.discovered = geo1(per[3]);
    s.seconds = seconds_since(t0);
    return s;
  }();
  return nodes;
}

Outcome directional_quality() {
  const SuiteNodes& s = desk_suite();
  const bool ok = s.strong_branching < s.most_fractional && s.most_fractional < s.random &&
                  s.strong_branching <= 0.5 * s.random && s.seconds < 600.0;
  return {ok, "geomean nodes sb " + fixed(s.strong_branching) + " < mf " + fixed(s.most_fractional) +
                  " < random " + fixed(s.random) + ", suite " + fixed(s.seconds) + " s"};
}

Outcome discovered_policy() {
  const SuiteNodes& s = desk_suite();
  return {s.discovered <= s.most_fractional,
          "setcover program " + fixed(s.discovered) + " vs most_fractional " + fixed(s.most_fractional)};
}

// ---- 11

Outcome exploration_split() {
  IslandDatabase db(4);
  const char* bodies[] = {"feature(3)", "feature(9) * param(0)", "feature(40) + param(0)"};
  const int feats[] = {3, 9, 40};
  for (int k = 0; k < 3; ++k) {
    ProgramRecord r;
    r.program = parse_program("used_features: [" + std::to_string(feats[k]) +
                              "]\nparams: [0.5]\nbounds: [[0, 1]]\nscore:\n  return " + bodies[k] + "\n");
    r.theta = r.program.params;
    r.cost = r.subset_cost = 10.0 + k;
    db.insert(r);
  }
  Rng rng(2024);
  int explore = 0;
  for (int k = 0; k < 10000; ++k) explore += sample_parent(db, rng, 0.7).exploration;
  const double frac = explore / 10000.0;
  return {frac >= 0.68 && frac <= 0.72, "exploration fraction " + format_shortest(frac)};
}

}  // namespace

int main() {
  report(1, "oracle equivalence", oracle_equivalence);
  report(2, "simplex fixtures", simplex_fixtures);
  report(3, "feature contract", feature_contract);
  report(4, "score program regression", dsl_regression);
  report(5, "metric exactness", metric_exactness);
  report(6, "filter boundary", filter_boundary);
  report(7, "tuner", tuner);
  report(8, "end-to-end evolution", end_to_end_evolution);
  report(9, "directional solver quality", directional_quality);
  report(10, "discovered policy sanity", discovered_policy);
  report(11, "exploration split", exploration_split);
  std::printf("%d/11 criteria pass\n", 11 - failures);
  return failures == 0 ? 0 : 1;
}
