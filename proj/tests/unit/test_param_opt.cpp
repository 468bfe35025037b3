#include <doctest.h>

#include <cmath>
#include <sstream>

#include "evobranch/instances.hpp"
#include "evobranch/metrics.hpp"
#include "evobranch/param_opt.hpp"
#include "evobranch/policies.hpp"

using namespace evobranch;

namespace {

const char* kBlend =
    "used_features: [9, 43]\n"
    "params: [0.8]\n"
    "bounds: [[0, 1]]\n"
    "score:\n"
    "  return param(0) * feature(9) + (1 - param(0)) * feature(43)\n";

const char* kBroken =
    "used_features: [9]\n"
    "params: []\n"
    "bounds: []\n"
    "score:\n"
    "  return sqrt(feature(9) - 2)\n";

// LP relaxation is already integral, so no policy is ever consulted.
MilpInstance root_integral() { return comb_auction_from_bids(2, {Bid{{0}, 5.0}, Bid{{1}, 3.0}}); }

// Instances that actually branch, so a policy is consulted.
std::vector<MilpInstance> tiny_setcovers(int count, std::uint64_t seed) {
  std::vector<MilpInstance> out;
  for (int k = 0; out.size() < static_cast<std::size_t>(count); ++k) {
    MilpInstance inst = gen_set_cover(60, 120, 0.06, seed + k);
    MostFractionalPolicy probe;
    if (run_bnb(inst, probe, BnbConfig{}).nodes > 0) out.push_back(std::move(inst));
  }
  return out;
}

OptBudget budget(int trials, std::uint64_t seed = 0) {
  OptBudget b;
  b.max_iterations = trials;
  b.rng_seed = seed;
  return b;
}

CostEvaluation cost_of(double v) { return CostEvaluation{v, {}}; }

}  // namespace

TEST_CASE("shifted geometric mean examples") {
  CHECK(shifted_geomean(std::vector<double>{1.0, 7.0}, 1.0) == 3.0);
  CHECK(shifted_geomean(std::vector<double>{0.0}, 1.0) == 0.0);
  CHECK(shifted_geomean(std::vector<double>{5.0}, 1.0) == 5.0);
  CHECK(shifted_geomean(std::vector<double>{2.0, 8.0}, 0.0) == doctest::Approx(4.0));
  CHECK_THROWS_AS(shifted_geomean(std::vector<double>{}, 1.0), ContractViolation);
  CHECK_THROWS_AS(shifted_geomean(std::vector<double>{-1.0}, 1.0), ContractViolation);
}

TEST_CASE("cost of a root-integral instance is zero") {
  const ScoreProgram p = parse_program(kBlend);
  const std::vector<MilpInstance> one{root_integral()};
  CHECK(evaluate_cost(p, p.params, one, CostMetric{}, BnbConfig{}) == 0.0);
}

TEST_CASE("node cost matches an independent geomean of the logged counts") {
  const auto subset = tiny_setcovers(4, 40);
  const PolicyFactory pc = [] { return make_builtin_policy("pseudocost"); };
  const CostEvaluation ce = evaluate_policy(pc, subset, CostMetric{}, BnbConfig{});
  REQUIRE(ce.outcomes.size() == 4);
  double log_sum = 0.0;
  for (const auto& o : ce.outcomes) log_sum += std::log(o.nodes + 1.0);
  CHECK(ce.cost == doctest::Approx(std::exp(log_sum / 4.0) - 1.0).epsilon(1e-12));
  // two workers give the same cells in the same order
  const CostEvaluation par = evaluate_policy(pc, subset, CostMetric{}, BnbConfig{}, 2);
  for (std::size_t i = 0; i < 4; ++i) CHECK(par.outcomes[i].nodes == ce.outcomes[i].nodes);
  CHECK(par.cost == ce.cost);
}

TEST_CASE("gap and time metrics") {
  const auto subset = tiny_setcovers(2, 60);
  const PolicyFactory mf = [] { return make_builtin_policy("most_fractional"); };
  CostMetric gap{MetricKind::kGap, 1.0, 5.0};
  CHECK(evaluate_policy(mf, subset, gap, BnbConfig{}).cost == doctest::Approx(0.0));
  CHECK_THROWS(evaluate_policy(mf, subset, CostMetric{MetricKind::kGap, 1.0, 0.0}, BnbConfig{}));
  const CostEvaluation t = evaluate_policy(mf, subset, CostMetric{MetricKind::kTime}, BnbConfig{});
  CHECK(std::isfinite(t.cost));
  CHECK(t.cost >= 0.0);
}

TEST_CASE("policy errors become the failed-cost sentinel") {
  const ScoreProgram p = parse_program(kBroken);
  const auto subset = tiny_setcovers(2, 40);
  const PolicyFactory f = [&] { return std::make_unique<DslPolicy>(std::make_shared<ScoreProgram>(p), p.params); };
  const CostEvaluation ce = evaluate_policy(f, subset, CostMetric{}, BnbConfig{});
  CHECK(ce.cost == kFailedCost);
  CHECK(ce.outcomes[0].failed);
  CHECK(ce.outcomes[0].error.find("non-finite") != std::string::npos);
  CHECK(evaluate_cost(p, p.params, subset, CostMetric{}, BnbConfig{}) == kFailedCost);
}

TEST_CASE("node ratio boundary is inclusive at 125 percent") {
  CHECK(check_node_ratio(std::vector<long>{125}, std::vector<long>{100}).pass);
  const FilterResult over = check_node_ratio(std::vector<long>{126}, std::vector<long>{100});
  CHECK_FALSE(over.pass);
  CHECK(over.instance == 0);
  CHECK(over.reason == "nodes@0:126>125");
  CHECK(check_node_ratio(std::vector<long>{0, 5}, std::vector<long>{0, 4}).pass);
  const FilterResult second = check_node_ratio(std::vector<long>{0, 1}, std::vector<long>{0, 0});
  CHECK(second.instance == 1);
}

TEST_CASE("fast filter reports the first failing instance") {
  const ScoreProgram broken = parse_program(kBroken);
  std::vector<MilpInstance> subset{root_integral(), root_integral()};
  subset.push_back(tiny_setcovers(1, 40)[0]);
  const std::vector<long> base{0, 0, 1000};
  const FilterResult r = fast_filter(broken, broken.params, subset, base, BnbConfig{});
  CHECK_FALSE(r.pass);
  CHECK(r.reason == "eval_error@2");
  CHECK(r.instance == 2);

  const ScoreProgram blend = parse_program(kBlend);
  const auto sc = tiny_setcovers(3, 40);
  std::vector<long> own;
  for (const auto& inst : sc) {
    DslPolicy policy(std::make_shared<ScoreProgram>(blend), blend.params);
    own.push_back(run_bnb(inst, policy, BnbConfig{}).nodes);
  }
  CHECK(fast_filter(blend, blend.params, sc, own, BnbConfig{}).pass);
  std::vector<long> strict = own;
  for (auto& n : strict) n = n * 4 / 5 - 1;
  if (own[0] > 4) CHECK_FALSE(fast_filter(blend, blend.params, sc, strict, BnbConfig{}).pass);
}

TEST_CASE("baseline counts come from the named builtin") {
  const auto sc = tiny_setcovers(2, 40);
  const auto counts = baseline_node_counts("rpb", sc, BnbConfig{});
  REQUIRE(counts.size() == 2);
  HybridPseudocostPolicy rpb;
  CHECK(counts[1] == run_bnb(sc[1], rpb, BnbConfig{}).nodes);
  CHECK_THROWS(baseline_node_counts("nope", sc, BnbConfig{}));
}

TEST_CASE("one-dimensional quadratic reaches its minimum") {
  const std::vector<std::pair<double, double>> box{{0.0, 1.0}};
  int calls = 0;
  const BoxObjective f = [&](std::span<const double> t) {
    ++calls;
    return cost_of((t[0] - 0.3) * (t[0] - 0.3));
  };
  const OptResult r = minimize_in_box(f, {0.9}, box, budget(50, 1));
  CHECK(calls <= 50);
  CHECK(r.trials.size() == static_cast<std::size_t>(calls));
  CHECK(r.trials.front().theta == std::vector<double>{0.9});
  CHECK(r.cost <= 1e-2);
  CHECK(std::abs(r.theta[0] - 0.3) < 0.1);
  CHECK_FALSE(r.failed);
}

TEST_CASE("two-dimensional quadratic reaches its minimum") {
  const std::vector<std::pair<double, double>> box{{0.0, 1.0}, {0.0, 1.0}};
  const BoxObjective f = [](std::span<const double> t) {
    return cost_of((t[0] - 0.2) * (t[0] - 0.2) + (t[1] - 0.8) * (t[1] - 0.8));
  };
  for (std::uint64_t seed : {0u, 1u, 2u, 3u}) {
    const OptResult r = minimize_in_box(f, {0.5, 0.5}, box, budget(50, seed));
    CHECK(r.trials.size() <= 50);
    CHECK(r.cost <= 5e-2);
  }
}

TEST_CASE("search invariants hold on a bumpy objective") {
  const std::vector<std::pair<double, double>> box{{-2.0, 3.0}, {0.0, 0.5}, {1.0, 1.0}};
  const BoxObjective f = [](std::span<const double> t) {
    if (t[0] > 2.5) return cost_of(kFailedCost);
    return cost_of(std::sin(5 * t[0]) + std::cos(9 * t[1]) + t[0] * t[0] * 0.1);
  };
  const std::vector<double> theta0{1.0, 0.25, 1.0};
  const OptResult r = minimize_in_box(f, theta0, box, budget(40, 9));
  REQUIRE_FALSE(r.trials.empty());
  CHECK(r.trials.size() <= 40);
  CHECK(r.best_so_far.size() == r.trials.size());
  for (std::size_t t = 1; t < r.best_so_far.size(); ++t) CHECK(r.best_so_far[t] <= r.best_so_far[t - 1]);
  for (const Trial& trial : r.trials) {
    for (std::size_t k = 0; k < box.size(); ++k) {
      CHECK(trial.theta[k] >= box[k].first);
      CHECK(trial.theta[k] <= box[k].second);
    }
  }
  CHECK(r.cost <= r.trials.front().cost);
  CHECK(r.cost == r.best_so_far.back());
  // seeded: same seed replays, another seed explores elsewhere
  const OptResult again = minimize_in_box(f, theta0, box, budget(40, 9));
  REQUIRE(again.trials.size() == r.trials.size());
  for (std::size_t t = 0; t < r.trials.size(); ++t) CHECK(again.trials[t].theta == r.trials[t].theta);
  const OptResult other = minimize_in_box(f, theta0, box, budget(40, 10));
  CHECK(other.trials[1].theta != r.trials[1].theta);
}

TEST_CASE("flat and failing objectives keep theta0") {
  const std::vector<std::pair<double, double>> box{{0.0, 1.0}, {0.0, 1.0}};
  const OptResult flat = minimize_in_box([](std::span<const double>) { return cost_of(2.0); }, {0.4, 0.6}, box,
                                         budget(20));
  CHECK(flat.theta == std::vector<double>{0.4, 0.6});
  CHECK(flat.cost == 2.0);
  const OptResult dead = minimize_in_box([](std::span<const double>) { return cost_of(kFailedCost); }, {0.4, 0.6},
                                         box, budget(20));
  CHECK(dead.failed);
  CHECK(dead.theta == std::vector<double>{0.4, 0.6});
  CHECK(dead.cost == kFailedCost);
  const OptResult single = minimize_in_box([](std::span<const double>) { return cost_of(1.0); }, {0.4, 0.6}, box,
                                           budget(1));
  CHECK(single.trials.size() == 1);
  const OptResult none = minimize_in_box([](std::span<const double>) { return cost_of(1.0); }, {}, {}, budget(10));
  CHECK(none.trials.size() == 1);
}

TEST_CASE("tuning a score program on set cover") {
  ScoreProgram p = parse_program(kBlend);
  const auto subset = tiny_setcovers(2, 40);
  const double start = evaluate_cost(p, p.params, subset, CostMetric{}, BnbConfig{});
  OptBudget b = budget(6, 3);
  b.node_limit = 20000;
  const OptResult r = optimize_params(p, p.params, subset, CostMetric{}, b);
  CHECK(r.trials.size() <= 6);
  CHECK(r.trials.front().cost == doctest::Approx(start));
  CHECK(r.cost <= start);
  CHECK(r.trials.front().outcomes.size() == 2);

  std::ostringstream csv;
  write_trial_csv(csv, r, std::vector<std::string>{"a", "b"});
  std::istringstream lines(csv.str());
  std::string header;
  std::getline(lines, header);
  CHECK(header == "trial,theta_0,cost,nodes_a,nodes_b");
  int rows = 0;
  for (std::string line; std::getline(lines, line);) ++rows;
  CHECK(rows == static_cast<int>(r.trials.size()));

  // out-of-box theta0 is clamped before the first trial
  const OptResult clamped = optimize_params(p, {1.7}, subset, CostMetric{}, budget(1));
  CHECK(clamped.trials.front().theta == std::vector<double>{1.0});
}
