#include <doctest.h>

#include <cmath>

#include "evobranch/lp.hpp"
#include "evobranch/policies.hpp"

using namespace evobranch;

namespace {

// min -x0 - x1 with 2 x0 <= 1 and 2 x1 <= 1, both binary: the root LP sits at
// (0.5, 0.5). Down children move the objective from -1 to -0.5; up children
// are infeasible.
MilpInstance twin_halves() {
  MilpInstance inst;
  inst.add_var(-1.0, 0.0, 1.0, true);
  inst.add_var(-1.0, 0.0, 1.0, true);
  inst.add_le({{0, 2.0}}, 1.0);
  inst.add_le({{1, 2.0}}, 1.0);
  return inst;
}

}  // namespace

TEST_CASE("argmax with lowest-index ties") {
  const std::vector<int> cands{3, 7, 9};
  CHECK(select_branch_variable(std::vector<double>{0.5, 0.9, 0.9}, cands) == 7);
  CHECK(select_branch_variable(std::vector<double>{-1.0}, std::vector<int>{4}) == 4);
  CHECK(select_branch_variable(std::vector<double>{2.0, 2.0, 2.0}, cands) == 3);
  CHECK(select_branch_variable(std::vector<double>{NAN, 1.0, 0.0}, cands) == 7);
  CHECK_THROWS_AS(select_branch_variable(std::vector<double>{}, std::vector<int>{}), ContractViolation);
  CHECK_THROWS_AS(select_branch_variable(std::vector<double>{1.0}, cands), ContractViolation);
}

TEST_CASE("most fractional prefers values near one half") {
  MilpInstance inst;
  inst.add_var(0.0, 0.0, 1.0, true);
  inst.add_var(0.0, 0.0, 1.0, true);
  inst.add_var(0.0, 0.0, 1.0, true);
  const Bounds b = Bounds::from(inst);
  LpResult lp;
  lp.status = LpStatus::kOptimal;
  lp.x = {0.5, 0.1, 0.85};
  SearchState state(3);
  const NodeContext ctx{inst, b, lp, state, 0, 0, {}};
  MostFractionalPolicy mf;
  const std::vector<int> two{0, 1};
  const std::vector<double> s = mf.scores(ctx, two, state);
  CHECK(s[0] == doctest::Approx(0.5));
  CHECK(s[1] == doctest::Approx(0.1));
  CHECK(mf.select(ctx, two, state) == 0);
  const std::vector<int> tail{1, 2};
  CHECK(mf.select(ctx, tail, state) == 2);
}

TEST_CASE("random scores are reproducible per seed and node") {
  MilpInstance inst;
  for (int k = 0; k < 5; ++k) inst.add_var(0.0, 0.0, 1.0, true);
  const Bounds b = Bounds::from(inst);
  LpResult lp;
  lp.status = LpStatus::kOptimal;
  lp.x.assign(5, 0.5);
  SearchState state(5);
  const std::vector<int> cands{0, 1, 2, 3, 4};
  RandomPolicy a;
  RandomPolicy c;
  a.begin_solve(inst, 42);
  c.begin_solve(inst, 42);
  const NodeContext ctx{inst, b, lp, state, 17, 3, {}};
  const auto first = a.scores(ctx, cands, state);
  CHECK(first == a.scores(ctx, cands, state));
  CHECK(first == c.scores(ctx, cands, state));
  c.begin_solve(inst, 43);
  CHECK(first != c.scores(ctx, cands, state));
  for (double v : first) CHECK((v >= 0.0 && v < 1.0));
}

TEST_CASE("strong branching ties on symmetric children and picks the lower index") {
  const MilpInstance inst = twin_halves();
  const Bounds b = Bounds::from(inst);
  const LpResult lp = solve_lp_relaxation(inst, b);
  REQUIRE(lp.optimal());
  CHECK(lp.objective == doctest::Approx(-1.0));
  const std::vector<int> cands = candidate_set(lp, inst, 1e-6);
  REQUIRE(cands == std::vector<int>{0, 1});
  SearchState state(2);
  const NodeContext ctx{inst, b, lp, state, 0, 0, {}};
  StrongBranchingPolicy sb;
  const auto s = sb.scores(ctx, cands, state);
  CHECK(s[0] == s[1]);
  // down gain 0.5, up child infeasible
  CHECK(s[0] == doctest::Approx((0.5 + 1e-6) * (1e10 + 1e-6)));
  CHECK(sb.select(ctx, cands, state) == 0);
  // probes feed pseudocosts: gain 0.5 over step 0.5 = 1 per unit
  CHECK(state.pseudocost(0, Direction::kDown) == doctest::Approx(1.0));
  CHECK(state.cutoffs(0, Direction::kUp) >= 1);
}

TEST_CASE("strong branching without a warm start falls back to cold solves") {
  const MilpInstance inst = twin_halves();
  const Bounds b = Bounds::from(inst);
  const LpResult lp = solve_lp_relaxation(inst, b);
  REQUIRE(lp.warm_start);
  LpResult cold = lp;
  cold.warm_start.reset();
  const std::vector<int> cands{0, 1};
  SearchState s1(2);
  SearchState s2(2);
  StrongBranchingPolicy sb;
  const auto warm_scores = sb.scores(NodeContext{inst, b, lp, s1, 0, 0, {}}, cands, s1);
  const auto cold_scores = sb.scores(NodeContext{inst, b, cold, s2, 0, 0, {}}, cands, s2);
  REQUIRE(warm_scores.size() == cold_scores.size());
  for (std::size_t k = 0; k < cands.size(); ++k) CHECK(warm_scores[k] == doctest::Approx(cold_scores[k]));
}

TEST_CASE("rpb probes first, then trusts pseudocosts") {
  const MilpInstance inst = twin_halves();
  const Bounds b = Bounds::from(inst);
  const LpResult lp = solve_lp_relaxation(inst, b);
  const std::vector<int> cands{0, 1};
  HybridPseudocostPolicy rpb(1);
  rpb.begin_solve(inst, 0);
  SearchState state(2);
  const NodeContext ctx{inst, b, lp, state, 0, 0, {}};
  const auto probed = rpb.scores(ctx, cands, state);
  CHECK(probed[0] > 1e9);
  CHECK(state.pseudocost_count(0, Direction::kDown) == 1);
  const auto cheap = rpb.scores(ctx, cands, state);
  CHECK(cheap[0] < 1e9);
  CHECK(state.pseudocost_count(0, Direction::kDown) == 1);
  // a fresh solve restarts the warmup
  rpb.begin_solve(inst, 0);
  CHECK(rpb.scores(ctx, cands, state)[0] > 1e9);
}

TEST_CASE("pseudocost product borrows the mean for unseen directions") {
  MilpInstance inst;
  inst.add_var(0.0, 0.0, 1.0, true);
  inst.add_var(0.0, 0.0, 1.0, true);
  const Bounds b = Bounds::from(inst);
  LpResult lp;
  lp.status = LpStatus::kOptimal;
  lp.x = {0.5, 0.5};
  SearchState state(2);
  state.record_gain(0, Direction::kDown, 4.0);
  state.record_gain(0, Direction::kUp, 2.0);
  const NodeContext ctx{inst, b, lp, state, 0, 0, {}};
  PseudocostPolicy pc;
  const std::vector<int> cands{0, 1};
  const auto s = pc.scores(ctx, cands, state);
  CHECK(s[0] == doctest::Approx((4.0 * 0.5) * (2.0 * 0.5)));
  CHECK(s[1] == doctest::Approx(s[0]));
}

TEST_CASE("builtin factory") {
  for (const char* name : {"random", "most_fractional", "pseudocost", "strong_branching", "rpb"}) {
    auto p = make_builtin_policy(name);
    REQUIRE(p);
    CHECK(p->name() == name);
  }
  CHECK_FALSE(make_builtin_policy("nope"));
}
