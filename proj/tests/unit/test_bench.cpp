#include <doctest.h>

#include <cmath>
#include <sstream>

#include "evobranch/bench.hpp"
#include "evobranch/instances.hpp"
#include "evobranch/metrics.hpp"
#include "evobranch/policies.hpp"

using namespace evobranch;

namespace {

BenchCell cell(const std::string& p, const std::string& i, const std::string& status, long nodes, double t) {
  return BenchCell{p, i, status, nodes, t, 0.0};
}

// Throws on instances with an odd seed suffix, solves the rest like most_fractional.
class PickyPolicy : public BranchingPolicy {
 public:
  std::string name() const override { return "picky"; }
  void begin_solve(const MilpInstance& instance, std::uint64_t) override { odd_ = instance.name.back() % 2 == 1; }
  int select(const NodeContext& ctx, std::span<const int> candidates, SearchState& state) override {
    if (odd_) throw std::runtime_error("picky");
    return inner_.select(ctx, candidates, state);
  }

 private:
  bool odd_ = false;
  MostFractionalPolicy inner_;
};

std::vector<MilpInstance> branching_setcovers(int count) {
  std::vector<MilpInstance> out;
  for (std::uint64_t seed = 700; static_cast<int>(out.size()) < count; ++seed) {
    MilpInstance inst = gen_set_cover(60, 120, 0.06, seed);
    inst.name = "sc" + std::to_string(seed);
    MostFractionalPolicy probe;
    if (run_bnb(inst, probe, BnbConfig{}).nodes > 0) out.push_back(std::move(inst));
  }
  return out;
}

// Node columns only: policy,instance,status,nodes.
std::string node_columns(const RunReport& r) {
  std::string out;
  for (const auto& c : r.cells) out += c.policy + "," + c.instance + "," + c.status + "," + std::to_string(c.nodes) + "\n";
  return out;
}

}  // namespace

TEST_CASE("wins go to the fastest finished policy") {
  const std::vector<std::string> ab{"A", "B"};
  std::vector<BenchCell> cells{cell("A", "x", "optimal", 10, 3.0), cell("B", "x", "optimal", 5, 5.0)};
  CHECK(compute_wins(cells, ab, WinMetric::kTime) == std::vector<int>{1, 0});
  CHECK(compute_wins(cells, ab, WinMetric::kNodes) == std::vector<int>{0, 1});

  cells = {cell("A", "x", "optimal", 10, 99.0), cell("B", "x", "time_limit", 1, 1.0)};
  CHECK(compute_wins(cells, ab, WinMetric::kTime) == std::vector<int>{1, 0});

  cells = {cell("A", "x", "optimal", 4, 2.0), cell("B", "x", "optimal", 4, 2.0)};
  CHECK(compute_wins(cells, ab, WinMetric::kTime) == std::vector<int>{1, 1});

  cells = {cell("A", "x", "node_limit", 4, 2.0), cell("B", "x", "error", 0, 0.0)};
  CHECK(compute_wins(cells, ab, WinMetric::kTime) == std::vector<int>{0, 0});

  const std::vector<std::string> solo{"A"};
  CHECK_THROWS_AS(compute_wins(cells, solo, WinMetric::kTime), ContractViolation);
}

TEST_CASE("benchmark fills every cell and its summary is recomputable") {
  const auto instances = branching_setcovers(4);
  const std::vector<BenchPolicy> policies{parse_policy_spec("most_fractional"), parse_policy_spec("random")};
  BenchConfig cfg;
  cfg.workers = 2;
  cfg.solve.rng_seed = 5;
  const RunReport r = run_benchmark(policies, instances, cfg);
  REQUIRE(r.cells.size() == 8);
  for (std::size_t k = 0; k < 8; ++k) {
    CHECK(r.cells[k].policy == policies[k / 4].label);
    CHECK(r.cells[k].instance == instances[k % 4].name);
    CHECK(r.cells[k].status == "optimal");
  }

  std::ostringstream csv;
  write_report_csv(csv, r);
  CHECK(csv.str().rfind("policy,instance,status,nodes,time_s,gap\n", 0) == 0);
  const RunReport back = read_report_csv(csv.str());
  REQUIRE(back.cells.size() == 8);
  REQUIRE(back.summary.size() == 2);
  for (std::size_t p = 0; p < 2; ++p) {
    // independent recomputation from the parsed cells
    double lt = 0.0;
    double ln = 0.0;
    int finished = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      const BenchCell& c = back.cells[p * 4 + i];
      lt += std::log(c.time_s + 1.0);
      ln += std::log(static_cast<double>(c.nodes) + 1.0);
      finished += c.finished();
    }
    CHECK(back.summary[p].geomean_time_s == doctest::Approx(std::exp(lt / 4) - 1).epsilon(1e-12));
    CHECK(back.summary[p].geomean_nodes == doctest::Approx(std::exp(ln / 4) - 1).epsilon(1e-12));
    CHECK(back.summary[p].finished == finished);
    CHECK(back.summary[p].cells == 4);
  }
  CHECK(back.summary[0].wins == compute_wins(back.cells, back.policies, back.win_by)[0]);

  // same seed, one worker: identical node columns
  cfg.workers = 1;
  CHECK(node_columns(run_benchmark(policies, instances, cfg)) == node_columns(r));
}

TEST_CASE("a failing cell leaves the others untouched") {
  const auto instances = branching_setcovers(4);
  const std::vector<BenchPolicy> clean{parse_policy_spec("most_fractional")};
  std::vector<BenchPolicy> with_picky = clean;
  with_picky.push_back({"picky", [] { return std::make_unique<PickyPolicy>(); }});
  const RunReport a = run_benchmark(clean, instances, BenchConfig{});
  const RunReport b = run_benchmark(with_picky, instances, BenchConfig{});
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(b.cells[i].nodes == a.cells[i].nodes);
    const BenchCell& p = b.cells[4 + i];
    const bool odd = instances[i].name.back() % 2 == 1;
    CHECK(p.status == (odd ? "error" : "optimal"));
    if (!odd) CHECK(p.nodes == a.cells[i].nodes);
  }
  // error cells never win and are left out of the means
  const PolicySummary& s = b.summary[1];
  std::vector<double> nodes;
  for (std::size_t i = 0; i < 4; ++i) {
    if (b.cells[4 + i].status != "error") nodes.push_back(static_cast<double>(b.cells[4 + i].nodes));
  }
  if (!nodes.empty()) CHECK(s.geomean_nodes == shifted_geomean(nodes));
  CHECK(s.finished == static_cast<int>(nodes.size()));
}

TEST_CASE("policy specs") {
  CHECK(parse_policy_spec("rpb").label == "rpb");
  CHECK(parse_policy_spec("dsl:" EVOBRANCH_PROGRAM_DIR "/setcover.spl").factory()->name().size() > 0);
  CHECK_THROWS_AS(parse_policy_spec("nope"), std::invalid_argument);
  CHECK_THROWS(parse_policy_spec("dsl:/no/such/file.spl"));
}

TEST_CASE("malformed reports are rejected") {
  CHECK_THROWS(read_report_csv(""));
  CHECK_THROWS(read_report_csv("policy,instance,status,nodes,time_s,gap\nA,x,optimal,1,0.1\n"));
  CHECK_THROWS(read_report_csv("policy,instance,status,nodes,time_s,gap\nA,x,optimal,1,0.1,0\n"));
}
