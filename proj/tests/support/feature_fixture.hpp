#ifndef EVOBRANCH_TESTS_FEATURE_FIXTURE_HPP_
#define EVOBRANCH_TESTS_FEATURE_FIXTURE_HPP_

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "evobranch/features.hpp"
#include "evobranch/policies.hpp"

namespace support {

using namespace evobranch;

// Two candidates on a 2x2 model with hand-set LP data and search history;
// feature_node.txt holds every column worked out by hand.
struct FixtureNode {
  MilpInstance instance;
  Bounds bounds;
  LpResult lp;
  SearchState state{2};
};

inline FixtureNode fixture_node() {
  FixtureNode n;
  n.instance.add_var(-3.0, 0.0, 1.0, true);
  n.instance.add_var(2.0, 0.0, 5.0, true);
  n.instance.add_le({{0, 2.0}, {1, 1.0}}, 2.0);
  n.instance.add_le({{0, -1.0}, {1, -2.0}}, -2.0);
  n.bounds = Bounds{{0.0, 1.0}, {1.0, 5.0}};
  n.lp.status = LpStatus::kOptimal;
  n.lp.x = {0.25, 1.5};
  n.lp.reduced_costs = {0.6, -0.8};
  n.lp.duals = {-1.5, 0.0};
  n.lp.row_slack = {0.0, 1.25};
  n.lp.basis = {BasisStatus::kBasic, BasisStatus::kBasic};

  SearchState& s = n.state;
  s.record_gain(0, Direction::kDown, 5.0);
  s.record_gain(0, Direction::kDown, 3.0);
  s.record_gain(0, Direction::kUp, 2.0);
  s.record_cutoff(0, Direction::kUp);
  for (int k = 0; k < 2; ++k) {
    s.record_attempt(0, Direction::kDown);
    s.record_attempt(0, Direction::kUp);
  }
  s.record_gain(1, Direction::kUp, 1.0);
  s.record_attempt(1, Direction::kUp);
  LpResult a;
  a.iterations = 10;
  a.basis = {BasisStatus::kBasic, BasisStatus::kLower};
  s.record_lp(a);
  LpResult b;
  b.iterations = 6;
  b.basis = {BasisStatus::kLower, BasisStatus::kBasic};
  s.record_lp(b);
  s.record_solution({1.0, 1.0});
  s.record_solution({0.0, 2.0});
  return n;
}

inline std::vector<std::vector<double>> read_feature_fixture(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw std::runtime_error("cannot open " + path);
  std::vector<std::vector<double>> rows(2, std::vector<double>(kNumFeatures, NAN));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    int r = 0, c = 0;
    double v = 0.0;
    ls >> r >> c >> v;
    rows.at(r).at(c) = v;
  }
  return rows;
}

// Runs a short solve and hands every branching node to `visit`.
class Probe : public MostFractionalPolicy {
 public:
  explicit Probe(std::function<void(const NodeContext&, std::span<const int>)> visit) : visit_(std::move(visit)) {}
  std::vector<double> scores(const NodeContext& ctx, std::span<const int> candidates, SearchState& state) override {
    visit_(ctx, candidates);
    return MostFractionalPolicy::scores(ctx, candidates, state);
  }

 private:
  std::function<void(const NodeContext&, std::span<const int>)> visit_;
};

}  // namespace support

#endif  // EVOBRANCH_TESTS_FEATURE_FIXTURE_HPP_
