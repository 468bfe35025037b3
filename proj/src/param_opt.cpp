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


#include "evobranch/param_opt.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>

#include "evobranch/metrics.hpp"
#include "evobranch/parallel.hpp"
#include "evobranch/policies.hpp"
#include "evobranch/rng.hpp"
#include "evobranch/text.hpp"

namespace evobranch {

void CostMetric::validate() const {
  if (!(shift >= 0.0)) throw std::invalid_argument("metric shift must be >= 0");
  if (kind == MetricKind::kGap && !(time_limit > 0.0)) {
    throw std::invalid_argument("gap metric needs a positive time limit");
  }
}

void OptBudget::validate() const {
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  solve_config().validate();
}

BnbConfig OptBudget::solve_config() const {
  BnbConfig cfg;
  cfg.node_limit = node_limit;
  cfg.time_limit = time_limit;
  cfg.rng_seed = rng_seed;
  return cfg;
}

CostEvaluation evaluate_policy(const PolicyFactory& factory, std::span<const MilpInstance> instances,
                               const CostMetric& metric, const BnbConfig& config, int workers) {
  if (instances.empty()) throw ContractViolation("evaluate_policy needs at least one instance");
  metric.validate();
  BnbConfig cfg = config;
  if (metric.kind == MetricKind::kGap) cfg.time_limit = std::min(cfg.time_limit, metric.time_limit);
  CostEvaluation out;
  out.outcomes.resize(instances.size());
  parallel_for(instances.size(), workers, [&](std::size_t i) {
    InstanceOutcome& o = out.outcomes[i];
    try {
      auto policy = factory();
      const BnbStats s = run_bnb(instances[i], *policy, cfg);
      o.status = s.status;
      o.nodes = s.nodes;
      o.time_s = s.wall_time;
      o.gap = s.gap;
    } catch (const std::exception& e) {
      o.failed = true;
      o.error = e.what();
    }
  });
  std::vector<double> measure;
  for (const InstanceOutcome& o : out.outcomes) {
    if (o.failed) return out;
    switch (metric.kind) {
      case MetricKind::kNodes: measure.push_back(static_cast<double>(o.nodes)); break;
      case MetricKind::kGap: measure.push_back(o.gap); break;
      case MetricKind::kTime: measure.push_back(o.time_s); break;
    }
  }
  out.cost = shifted_geomean(measure, metric.shift);
  return out;
}

namespace {

PolicyFactory dsl_factory(const ScoreProgram& program, std::span<const double> theta) {
  auto shared = std::make_shared<const ScoreProgram>(program);
  std::vector<double> t(theta.begin(), theta.end());
  return [shared, t] { return std::make_unique<DslPolicy>(shared, t); };
}

bool within_ratio(long candidate, long baseline) {
  // c <= 1.25 b, kept in integers so the boundary is exact.
  return candidate * 4 <= baseline * 5;
}

std::string ratio_reason(std::size_t i, long candidate, long baseline) {
  return "nodes@" + std::to_string(i) + ":" + std::to_string(candidate) + ">" +
         format_shortest(kFilterRatio * static_cast<double>(baseline));
}

}  // namespace

double evaluate_cost(const ScoreProgram& program, std::span<const double> theta,
                     std::span<const MilpInstance> instances, const CostMetric& metric, const BnbConfig& config,
                     int workers) {
  return evaluate_policy(dsl_factory(program, theta), instances, metric, config, workers).cost;
}

FilterResult check_node_ratio(std::span<const long> candidate, std::span<const long> baseline) {
  if (candidate.size() != baseline.size()) throw ContractViolation("check_node_ratio: length mismatch");
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    if (!within_ratio(candidate[i], baseline[i])) {
      return {false, static_cast<int>(i), ratio_reason(i, candidate[i], baseline[i])};
    }
  }
  return {true, -1, ""};
}

FilterResult fast_filter(const ScoreProgram& program, std::span<const double> theta0,
                         std::span<const MilpInstance> subset, std::span<const long> baseline_nodes,
                         const BnbConfig& config) {
  if (subset.size() != baseline_nodes.size()) throw ContractViolation("fast_filter: one baseline count per instance");
  const PolicyFactory factory = dsl_factory(program, theta0);
  for (std::size_t i = 0; i < subset.size(); ++i) {
    long nodes = 0;
    try {
      auto policy = factory();
      nodes = run_bnb(subset[i], *policy, config).nodes;
    } catch (const std::exception&) {
      return {false, static_cast<int>(i), "eval_error@" + std::to_string(i)};
    }
    if (!within_ratio(nodes, baseline_nodes[i])) {
      return {false, static_cast<int>(i), ratio_reason(i, nodes, baseline_nodes[i])};
    }
  }
  return {true, -1, ""};
}

std::vector<long> baseline_node_counts(std::string_view policy, std::span<const MilpInstance> subset,
                                       const BnbConfig& config, int workers) {
  if (!make_builtin_policy(policy)) throw std::invalid_argument("unknown baseline policy '" + std::string(policy) + "'");
  std::vector<long> nodes(subset.size(), 0);
  std::vector<std::string> errors(subset.size());
  parallel_for(subset.size(), workers, [&](std::size_t i) {
    try {
      auto p = make_builtin_policy(policy);
      nodes[i] = run_bnb(subset[i], *p, config).nodes;
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (const auto& e : errors) {
    if (!e.empty()) throw std::runtime_error("baseline solve failed: " + e);
  }
  return nodes;
}

namespace {

double radical_inverse(std::uint64_t index, std::uint64_t base) {
  double result = 0.0;
  double f = 1.0 / static_cast<double>(base);
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= static_cast<double>(base);
  }
  return result;
}

std::vector<std::uint64_t> first_primes(std::size_t n) {
  std::vector<std::uint64_t> primes;
  for (std::uint64_t c = 2; primes.size() < n; ++c) {
    if (std::all_of(primes.begin(), primes.end(), [c](std::uint64_t p) { return c % p != 0; })) primes.push_back(c);
  }
  return primes;
}

double clamp_to(double v, const std::pair<double, double>& b) { return std::min(std::max(v, b.first), b.second); }

class Search {
 public:
  Search(const BoxObjective& objective, std::span<const std::pair<double, double>> bounds, int budget)
      : objective_(objective), bounds_(bounds), budget_(budget) {}

  // nullopt once the budget is spent on a point not seen before.
  std::optional<double> eval(std::vector<double> x) {
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = clamp_to(x[k], bounds_[k]);
    if (auto it = memo_.find(x); it != memo_.end()) return it->second;
    if (static_cast<int>(result.trials.size()) >= budget_) return std::nullopt;
    CostEvaluation ce = objective_(x);
    const double cost = std::isnan(ce.cost) ? kFailedCost : ce.cost;
    if (result.trials.empty() || cost < result.cost) {
      result.cost = cost;
      result.theta = x;
    }
    result.trials.push_back({x, cost, std::move(ce.outcomes)});
    result.best_so_far.push_back(result.cost);
    memo_.emplace(std::move(x), cost);
    return cost;
  }

  bool exhausted() const { return static_cast<int>(result.trials.size()) >= budget_; }

  OptResult result;

 private:
  const BoxObjective& objective_;
  std::span<const std::pair<double, double>> bounds_;
  int budget_;
  std::map<std::vector<double>, double> memo_;
};

struct Vertex {
  std::vector<double> x;
  double f;
};

std::vector<double> affine(const std::vector<double>& c, const std::vector<double>& w, double t) {
  std::vector<double> out(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) out[k] = c[k] + t * (w[k] - c[k]);
  return out;
}

// Bounded Nelder-Mead until the budget runs out. Collapsed simplices are
// reseeded at the incumbent with half the previous step.
void refine(Search& search, std::span<const std::pair<double, double>> bounds, int proposal_cap) {
  const std::size_t d = bounds.size();
  double step_scale = 0.1;
  int proposals = 0;
  auto eval = [&](const std::vector<double>& x) -> std::optional<double> {
    if (++proposals > proposal_cap) return std::nullopt;
    return search.eval(x);
  };
  while (!search.exhausted() && step_scale > 1e-12) {
    std::vector<Vertex> simplex{{search.result.theta, search.result.cost}};
    bool stop = false;
    for (std::size_t k = 0; k < d && !stop; ++k) {
      std::vector<double> x = search.result.theta;
      const double step = step_scale * (bounds[k].second - bounds[k].first);
      x[k] = x[k] + step <= bounds[k].second ? x[k] + step : x[k] - step;
      x[k] = clamp_to(x[k], bounds[k]);
      const auto f = eval(x);
      if (!f) stop = true;
      else simplex.push_back({x, *f});
    }
    if (stop) return;
    while (true) {
      std::stable_sort(simplex.begin(), simplex.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
      double spread = 0.0;
      for (const Vertex& v : simplex) {
        for (std::size_t k = 0; k < d; ++k) {
          const double range = bounds[k].second - bounds[k].first;
          if (range > 0.0) spread = std::max(spread, std::abs(v.x[k] - simplex[0].x[k]) / range);
        }
      }
      if (spread < 1e-9) break;
      std::vector<double> c(d, 0.0);
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t k = 0; k < d; ++k) c[k] += simplex[i].x[k] / static_cast<double>(d);
      }
      Vertex& worst = simplex[d];
      const auto xr = affine(c, worst.x, -1.0);
      const auto fr = eval(xr);
      if (!fr) return;
      if (*fr < simplex[0].f) {
        const auto xe = affine(c, worst.x, -2.0);
        const auto fe = eval(xe);
        if (!fe) return;
        worst = *fe < *fr ? Vertex{xe, *fe} : Vertex{xr, *fr};
        continue;
      }
      if (*fr < simplex[d - 1].f) {
        worst = {xr, *fr};
        continue;
      }
      const bool outside = *fr < worst.f;
      const auto xc = outside ? affine(c, xr, 0.5) : affine(c, worst.x, 0.5);
      const auto fc = eval(xc);
      if (!fc) return;
      if (outside ? *fc <= *fr : *fc < worst.f) {
        worst = {xc, *fc};
        continue;
      }
      for (std::size_t i = 1; i <= d; ++i) {
        simplex[i].x = affine(simplex[0].x, simplex[i].x, 0.5);
        const auto fs = eval(simplex[i].x);
        if (!fs) return;
        simplex[i].f = *fs;
      }
    }
    step_scale *= 0.5;
  }
}

}  // namespace

OptResult minimize_in_box(const BoxObjective& objective, std::vector<double> theta0,
                          std::span<const std::pair<double, double>> bounds, const OptBudget& budget) {
  if (budget.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (theta0.size() != bounds.size()) throw ContractViolation("minimize_in_box: theta0 and bounds differ in length");
  for (const auto& b : bounds) {
    if (!(b.first <= b.second)) throw ContractViolation("minimize_in_box: empty bound interval");
  }
  const int total = budget.max_iterations;
  Search search(objective, bounds, total);
  search.eval(theta0);

  const std::size_t d = bounds.size();
  if (d > 0) {
    const int design_end = (total + 1) / 2;  // ceil(T/2) trials including theta0
    const auto primes = first_primes(d);
    Rng rng(mix64(budget.rng_seed));
    std::vector<double> shift(d);
    for (double& s : shift) s = rng.uniform();
    for (std::uint64_t i = 1; static_cast<int>(search.result.trials.size()) < design_end && i < 64u * total; ++i) {
      std::vector<double> x(d);
      for (std::size_t k = 0; k < d; ++k) {
        double u = radical_inverse(i, primes[k]) + shift[k];
        u -= std::floor(u);
        x[k] = bounds[k].first + u * (bounds[k].second - bounds[k].first);
      }
      search.eval(std::move(x));
    }
    refine(search, bounds, 100 * total + 1000);
  }
  OptResult out = std::move(search.result);
  out.failed = !std::isfinite(out.cost);
  if (out.failed) {
    out.theta = out.trials.front().theta;
  }
  return out;
}

OptResult optimize_params(const ScoreProgram& skeleton, std::vector<double> theta0,
                          std::span<const MilpInstance> subset, const CostMetric& metric, const OptBudget& budget,
                          int workers) {
  budget.validate();
  metric.validate();
  if (theta0.size() != skeleton.bounds.size()) throw ContractViolation("optimize_params: theta arity mismatch");
  for (std::size_t k = 0; k < theta0.size(); ++k) theta0[k] = clamp_to(theta0[k], skeleton.bounds[k]);
  const BnbConfig cfg = budget.solve_config();
  auto shared = std::make_shared<const ScoreProgram>(skeleton);
  const BoxObjective objective = [&](std::span<const double> theta) {
    std::vector<double> t(theta.begin(), theta.end());
    const PolicyFactory factory = [shared, t] { return std::make_unique<DslPolicy>(shared, t); };
    return evaluate_policy(factory, subset, metric, cfg, workers);
  };
  return minimize_in_box(objective, std::move(theta0), skeleton.bounds, budget);
}

void write_trial_csv(std::ostream& out, const OptResult& result, std::span<const std::string> instance_names) {
  const std::size_t d = result.trials.empty() ? 0 : result.trials.front().theta.size();
  out << "trial";
  for (std::size_t k = 0; k < d; ++k) out << ",theta_" << k;
  out << ",cost";
  for (const auto& name : instance_names) out << ",nodes_" << name;
  out << '\n';
  for (std::size_t t = 0; t < result.trials.size(); ++t) {
    const Trial& trial = result.trials[t];
    out << t + 1;
    for (double v : trial.theta) out << ',' << format_g17(v);
    out << ',' << format_g17(trial.cost);
    for (std::size_t i = 0; i < instance_names.size(); ++i) {
      out << ',';
      if (i < trial.outcomes.size() && !trial.outcomes[i].failed) out << trial.outcomes[i].nodes;
    }
    out << '\n';
  }
}

}  // namespace evobranch
