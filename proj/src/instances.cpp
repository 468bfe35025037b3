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

#include "evobranch/instances.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "evobranch/rng.hpp"
#include "evobranch/text.hpp"

namespace evobranch {

std::string_view to_string(Family family) {
  switch (family) {
    case Family::kSetCover: return "set_cover";
    case Family::kCombAuction: return "comb_auction";
    case Family::kFacilityLocation: return "facility_location";
    case Family::kIndependentSet: return "independent_set";
  }
  return "unknown";
}

std::optional<Family> parse_family(std::string_view name) {
  if (name == "set_cover" || name == "setcover") return Family::kSetCover;
  if (name == "comb_auction" || name == "cauctions") return Family::kCombAuction;
  if (name == "facility_location" || name == "facilities") return Family::kFacilityLocation;
  if (name == "independent_set" || name == "indset") return Family::kIndependentSet;
  return std::nullopt;
}

const std::vector<Preset>& presets() {
  static const std::vector<Preset> kPresets = {
      {"setcover-desk", {Family::kSetCover, 150, 300, 0.05, 0, 1}},
      {"setcover-easy", {Family::kSetCover, 500, 1000, 0.05, 0, 1}},
      {"setcover-medium", {Family::kSetCover, 1000, 1000, 0.05, 0, 1}},
      {"setcover-hard", {Family::kSetCover, 2000, 1000, 0.05, 0, 1}},
      {"cauctions-desk", {Family::kCombAuction, 35, 170, 0.0, 0, 1}},
      {"cauctions-easy", {Family::kCombAuction, 100, 500, 0.0, 0, 1}},
      {"cauctions-medium", {Family::kCombAuction, 200, 1000, 0.0, 0, 1}},
      {"cauctions-hard", {Family::kCombAuction, 300, 1500, 0.0, 0, 1}},
      {"facilities-desk", {Family::kFacilityLocation, 12, 30, 0.0, 0, 1}},
      {"facilities-easy", {Family::kFacilityLocation, 100, 100, 0.0, 0, 1}},
      {"facilities-medium", {Family::kFacilityLocation, 100, 200, 0.0, 0, 1}},
      {"facilities-hard", {Family::kFacilityLocation, 100, 400, 0.0, 0, 1}},
      {"indset-desk", {Family::kIndependentSet, 250, 4, 0.0, 0, 1}},
      {"indset-easy", {Family::kIndependentSet, 750, 4, 0.0, 0, 1}},
      {"indset-medium", {Family::kIndependentSet, 1000, 4, 0.0, 0, 1}},
      {"indset-hard", {Family::kIndependentSet, 1500, 4, 0.0, 0, 1}},
  };
  return kPresets;
}

std::optional<GeneratorSpec> find_preset(std::string_view name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p.spec;
  }
  return std::nullopt;
}

MilpInstance generate_one(const GeneratorSpec& spec, int index) {
  if (spec.size_a <= 0 || spec.size_b <= 0) throw std::invalid_argument("sizes must be positive");
  const std::uint64_t seed = spec.seed + static_cast<std::uint64_t>(index);
  MilpInstance inst;
  switch (spec.family) {
    case Family::kSetCover: inst = gen_set_cover(spec.size_a, spec.size_b, spec.density, seed); break;
    case Family::kCombAuction: inst = gen_comb_auction(spec.size_a, spec.size_b, seed); break;
    case Family::kFacilityLocation: inst = gen_facility_location(spec.size_a, spec.size_b, seed); break;
    case Family::kIndependentSet: inst = gen_independent_set(spec.size_a, spec.size_b, seed); break;
  }
  inst.name = std::string(to_string(spec.family)) + "_" + std::to_string(spec.size_a) + "x" +
              std::to_string(spec.size_b) + "_s" + std::to_string(seed);
  return inst;
}

std::vector<MilpInstance> generate(const GeneratorSpec& spec) {
  if (spec.count < 1) throw std::invalid_argument("count must be >= 1");
  std::vector<MilpInstance> out;
  out.reserve(spec.count);
  for (int k = 0; k < spec.count; ++k) out.push_back(generate_one(spec, k));
  return out;
}

MilpInstance gen_set_cover(int rows, int cols, double density, std::uint64_t seed) {
  if (rows < 1 || cols < 2) throw std::invalid_argument("set cover needs rows >= 1 and cols >= 2");
  if (!(density > 0.0 && density < 1.0)) throw std::invalid_argument("density must lie in (0,1)");
  if (density * cols < 2.0) throw std::invalid_argument("density * cols must be at least 2");
  const long target = std::lround(static_cast<double>(rows) * cols * density);
  if (target < std::max<long>(2L * rows, cols)) {
    throw std::invalid_argument("density too low to cover every column and give each row two columns");
  }
  Rng rng(seed);
  std::vector<double> cost(cols);
  for (auto& c : cost) c = static_cast<double>(rng.uniform_int(1, 100));

  std::vector<std::vector<std::uint8_t>> present(rows, std::vector<std::uint8_t>(cols, 0));
  std::vector<std::vector<int>> members(rows);
  long nnz = 0;
  auto add = [&](int r, int c) {
    if (present[r][c]) return false;
    present[r][c] = 1;
    members[r].push_back(c);
    ++nnz;
    return true;
  };
  for (int c = 0; c < cols; ++c) add(static_cast<int>(rng.uniform_int(0, rows - 1)), c);
  for (int r = 0; r < rows; ++r) {
    while (members[r].size() < 2) add(r, static_cast<int>(rng.uniform_int(0, cols - 1)));
  }
  while (nnz < target) {
    add(static_cast<int>(rng.uniform_int(0, rows - 1)), static_cast<int>(rng.uniform_int(0, cols - 1)));
  }

  MilpInstance inst;
  for (int c = 0; c < cols; ++c) inst.add_var(cost[c], 0.0, 1.0, true);
  for (int r = 0; r < rows; ++r) {
    std::sort(members[r].begin(), members[r].end());
    std::vector<Term> terms;
    terms.reserve(members[r].size());
    for (int c : members[r]) terms.push_back({c, 1.0});
    inst.add_ge(std::move(terms), 1.0);
  }
  return inst;
}

MilpInstance comb_auction_from_bids(int items, const std::vector<Bid>& bids) {
  MilpInstance inst;
  std::vector<std::vector<int>> bidders(items);
  for (std::size_t b = 0; b < bids.size(); ++b) {
    inst.add_var(-bids[b].price, 0.0, 1.0, true);
    for (int item : bids[b].items) {
      if (item < 0 || item >= items) throw std::invalid_argument("bid references unknown item");
      bidders[item].push_back(static_cast<int>(b));
    }
  }
  for (int item = 0; item < items; ++item) {
    if (bidders[item].empty()) continue;
    std::vector<Term> terms;
    for (int b : bidders[item]) terms.push_back({b, 1.0});
    inst.add_le(std::move(terms), 1.0);
  }
  return inst;
}

MilpInstance gen_comb_auction(int items, int bids, std::uint64_t seed) {
  if (items < 1 || bids < items) throw std::invalid_argument("comb auction needs bids >= items >= 1");
  Rng rng(seed);
  std::vector<double> value(items);
  for (auto& v : value) v = rng.uniform(1.0, 100.0);
  const int max_bundle = std::min(items, 8);
  std::vector<Bid> all;
  all.reserve(bids);
  for (int b = 0; b < bids; ++b) {
    // Geometric bundle size, continuation probability 0.65.
    int size = 1;
    while (size < max_bundle && rng.uniform() < 0.65) ++size;
    std::vector<int> bundle;
    int first = b < items ? b : static_cast<int>(rng.uniform_int(0, items - 1));
    bundle.push_back(first);
    int previous = first;
    int guard = 0;
    while (static_cast<int>(bundle.size()) < size && guard++ < 64) {
      int next;
      if (rng.uniform() < 0.7) {
        // Related item: near the previous one on the item ring.
        const auto offset = rng.uniform_int(-3, 3);
        next = static_cast<int>(((previous + offset) % items + items) % items);
      } else {
        next = static_cast<int>(rng.uniform_int(0, items - 1));
      }
      if (std::find(bundle.begin(), bundle.end(), next) != bundle.end()) continue;
      bundle.push_back(next);
      previous = next;
    }
    std::sort(bundle.begin(), bundle.end());
    double bundle_value = 0.0;
    for (int item : bundle) bundle_value += value[item];
    const double synergy = std::pow(static_cast<double>(bundle.size()), 0.2);
    const double price = bundle_value * synergy * rng.uniform(0.8, 1.2);
    all.push_back(Bid{std::move(bundle), std::round(price * 100.0) / 100.0});
  }
  return comb_auction_from_bids(items, all);
}

MilpInstance gen_facility_location(int facilities, int customers, std::uint64_t seed) {
  if (facilities < 1 || customers < 1) throw std::invalid_argument("sizes must be positive");
  Rng rng(seed);
  std::vector<double> cx(customers), cy(customers), fx(facilities), fy(facilities);
  for (int j = 0; j < customers; ++j) {
    cx[j] = rng.uniform();
    cy[j] = rng.uniform();
  }
  for (int i = 0; i < facilities; ++i) {
    fx[i] = rng.uniform();
    fy[i] = rng.uniform();
  }
  std::vector<double> demand(customers);
  for (auto& d : demand) d = static_cast<double>(rng.uniform_int(5, 35));
  std::vector<double> capacity(facilities);
  for (auto& c : capacity) c = static_cast<double>(rng.uniform_int(10, 160));
  std::vector<double> fixed(facilities);
  for (int i = 0; i < facilities; ++i) {
    fixed[i] = std::floor(static_cast<double>(rng.uniform_int(100, 110)) * std::sqrt(capacity[i]) +
                          static_cast<double>(rng.uniform_int(0, 90)));
  }
  const double total_demand = std::accumulate(demand.begin(), demand.end(), 0.0);
  const double total_capacity = std::accumulate(capacity.begin(), capacity.end(), 0.0);
  // Capacity-to-demand ratio 5, and every facility alone can serve the
  // largest single customer.
  const double max_demand = *std::max_element(demand.begin(), demand.end());
  for (auto& c : capacity) {
    c = std::max(std::floor(c * 5.0 * total_demand / total_capacity), max_demand);
  }

  MilpInstance inst;
  for (int i = 0; i < facilities; ++i) inst.add_var(fixed[i], 0.0, 1.0, true);
  auto x_index = [&](int i, int j) { return facilities + i * customers + j; };
  for (int i = 0; i < facilities; ++i) {
    for (int j = 0; j < customers; ++j) {
      const double dist = std::hypot(cx[j] - fx[i], cy[j] - fy[i]);
      inst.add_var(dist * 10.0 * demand[j], 0.0, 1.0, false);
    }
  }
  for (int j = 0; j < customers; ++j) {
    std::vector<Term> terms;
    for (int i = 0; i < facilities; ++i) terms.push_back({x_index(i, j), 1.0});
    inst.add_eq(terms, 1.0);
  }
  for (int i = 0; i < facilities; ++i) {
    std::vector<Term> terms;
    terms.push_back({i, -capacity[i]});
    for (int j = 0; j < customers; ++j) terms.push_back({x_index(i, j), demand[j]});
    inst.add_le(std::move(terms), 0.0);
  }
  std::vector<Term> aggregate;
  for (int i = 0; i < facilities; ++i) aggregate.push_back({i, capacity[i]});
  inst.add_ge(std::move(aggregate), total_demand);
  return inst;
}

std::vector<Edge> barabasi_albert_edges(int nodes, int affinity, std::uint64_t seed) {
  if (affinity < 1 || nodes <= affinity) throw std::invalid_argument("need nodes > affinity >= 1");
  Rng rng(seed);
  std::vector<Edge> edges;
  std::vector<double> degree(nodes, 0.0);
  // Seed graph: a star from node 0 to nodes 1..affinity.
  for (int v = 1; v <= affinity; ++v) {
    edges.emplace_back(0, v);
    degree[0] += 1.0;
    degree[v] += 1.0;
  }
  for (int v = affinity + 1; v < nodes; ++v) {
    std::vector<double> weight(degree.begin(), degree.begin() + v);
    std::vector<int> chosen;
    for (int k = 0; k < affinity; ++k) {
      const double total = std::accumulate(weight.begin(), weight.end(), 0.0);
      double draw = rng.uniform() * total;
      int pick = -1;
      for (int u = 0; u < v; ++u) {
        if (weight[u] <= 0.0) continue;
        pick = u;
        if (draw < weight[u]) break;
        draw -= weight[u];
      }
      chosen.push_back(pick);
      weight[pick] = 0.0;
    }
    std::sort(chosen.begin(), chosen.end());
    for (int u : chosen) {
      edges.emplace_back(u, v);
      degree[u] += 1.0;
      degree[v] += 1.0;
    }
  }
  return edges;
}

std::vector<std::vector<int>> greedy_clique_partition(int nodes, const std::vector<Edge>& edges) {
  std::vector<std::set<int>> adj(nodes);
  for (const auto& [u, v] : edges) {
    adj[u].insert(v);
    adj[v].insert(u);
  }
  auto by_degree = [&](int a, int b) {
    if (adj[a].size() != adj[b].size()) return adj[a].size() > adj[b].size();
    return a < b;
  };
  std::vector<int> order(nodes);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), by_degree);
  std::vector<bool> taken(nodes, false);
  std::vector<std::vector<int>> cliques;
  for (int leader : order) {
    if (taken[leader]) continue;
    std::vector<int> clique{leader};
    taken[leader] = true;
    std::vector<int> neighbours;
    for (int u : adj[leader]) {
      if (!taken[u]) neighbours.push_back(u);
    }
    std::sort(neighbours.begin(), neighbours.end(), by_degree);
    for (int u : neighbours) {
      const bool fits = std::all_of(clique.begin(), clique.end(), [&](int c) { return adj[c].count(u) > 0; });
      if (fits) {
        clique.push_back(u);
        taken[u] = true;
      }
    }
    std::sort(clique.begin(), clique.end());
    cliques.push_back(std::move(clique));
  }
  return cliques;
}

MilpInstance independent_set_from_graph(int nodes, const std::vector<Edge>& edges) {
  MilpInstance inst;
  for (int v = 0; v < nodes; ++v) inst.add_var(-1.0, 0.0, 1.0, true);
  const auto cliques = greedy_clique_partition(nodes, edges);
  std::vector<int> clique_of(nodes, -1);
  for (std::size_t k = 0; k < cliques.size(); ++k) {
    if (cliques[k].size() < 3) continue;
    std::vector<Term> terms;
    for (int v : cliques[k]) {
      clique_of[v] = static_cast<int>(k);
      terms.push_back({v, 1.0});
    }
    inst.add_le(std::move(terms), 1.0);
  }
  std::set<Edge> seen;
  for (auto [u, v] : edges) {
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    if (!seen.insert({u, v}).second) continue;
    if (clique_of[u] >= 0 && clique_of[u] == clique_of[v]) continue;
    inst.add_le({{u, 1.0}, {v, 1.0}}, 1.0);
  }
  return inst;
}

MilpInstance gen_independent_set(int nodes, int affinity, std::uint64_t seed) {
  return independent_set_from_graph(nodes, barabasi_albert_edges(nodes, affinity, seed));
}

// ---------------------------------------------------------------------------
// Canonical text format
//
//   evobranch-milp 1
//   name <text>
//   vars <n>
//   cons <m>
//   objective
//   <c_0> ... <c_{n-1}>
//   bounds
//   <lo> <hi>                   (n lines)
//   integer
//   <n characters of 0/1>
//   rows
//   <rhs> <k> <idx>:<coef> ...  (m lines)
//   end
// ---------------------------------------------------------------------------

namespace {

constexpr std::string_view kHeader = "evobranch-milp 1";

class LineReader {
 public:
  explicit LineReader(std::string_view text) : lines_(split_lines(text)) {}

  std::string_view next(std::string_view what) {
    while (pos_ < lines_.size()) {
      const auto line = trim(lines_[pos_++]);
      if (!line.empty()) return line;
    }
    throw InstanceFormatError(static_cast<int>(pos_) + 1, "unexpected end of file, expected " + std::string(what));
  }
  void expect(std::string_view keyword) {
    const auto line = next(keyword);
    if (line != keyword) fail("expected '" + std::string(keyword) + "'");
  }
  long long keyed_int(std::string_view key) {
    const auto line = next(key);
    if (line.substr(0, key.size()) != key || line.size() <= key.size() || line[key.size()] != ' ') {
      fail("expected '" + std::string(key) + " <count>'");
    }
    const auto value = parse_int(line.substr(key.size() + 1));
    if (!value || *value < 0) fail("invalid count for '" + std::string(key) + "'");
    return *value;
  }
  [[noreturn]] void fail(const std::string& message) const {
    throw InstanceFormatError(static_cast<int>(pos_), message);
  }

 private:
  std::vector<std::string_view> lines_;
  std::size_t pos_ = 0;
};

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> parts;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) parts.push_back(line.substr(start, i - start));
  }
  return parts;
}

}  // namespace

std::string write_instance_string(const MilpInstance& instance) {
  std::string out;
  out += kHeader;
  out += "\nname ";
  out += instance.name.empty() ? "-" : instance.name;
  out += "\nvars " + std::to_string(instance.num_vars());
  out += "\ncons " + std::to_string(instance.num_cons());
  out += "\nobjective\n";
  for (int j = 0; j < instance.num_vars(); ++j) {
    if (j) out += ' ';
    out += format_g17(instance.objective[j]);
  }
  out += "\nbounds\n";
  for (int j = 0; j < instance.num_vars(); ++j) {
    out += format_g17(instance.lower[j]);
    out += ' ';
    out += format_g17(instance.upper[j]);
    out += '\n';
  }
  out += "integer\n";
  for (auto flag : instance.is_integer) out += flag ? '1' : '0';
  out += "\nrows\n";
  for (const auto& row : instance.rows) {
    out += format_g17(row.rhs);
    out += ' ';
    out += std::to_string(row.terms.size());
    for (const auto& t : row.terms) {
      out += ' ';
      out += std::to_string(t.var);
      out += ':';
      out += format_g17(t.coef);
    }
    out += '\n';
  }
  out += "end\n";
  return out;
}

MilpInstance read_instance_string(std::string_view text) {
  LineReader in(text);
  if (in.next("header") != kHeader) in.fail("missing 'evobranch-milp 1' header");
  MilpInstance inst;
  {
    const auto line = in.next("name");
    if (line.substr(0, 4) != "name") in.fail("expected 'name <text>'");
    const auto name = trim(line.substr(4));
    inst.name = name == "-" ? "" : std::string(name);
  }
  const auto n = static_cast<int>(in.keyed_int("vars"));
  const auto m = static_cast<int>(in.keyed_int("cons"));
  in.expect("objective");
  if (n > 0) {
    const auto parts = split_ws(in.next("objective coefficients"));
    if (static_cast<int>(parts.size()) != n) in.fail("expected " + std::to_string(n) + " objective coefficients");
    for (auto p : parts) {
      const auto v = parse_double(p);
      if (!v || !std::isfinite(*v)) in.fail("invalid objective coefficient '" + std::string(p) + "'");
      inst.objective.push_back(*v);
    }
  }
  in.expect("bounds");
  for (int j = 0; j < n; ++j) {
    const auto parts = split_ws(in.next("bounds line"));
    if (parts.size() != 2) in.fail("expected '<lo> <hi>'");
    const auto lo = parse_double(parts[0]);
    const auto hi = parse_double(parts[1]);
    if (!lo || !hi) in.fail("invalid bound value");
    if (*lo > *hi) in.fail("lower bound exceeds upper bound");
    inst.lower.push_back(*lo);
    inst.upper.push_back(*hi);
  }
  in.expect("integer");
  if (n > 0) {
    const auto mask = in.next("integrality mask");
    if (static_cast<int>(mask.size()) != n) in.fail("integrality mask must have one character per variable");
    for (char c : mask) {
      if (c != '0' && c != '1') in.fail("integrality mask accepts only 0 and 1");
      inst.is_integer.push_back(c == '1' ? 1 : 0);
    }
  }
  in.expect("rows");
  for (int i = 0; i < m; ++i) {
    const auto parts = split_ws(in.next("constraint row"));
    if (parts.size() < 2) in.fail("constraint row needs '<rhs> <count> ...'");
    const auto rhs = parse_double(parts[0]);
    const auto count = parse_int(parts[1]);
    if (!rhs || !std::isfinite(*rhs)) in.fail("invalid rhs");
    if (!count || *count < 1) in.fail("constraint row must have at least one entry");
    if (static_cast<long long>(parts.size()) != 2 + *count) in.fail("entry count does not match the row");
    Constraint row;
    row.rhs = *rhs;
    for (std::size_t k = 2; k < parts.size(); ++k) {
      const auto colon = parts[k].find(':');
      if (colon == std::string_view::npos) in.fail("entry must be <index>:<coef>");
      const auto idx = parse_int(parts[k].substr(0, colon));
      const auto coef = parse_double(parts[k].substr(colon + 1));
      if (!idx || *idx < 0 || *idx >= n) in.fail("entry index out of range");
      if (!coef || !std::isfinite(*coef)) in.fail("invalid coefficient");
      row.terms.push_back({static_cast<int>(*idx), *coef});
    }
    inst.rows.push_back(std::move(row));
  }
  in.expect("end");
  try {
    inst.validate();
  } catch (const std::invalid_argument& e) {
    throw InstanceFormatError(0, e.what());
  }
  return inst;
}

void write_instance(const std::filesystem::path& path, const MilpInstance& instance) {
  write_file_atomic(path, write_instance_string(instance));
}

MilpInstance read_instance(const std::filesystem::path& path) {
  return read_instance_string(read_file(path));
}

std::string instance_checksum(const MilpInstance& instance) {
  return hex64(fnv1a64(write_instance_string(instance)));
}

}  // namespace evobranch
