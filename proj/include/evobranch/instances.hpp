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

#ifndef EVOBRANCH_INSTANCES_HPP_
#define EVOBRANCH_INSTANCES_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "evobranch/milp.hpp"

namespace evobranch {

enum class Family { kSetCover, kCombAuction, kFacilityLocation, kIndependentSet };

std::string_view to_string(Family family);
std::optional<Family> parse_family(std::string_view name);

// `size_a`/`size_b` are family specific:
//   set_cover: rows, cols (+ density)
//   comb_auction: items, bids
//   facility_location: facilities, customers
//   independent_set: nodes, affinity
struct GeneratorSpec {
  Family family = Family::kSetCover;
  int size_a = 0;
  int size_b = 0;
  double density = 0.05;
  std::uint64_t seed = 0;
  int count = 1;
};

// Named size presets. "*-easy" are the reference sizes; "*-desk" are the
// scaled-down defaults used by the test suites.
struct Preset {
  std::string_view name;
  GeneratorSpec spec;
};
const std::vector<Preset>& presets();
std::optional<GeneratorSpec> find_preset(std::string_view name);

// Instance k of a batch uses seed `spec.seed + k`.
std::vector<MilpInstance> generate(const GeneratorSpec& spec);
MilpInstance generate_one(const GeneratorSpec& spec, int index);

MilpInstance gen_set_cover(int rows, int cols, double density, std::uint64_t seed);
MilpInstance gen_comb_auction(int items, int bids, std::uint64_t seed);
MilpInstance gen_facility_location(int facilities, int customers, std::uint64_t seed);
MilpInstance gen_independent_set(int nodes, int affinity, std::uint64_t seed);

struct Bid {
  std::vector<int> items;
  double price = 0.0;
};
// Winner determination: max sum(price_b x_b) s.t. each item sold at most once.
MilpInstance comb_auction_from_bids(int items, const std::vector<Bid>& bids);

using Edge = std::pair<int, int>;
std::vector<Edge> barabasi_albert_edges(int nodes, int affinity, std::uint64_t seed);
// Greedy partition: repeatedly take the highest-degree remaining node and
// extend it with remaining neighbours (by degree) adjacent to the whole clique.
std::vector<std::vector<int>> greedy_clique_partition(int nodes, const std::vector<Edge>& edges);
// Max |S| independent set. Cliques of size >= 3 from the greedy partition
// become single rows; every other edge gets x_u + x_v <= 1.
MilpInstance independent_set_from_graph(int nodes, const std::vector<Edge>& edges);

class InstanceFormatError : public std::runtime_error {
 public:
  InstanceFormatError(int line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

std::string write_instance_string(const MilpInstance& instance);
MilpInstance read_instance_string(std::string_view text);
void write_instance(const std::filesystem::path& path, const MilpInstance& instance);
MilpInstance read_instance(const std::filesystem::path& path);

// FNV-1a 64 of the canonical text, as 16 hex digits.
std::string instance_checksum(const MilpInstance& instance);

}  // namespace evobranch

#endif  // EVOBRANCH_INSTANCES_HPP_
