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


// Evolutionary search over score programs: an island-partitioned program
// database, parent and inspiration sampling, prompt assembly and the main
// generate / filter / tune / evaluate loop.

#ifndef EVOBRANCH_EVOLVE_HPP_
#define EVOBRANCH_EVOLVE_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evobranch/dsl.hpp"
#include "evobranch/llm.hpp"
#include "evobranch/param_opt.hpp"
#include "evobranch/rng.hpp"

namespace evobranch {

inline constexpr int kDatabaseVersion = 1;

struct ProgramRecord {
  long id = 0;
  ScoreProgram program;  // as generated, params = theta0
  std::vector<double> theta;  // tuned
  double cost = 0.0;          // on the full set
  double subset_cost = 0.0;   // on the tuning subset
  int island = 0;
  std::optional<long> parent;
  int iteration = 0;
};

// FNV-1a of the sorted used-feature list ("1,7,9"), modulo island_count.
int island_of(const ScoreProgram& program, int island_count);

// One JSON object per line; keys in a fixed order so equal databases are
// equal bytes.
std::string record_to_json(const ProgramRecord& record);
ProgramRecord record_from_json(std::string_view line);

class IslandDatabase {
 public:
  explicit IslandDatabase(int island_count = 4);

  // Assigns id and island, stores the record and returns it.
  const ProgramRecord& insert(ProgramRecord record);
  // Loads records verbatim (ids included); island is recomputed.
  void restore(ProgramRecord record);

  bool empty() const { return records_.empty(); }
  std::size_t size() const { return records_.size(); }
  int island_count() const { return island_count_; }
  const std::vector<ProgramRecord>& records() const { return records_; }
  const ProgramRecord& at_id(long id) const;
  // Positions into records(), ascending id.
  const std::vector<std::size_t>& island(int k) const;
  const ProgramRecord& best() const;
  // Lowest mean cost over nonempty islands; ties go to the lower island.
  int best_island() const;

  std::string to_jsonl() const;
  static IslandDatabase from_jsonl(std::string_view text, int island_count);

 private:
  int island_count_;
  std::vector<ProgramRecord> records_;
  std::vector<std::vector<std::size_t>> islands_;
};

struct ParentDraw {
  const ProgramRecord* record = nullptr;
  bool exploration = false;
};

// With probability `exploration_prob` a uniform record from the whole
// database; otherwise a rank-weighted record from the best island, weight
// n - rank with rank 0 the lowest cost.
ParentDraw sample_parent(const IslandDatabase& db, Rng& rng, double exploration_prob = 0.7);

// Whitespace-separated words and single punctuation characters.
std::vector<std::string> program_tokens(std::string_view source);
// Levenshtein distance over tokens divided by the longer length (0 if both empty).
double token_edit_distance(std::span<const std::string> a, std::span<const std::string> b);
// 1 - |A n B| / |A u B| over used features (0 if both empty).
double feature_jaccard_distance(const ScoreProgram& a, const ScoreProgram& b);
// Mean of the two distances above, on canonical sources.
double program_distance(const ScoreProgram& a, const ScoreProgram& b);

// From the parent's island, excluding the parent: the ceil(k/2) cheapest
// records, then the floor(k/2) others whose set maximizes the summed
// distance to the parent plus the summed pairwise distance within the set.
std::vector<const ProgramRecord*> sample_inspirations(const IslandDatabase& db, const ProgramRecord& parent,
                                                      int k = 4);

std::string dsl_grammar_text();

// The canonical source of `program` with params replaced by `theta`.
std::string program_with_theta(const ScoreProgram& program, std::span<const double> theta);

PromptBundle build_prompt(const ProgramRecord& parent, std::span<const ProgramRecord* const> inspirations,
                          std::string_view feature_doc, std::string_view grammar);

struct EvolutionConfig {
  int iterations = 200;
  double exploration_prob = 0.7;
  int inspirations = 4;
  int island_count = 4;
  std::string baseline = "rpb";  // fast-filter reference policy
  std::vector<MilpInstance> instances;   // full set
  std::vector<int> subset;               // indices into `instances`
  CostMetric metric;
  OptBudget tuning;                      // node/time limits apply to every solve
  LlmClientConfig llm;
  std::uint64_t seed = 0;
  int workers = 1;
  ScoreProgram initial;
  std::filesystem::path database;  // program database, JSON lines
  std::filesystem::path events;    // event log, JSON lines
  std::filesystem::path history;   // iteration,best_cost,<event counts>

  void validate() const;
};

inline constexpr const char* kEventNames[] = {"generated", "parse_reject", "filter_reject",
                                              "tuned",     "evaluated",    "llm_error"};

struct EvolutionResult {
  ProgramRecord best;
  std::vector<double> best_cost_history;  // one per iteration, this run only
  std::map<std::string, long> event_counts;
  int resumed_from = 0;  // completed iterations found on disk
};

// Runs iterations 1..config.iterations, resuming after the last iteration
// recorded in the history file. Records or events from an unfinished
// iteration are discarded before resuming.
EvolutionResult evolve(const EvolutionConfig& config, LlmClient& llm);

}  // namespace evobranch

#endif  // EVOBRANCH_EVOLVE_HPP_
