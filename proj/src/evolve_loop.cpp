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


#include <chrono>
#include <cmath>
#include <ctime>
#include <json.hpp>
#include <stdexcept>

#include "evobranch/evolve.hpp"
#include "evobranch/features.hpp"
#include "evobranch/text.hpp"

namespace evobranch {

void EvolutionConfig::validate() const {
  if (iterations < 0) throw std::invalid_argument("iterations must be >= 0");
  if (!(exploration_prob >= 0.0 && exploration_prob <= 1.0)) {
    throw std::invalid_argument("exploration probability must lie in [0, 1]");
  }
  if (inspirations < 0) throw std::invalid_argument("inspirations must be >= 0");
  if (island_count < 1) throw std::invalid_argument("island_count must be >= 1");
  if (instances.empty()) throw std::invalid_argument("evolution needs at least one instance");
  if (subset.empty()) throw std::invalid_argument("the tuning subset is empty");
  for (int i : subset) {
    if (i < 0 || i >= static_cast<int>(instances.size())) {
      throw std::invalid_argument("subset index " + std::to_string(i) + " is not in the instance set");
    }
  }
  if (!initial.result) throw std::invalid_argument("missing initial program");
  if (database.empty() || events.empty() || history.empty()) {
    throw std::invalid_argument("database, events and history paths are required");
  }
  metric.validate();
  tuning.validate();
}

namespace {

using ojson = nlohmann::ordered_json;

std::string history_header() {
  std::string h = "iteration,best_cost";
  for (const char* name : kEventNames) {
    h += ',';
    h += name;
  }
  return h;
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct ResumeState {
  int completed = -1;  // -1: nothing on disk
  std::map<std::string, long> counts;
};

ResumeState read_history(const std::filesystem::path& path) {
  ResumeState s;
  for (const char* name : kEventNames) s.counts[name] = 0;
  if (!std::filesystem::exists(path)) return s;
  const std::string text = read_file(path);
  const auto lines = split_lines(text);
  if (lines.empty() || trim(lines[0]) != history_header()) {
    throw std::runtime_error("history file " + path.string() + " has an unexpected header");
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    const std::string_view row = lines[i];
    while (true) {
      const auto comma = row.find(',', start);
      cells.push_back(row.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    constexpr std::size_t kCells = 2 + std::size(kEventNames);
    const auto it = parse_int(cells[0]);
    if (cells.size() != kCells || !it) {
      // A torn final row is ignored, anything else is corruption.
      if (i + 1 == lines.size()) break;
      throw std::runtime_error("history row " + std::to_string(i) + " is malformed");
    }
    s.completed = static_cast<int>(*it);
    for (std::size_t e = 0; e < std::size(kEventNames); ++e) {
      s.counts[kEventNames[e]] = parse_int(cells[2 + e]).value_or(0);
    }
  }
  return s;
}

// Keeps JSON lines whose "iteration" is at most `completed`; rewrites the
// file only if something was dropped.
void truncate_jsonl(const std::filesystem::path& path, int completed) {
  if (!std::filesystem::exists(path)) return;
  const std::string text = read_file(path);
  std::string kept;
  bool dropped = false;
  for (auto line : split_lines(text)) {
    if (trim(line).empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("iteration") || j["iteration"].get<int>() > completed) {
      dropped = true;
      continue;
    }
    kept.append(line);
    kept += '\n';
  }
  if (dropped) write_file_atomic(path, kept);
}

class Run {
 public:
  Run(const EvolutionConfig& config, LlmClient& llm) : c_(config), llm_(llm), db_(config.island_count) {
    for (int i : c_.subset) subset_.push_back(c_.instances[i]);
    solve_ = c_.tuning.solve_config();
  }

  EvolutionResult go() {
    EvolutionResult result;
    ResumeState state = read_history(c_.history);
    if (state.completed >= 0) {
      truncate_jsonl(c_.database, state.completed);
      truncate_jsonl(c_.events, state.completed);
      db_ = IslandDatabase::from_jsonl(read_file(c_.database), c_.island_count);
      if (db_.empty()) throw std::runtime_error("history exists but the database is empty");
      result.resumed_from = state.completed;
    } else {
      // Fresh run: any partial files from a run killed before its first
      // history row are replaced.
      std::filesystem::remove(c_.database);
      std::filesystem::remove(c_.events);
      seed_database();
      state.completed = 0;
    }
    counts_ = state.counts;
    llm_.skip(state.completed);
    if (state.completed < c_.iterations) baseline_ = baseline_node_counts(c_.baseline, subset_, solve_, c_.workers);

    for (int t = state.completed + 1; t <= c_.iterations; ++t) {
      iteration(t);
      result.best_cost_history.push_back(db_.best().cost);
      append_history(t);
    }
    result.best = db_.best();
    result.event_counts = counts_;
    return result;
  }

 private:
  PolicyFactory factory(const ScoreProgram& program, const std::vector<double>& theta) const {
    auto shared = std::make_shared<const ScoreProgram>(program);
    return [shared, theta] { return std::make_unique<DslPolicy>(shared, theta); };
  }

  void seed_database() {
    ProgramRecord r;
    r.program = c_.initial;
    r.theta = c_.initial.params;
    r.iteration = 0;
    r.cost = evaluate_policy(factory(r.program, r.theta), c_.instances, c_.metric, solve_, c_.workers).cost;
    r.subset_cost = evaluate_policy(factory(r.program, r.theta), subset_, c_.metric, solve_, c_.workers).cost;
    if (!std::isfinite(r.cost)) throw std::runtime_error("the initial program fails on the instance set");
    const ProgramRecord& stored = db_.insert(std::move(r));
    write_file_atomic(c_.database, record_to_json(stored) + "\n");
    write_file_atomic(c_.history, history_header() + "\n");
    append_history(0);
  }

  void event(int t, const char* name, ojson payload) {
    ++counts_[name];
    ojson line;
    line["iteration"] = t;
    line["event"] = name;
    line["payload"] = std::move(payload);
    append_line(c_.events, line.dump());
  }

  void append_history(int t) {
    std::string row = std::to_string(t) + "," + format_shortest(db_.best().cost);
    for (const char* name : kEventNames) row += "," + std::to_string(counts_[name]);
    append_line(c_.history, row);
  }

  void iteration(int t) {
    Rng rng(mix64(c_.seed ^ mix64(static_cast<std::uint64_t>(t))));
    const ParentDraw draw = sample_parent(db_, rng, c_.exploration_prob);
    const ProgramRecord& parent = *draw.record;
    const auto inspirations = sample_inspirations(db_, parent, c_.inspirations);
    const PromptBundle prompt = build_prompt(parent, inspirations, format_feature_table(), dsl_grammar_text());

    std::string reply;
    try {
      reply = llm_.complete(prompt);
    } catch (const LlmError& e) {
      event(t, "llm_error", {{"message", e.what()}});
      return;
    }
    event(t, "generated", {{"parent", parent.id}, {"exploration", draw.exploration}, {"chars", reply.size()}});

    ScoreProgram program;
    try {
      program = parse_llm_response(reply);
    } catch (const ParseError& e) {
      event(t, "parse_reject", {{"message", e.what()}});
      return;
    }

    const FilterResult filter = fast_filter(program, program.params, subset_, baseline_, solve_);
    if (!filter.pass) {
      event(t, "filter_reject", {{"reason", filter.reason}});
      return;
    }

    OptBudget budget = c_.tuning;
    budget.rng_seed = mix64(c_.seed + static_cast<std::uint64_t>(t));
    const OptResult tuned = optimize_params(program, program.params, subset_, c_.metric, budget, c_.workers);
    event(t, "tuned",
          {{"trials", tuned.trials.size()},
           {"subset_cost", tuned.failed ? ojson(nullptr) : ojson(tuned.cost)},
           {"failed", tuned.failed}});
    if (tuned.failed) return;

    const double cost =
        evaluate_policy(factory(program, tuned.theta), c_.instances, c_.metric, solve_, c_.workers).cost;
    if (!std::isfinite(cost)) {
      event(t, "evaluated", {{"cost", nullptr}, {"stored", false}});
      return;
    }
    ProgramRecord r;
    r.program = program;
    r.theta = tuned.theta;
    r.cost = cost;
    r.subset_cost = tuned.cost;
    r.parent = parent.id;
    r.iteration = t;
    const ProgramRecord& stored = db_.insert(std::move(r));
    append_line(c_.database, record_to_json(stored));
    event(t, "evaluated",
          {{"id", stored.id}, {"cost", stored.cost}, {"stored", true}, {"created_at", utc_now()}});
  }

  const EvolutionConfig& c_;
  LlmClient& llm_;
  IslandDatabase db_;
  std::vector<MilpInstance> subset_;
  BnbConfig solve_;
  std::vector<long> baseline_;
  std::map<std::string, long> counts_;
};

}  // namespace

EvolutionResult evolve(const EvolutionConfig& config, LlmClient& llm) {
  config.validate();
  return Run(config, llm).go();
}

}  // namespace evobranch
