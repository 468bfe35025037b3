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

#include "evobranch/config.hpp"

#include <algorithm>
#include <cctype>

#include "evobranch/dsl.hpp"
#include "evobranch/instances.hpp"
#include "evobranch/text.hpp"

namespace evobranch {

namespace {

std::string at_line(int line, const std::string& msg) { return "config line " + std::to_string(line) + ": " + msg; }

bool valid_name(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '-' || c == '.';
  });
}

// Drops a trailing comment, respecting quotes.
std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    if (quoted && line[k] == '\\') {
      ++k;
    } else if (line[k] == '"') {
      quoted = !quoted;
    } else if (line[k] == '#' && !quoted) {
      return line.substr(0, k);
    }
  }
  return line;
}

std::string scalar(std::string_view tok, int line) {
  tok = trim(tok);
  if (tok.empty()) throw ConfigError(at_line(line, "empty value"));
  if (tok.front() != '"') {
    if (tok.find_first_of(" \t\"[]") != std::string_view::npos) {
      throw ConfigError(at_line(line, "bad value '" + std::string(tok) + "'"));
    }
    return std::string(tok);
  }
  if (tok.size() < 2 || tok.back() != '"') throw ConfigError(at_line(line, "unterminated string"));
  std::string out;
  for (std::size_t k = 1; k + 1 < tok.size(); ++k) {
    char c = tok[k];
    if (c == '\\') {
      if (k + 2 >= tok.size()) throw ConfigError(at_line(line, "dangling escape"));
      const char e = tok[++k];
      c = e == 'n' ? '\n' : e == 't' ? '\t' : e;
    } else if (c == '"') {
      throw ConfigError(at_line(line, "stray quote"));
    }
    out.push_back(c);
  }
  return out;
}

std::vector<std::string> array_items(std::string_view inner, int line) {
  std::vector<std::string> out;
  if (trim(inner).empty()) return out;
  bool quoted = false;
  std::size_t start = 0;
  for (std::size_t k = 0; k <= inner.size(); ++k) {
    if (k < inner.size() && quoted && inner[k] == '\\') {
      ++k;
      continue;
    }
    if (k < inner.size() && inner[k] == '"') quoted = !quoted;
    if (k == inner.size() || (inner[k] == ',' && !quoted)) {
      const std::string_view item = trim(inner.substr(start, k - start));
      // a trailing comma is fine
      if (!(item.empty() && k == inner.size() && !out.empty())) out.push_back(scalar(item, line));
      start = k + 1;
    }
  }
  return out;
}

const char* kDefaultInitial =
    "used_features: []\n"
    "params: [0.5]\n"
    "bounds: [[0, 1]]\n"
    "score:\n"
    "  return param(0)\n";

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text) {
  KeyValueConfig cfg;
  std::string section;
  int line_no = 0;
  for (std::string_view raw : split_lines(text)) {
    ++line_no;
    const std::string_view line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[' && line.find('=') == std::string_view::npos) {
      if (line.back() != ']') throw ConfigError(at_line(line_no, "unterminated section header"));
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!valid_name(section)) throw ConfigError(at_line(line_no, "bad section name"));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(at_line(line_no, "expected key = value"));
    const std::string_view key = trim(line.substr(0, eq));
    if (!valid_name(key)) throw ConfigError(at_line(line_no, "bad key '" + std::string(key) + "'"));
    const std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
    if (cfg.values_.count(full)) throw ConfigError(at_line(line_no, "duplicate key '" + full + "'"));
    const std::string_view value = trim(line.substr(eq + 1));
    Value v;
    v.line = line_no;
    if (!value.empty() && value.front() == '[') {
      if (value.back() != ']') throw ConfigError(at_line(line_no, "arrays must close on the same line"));
      v.array = true;
      v.items = array_items(value.substr(1, value.size() - 2), line_no);
    } else {
      v.items.push_back(scalar(value, line_no));
    }
    cfg.values_.emplace(full, std::move(v));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) throw ConfigError("config file not found: " + path.string());
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return parse(text);
}

const KeyValueConfig::Value* KeyValueConfig::find(const std::string& key) const {
  const auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

std::optional<std::string> KeyValueConfig::get_string(const std::string& key) const {
  const Value* v = find(key);
  if (!v) return std::nullopt;
  if (v->array) throw ConfigError(at_line(v->line, key + " expects a single value"));
  return v->items[0];
}

std::optional<double> KeyValueConfig::get_double(const std::string& key) const {
  const auto s = get_string(key);
  if (!s) return std::nullopt;
  const auto d = parse_double(*s);
  if (!d) throw ConfigError(at_line(find(key)->line, key + " expects a number"));
  return d;
}

std::optional<long long> KeyValueConfig::get_int(const std::string& key) const {
  const auto s = get_string(key);
  if (!s) return std::nullopt;
  const auto i = parse_int(*s);
  if (!i) throw ConfigError(at_line(find(key)->line, key + " expects an integer"));
  return i;
}

std::optional<bool> KeyValueConfig::get_bool(const std::string& key) const {
  const auto s = get_string(key);
  if (!s) return std::nullopt;
  if (*s == "true") return true;
  if (*s == "false") return false;
  throw ConfigError(at_line(find(key)->line, key + " expects true or false"));
}

std::vector<std::string> KeyValueConfig::get_list(const std::string& key) const {
  const Value* v = find(key);
  return v ? v->items : std::vector<std::string>{};
}

void KeyValueConfig::reject_unknown(const std::set<std::string>& known) const {
  for (const auto& [key, v] : values_) {
    if (!known.count(key)) throw ConfigError(at_line(v.line, "unknown key '" + key + "'"));
  }
}

BnbConfig solve_config_from(const KeyValueConfig& cfg) {
  BnbConfig out;
  out.node_limit = static_cast<long>(cfg.get_int("solve.node_limit").value_or(out.node_limit));
  out.time_limit = cfg.get_double("solve.time_limit").value_or(out.time_limit);
  out.rng_seed = static_cast<std::uint64_t>(cfg.get_int("seed").value_or(0));
  return out;
}

const std::set<std::string>& evolution_config_keys() {
  static const std::set<std::string> keys = {
      "seed", "solve.node_limit", "solve.time_limit",
      "evolve.iterations", "evolve.exploration_prob", "evolve.inspirations", "evolve.islands", "evolve.baseline",
      "evolve.initial", "evolve.output_dir", "evolve.workers",
      "instances.files", "instances.dir", "instances.preset", "instances.count", "instances.seed",
      "instances.subset",
      "metric.kind", "metric.shift", "metric.time_limit",
      "tuning.max_iterations", "tuning.node_limit", "tuning.time_limit",
      "llm.variant", "llm.endpoint", "llm.model", "llm.api_key_env", "llm.timeout_s", "llm.retries",
      "llm.backoff_s", "llm.fixture", "llm.temperature", "llm.top_p", "llm.max_tokens"};
  return keys;
}

EvolutionConfig evolution_config_from(const KeyValueConfig& cfg, const std::filesystem::path& base_dir) {
  cfg.reject_unknown(evolution_config_keys());
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  EvolutionConfig c;
  c.seed = static_cast<std::uint64_t>(cfg.get_int("seed").value_or(0));
  c.iterations = static_cast<int>(cfg.get_int("evolve.iterations").value_or(c.iterations));
  c.exploration_prob = cfg.get_double("evolve.exploration_prob").value_or(c.exploration_prob);
  c.inspirations = static_cast<int>(cfg.get_int("evolve.inspirations").value_or(c.inspirations));
  c.island_count = static_cast<int>(cfg.get_int("evolve.islands").value_or(c.island_count));
  c.baseline = cfg.get_string("evolve.baseline").value_or(c.baseline);
  c.workers = static_cast<int>(cfg.get_int("evolve.workers").value_or(c.workers));
  const auto initial = cfg.get_string("evolve.initial");
  c.initial = parse_program(initial ? read_file(resolve(*initial)) : std::string(kDefaultInitial));

  const auto out_dir = cfg.get_string("evolve.output_dir");
  if (!out_dir) throw ConfigError("evolve.output_dir is required");
  const std::filesystem::path dir = resolve(*out_dir);
  c.database = dir / "programs.jsonl";
  c.events = dir / "events.jsonl";
  c.history = dir / "history.csv";

  // instance set: explicit files, a directory of .mip files, or a preset
  const int sources = cfg.has("instances.files") + cfg.has("instances.dir") + cfg.has("instances.preset");
  if (sources != 1) throw ConfigError("set exactly one of instances.files, instances.dir, instances.preset");
  if (cfg.has("instances.files")) {
    for (const auto& f : cfg.get_list("instances.files")) c.instances.push_back(read_instance(resolve(f)));
  } else if (cfg.has("instances.dir")) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(resolve(*cfg.get_string("instances.dir")))) {
      if (e.path().extension() == ".mip") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) c.instances.push_back(read_instance(f));
  } else {
    const std::string name = *cfg.get_string("instances.preset");
    auto spec = find_preset(name);
    if (!spec) throw ConfigError("unknown preset '" + name + "'");
    spec->count = static_cast<int>(cfg.get_int("instances.count").value_or(20));
    spec->seed = static_cast<std::uint64_t>(cfg.get_int("instances.seed").value_or(0));
    c.instances = generate(*spec);
  }
  if (c.instances.empty()) throw ConfigError("the instance set is empty");
  const long long subset = cfg.get_int("instances.subset").value_or(std::min<long long>(8, c.instances.size()));
  if (subset < 1 || subset > static_cast<long long>(c.instances.size())) {
    throw ConfigError("instances.subset must be in [1, number of instances]");
  }
  for (int k = 0; k < subset; ++k) c.subset.push_back(k);

  const std::string kind = cfg.get_string("metric.kind").value_or("nodes");
  if (kind == "nodes") {
    c.metric.kind = MetricKind::kNodes;
  } else if (kind == "gap") {
    c.metric.kind = MetricKind::kGap;
  } else if (kind == "time") {
    c.metric.kind = MetricKind::kTime;
  } else {
    throw ConfigError("metric.kind must be nodes, gap or time");
  }
  c.metric.shift = cfg.get_double("metric.shift").value_or(c.metric.shift);
  c.metric.time_limit = cfg.get_double("metric.time_limit").value_or(c.metric.time_limit);

  if (const auto n = cfg.get_int("solve.node_limit")) c.tuning.node_limit = static_cast<long>(*n);
  if (const auto t = cfg.get_double("solve.time_limit")) c.tuning.time_limit = *t;
  c.tuning.max_iterations = static_cast<int>(cfg.get_int("tuning.max_iterations").value_or(c.tuning.max_iterations));
  c.tuning.node_limit = static_cast<long>(cfg.get_int("tuning.node_limit").value_or(c.tuning.node_limit));
  c.tuning.time_limit = cfg.get_double("tuning.time_limit").value_or(c.tuning.time_limit);
  c.tuning.rng_seed = c.seed;

  const std::string variant = cfg.get_string("llm.variant").value_or("live");
  if (variant == "live") {
    c.llm.variant = LlmVariant::kLive;
  } else if (variant == "scripted") {
    c.llm.variant = LlmVariant::kScripted;
  } else {
    throw ConfigError("llm.variant must be live or scripted");
  }
  c.llm.endpoint = cfg.get_string("llm.endpoint").value_or(c.llm.endpoint);
  c.llm.model = cfg.get_string("llm.model").value_or(c.llm.model);
  c.llm.api_key_env = cfg.get_string("llm.api_key_env").value_or(c.llm.api_key_env);
  c.llm.timeout_s = cfg.get_double("llm.timeout_s").value_or(c.llm.timeout_s);
  c.llm.retries = static_cast<int>(cfg.get_int("llm.retries").value_or(c.llm.retries));
  c.llm.backoff_s = cfg.get_double("llm.backoff_s").value_or(c.llm.backoff_s);
  c.llm.temperature = cfg.get_double("llm.temperature").value_or(c.llm.temperature);
  c.llm.top_p = cfg.get_double("llm.top_p").value_or(c.llm.top_p);
  c.llm.max_tokens = static_cast<int>(cfg.get_int("llm.max_tokens").value_or(c.llm.max_tokens));
  if (const auto f = cfg.get_string("llm.fixture")) c.llm.fixture = resolve(*f);

  try {
    c.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return c;
}

}  // namespace evobranch
