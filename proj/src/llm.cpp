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


#include <httplib.h>

#include "evobranch/llm.hpp"

#include <chrono>
#include <cstdlib>
#include <json.hpp>
#include <thread>

#include "evobranch/text.hpp"

namespace evobranch {

void LlmClientConfig::validate() const {
  if (variant == LlmVariant::kScripted) {
    if (fixture.empty()) throw std::invalid_argument("scripted LLM client needs a fixture file");
    return;
  }
  if (endpoint.rfind("http://", 0) != 0 && endpoint.rfind("https://", 0) != 0) {
    throw std::invalid_argument("LLM endpoint must start with http:// or https://");
  }
  if (retries < 0) throw std::invalid_argument("retries must be >= 0");
  if (!(timeout_s > 0.0)) throw std::invalid_argument("timeout must be > 0");
  if (max_tokens < 1) throw std::invalid_argument("max_tokens must be >= 1");
}

std::vector<std::string> ScriptedLlmClient::split_fixture(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (std::string_view line : split_lines(text)) {
    if (trim(line) == kResponseSeparator) {
      out.push_back(std::move(current));
      current.clear();
      continue;
    }
    current.append(line);
    current += '\n';
  }
  if (!trim(current).empty() || out.empty()) out.push_back(std::move(current));
  return out;
}

ScriptedLlmClient ScriptedLlmClient::from_file(const std::filesystem::path& path) {
  return ScriptedLlmClient(split_fixture(read_file(path)));
}

std::string ScriptedLlmClient::complete(const PromptBundle& /*prompt*/) {
  if (next_ >= responses_.size()) {
    ++next_;
    throw LlmError("scripted fixture exhausted after " + std::to_string(responses_.size()) + " responses");
  }
  return responses_[next_++];
}

HttpLlmClient::HttpLlmClient(LlmClientConfig config) : config_(std::move(config)) { config_.validate(); }

std::string HttpLlmClient::request_body(const PromptBundle& prompt) const {
  nlohmann::ordered_json body;
  body["model"] = config_.model;
  body["messages"] = nlohmann::ordered_json::array(
      {{{"role", "system"}, {"content", prompt.system}}, {{"role", "user"}, {"content", prompt.user}}});
  body["temperature"] = config_.temperature;
  body["top_p"] = config_.top_p;
  body["max_tokens"] = config_.max_tokens;
  return body.dump();
}

namespace {

// scheme://host[:port] and the path that follows it.
std::pair<std::string, std::string> split_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::string extract_content(const std::string& body) {
  const auto json = nlohmann::json::parse(body, nullptr, false);
  if (json.is_discarded()) throw LlmError("reply is not JSON");
  try {
    return json.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw LlmError("reply has no choices[0].message.content");
  }
}

}  // namespace

std::string HttpLlmClient::complete(const PromptBundle& prompt) {
  const auto [base, path] = split_endpoint(config_.endpoint);
  httplib::Client client(base);
  const auto timeout = std::chrono::duration<double>(config_.timeout_s);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  const std::string body = request_body(prompt);
  std::string last_error;
  double wait = config_.backoff_s;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(wait));
      wait *= 2.0;
    }
    const auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) return extract_content(res->body);
    last_error = "HTTP " + std::to_string(res->status);
    if (res->status != 429 && res->status < 500) break;
  }
  throw LlmError(last_error + " after " + std::to_string(config_.retries + 1) + " attempt(s)");
}

std::unique_ptr<LlmClient> make_llm_client(const LlmClientConfig& config) {
  config.validate();
  if (config.variant == LlmVariant::kScripted) {
    return std::make_unique<ScriptedLlmClient>(ScriptedLlmClient::from_file(config.fixture));
  }
  return std::make_unique<HttpLlmClient>(config);
}

ScoreProgram parse_llm_response(std::string_view text) {
  std::string_view last;
  bool found = false;
  std::size_t pos = 0;
  while (true) {
    const auto open = text.find("```", pos);
    if (open == std::string_view::npos) break;
    const auto line_end = text.find('\n', open);
    if (line_end == std::string_view::npos) break;
    const auto close = text.find("```", line_end + 1);
    if (close == std::string_view::npos) break;
    last = text.substr(line_end + 1, close - line_end - 1);
    found = true;
    pos = close + 3;
  }
  if (!found) throw ParseError(0, 0, "response contains no fenced code block");
  return parse_program(last);
}

}  // namespace evobranch
