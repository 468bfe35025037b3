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


// Language-model clients for program generation.

#ifndef EVOBRANCH_LLM_HPP_
#define EVOBRANCH_LLM_HPP_

#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "evobranch/dsl.hpp"

namespace evobranch {

struct PromptBundle {
  std::string system;
  std::string user;
};

enum class LlmVariant { kLive, kScripted };

struct LlmClientConfig {
  LlmVariant variant = LlmVariant::kLive;
  // http(s)://host[:port]/path of a chat-completion endpoint.
  std::string endpoint = "http://127.0.0.1:8000/v1/chat/completions";
  std::string model = "local-model";
  double temperature = 0.7;
  double top_p = 0.95;
  int max_tokens = 8192;
  std::string api_key_env = "EVOBRANCH_API_KEY";
  double timeout_s = 300.0;
  int retries = 3;          // extra attempts after the first
  double backoff_s = 2.0;   // doubled after each failed attempt
  std::filesystem::path fixture;  // scripted variant

  void validate() const;
};

// Transport failure, exhausted retries or an unusable reply.
class LlmError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual std::string complete(const PromptBundle& prompt) = 0;
  // Resuming runs skip the replies already consumed.
  virtual void skip(long calls) { (void)calls; }
};

inline constexpr std::string_view kResponseSeparator = "---RESPONSE---";

// Replays a fixture file: replies separated by lines holding exactly
// ---RESPONSE---, handed out in order. Running past the end is an LlmError.
class ScriptedLlmClient : public LlmClient {
 public:
  explicit ScriptedLlmClient(std::vector<std::string> responses) : responses_(std::move(responses)) {}
  static ScriptedLlmClient from_file(const std::filesystem::path& path);
  static std::vector<std::string> split_fixture(std::string_view text);

  std::string complete(const PromptBundle& prompt) override;
  void skip(long calls) override { next_ += static_cast<std::size_t>(calls); }
  std::size_t consumed() const { return next_; }

 private:
  std::vector<std::string> responses_;
  std::size_t next_ = 0;
};

// One chat-completion POST per attempt. 429, 5xx and transport errors are
// retried with exponential backoff; other statuses fail at once.
class HttpLlmClient : public LlmClient {
 public:
  explicit HttpLlmClient(LlmClientConfig config);
  std::string complete(const PromptBundle& prompt) override;
  std::string request_body(const PromptBundle& prompt) const;

 private:
  LlmClientConfig config_;
};

std::unique_ptr<LlmClient> make_llm_client(const LlmClientConfig& config);

// Body of the last ``` fenced block (the info string after the opening fence
// is dropped), parsed with parse_program. Throws ParseError; a reply without
// a fenced block reports line 0.
ScoreProgram parse_llm_response(std::string_view text);

}  // namespace evobranch

#endif  // EVOBRANCH_LLM_HPP_
