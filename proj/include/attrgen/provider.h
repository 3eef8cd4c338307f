/*
 * Copyright 2026 The attrgen Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Text-generation backends. `Provider` owns the parts every backend shares:
// retries with exponential backoff, bounded fan-out, the optional spending
// cap and the cost meter. Backends only implement a single attempt.

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "attrgen/error.h"

namespace attrgen {

struct GenerationParams {
  double temperature = 1.0;
  double top_p = 1.0;
  int max_tokens = 512;

  void validate() const;  // throws PreconditionError
};

struct CompletionResult {
  std::string text;
  std::uint64_t prompt_tokens = 0;
  std::uint64_t completion_tokens = 0;

  bool operator==(const CompletionResult&) const = default;
};

// Prices are currency units per 1000 tokens.
struct Pricing {
  double prompt_per_1k = 0.0;
  double completion_per_1k = 0.0;
};

double token_cost(const Pricing& pricing, std::uint64_t prompt_tokens,
                  std::uint64_t completion_tokens);

struct CostSnapshot {
  Pricing pricing;
  std::uint64_t prompt_tokens = 0;
  std::uint64_t completion_tokens = 0;
  std::uint64_t requests = 0;
  std::uint64_t examples_emitted = 0;

  double total_cost() const {
    return token_cost(pricing, prompt_tokens, completion_tokens);
  }
};

// Querying cost per 1000 emitted examples. Throws PreconditionError when no
// example has been emitted.
double cost_per_1k_examples(const CostSnapshot& snapshot);

// Token and example counters. All updates are atomic with respect to each
// other; snapshots are consistent.
class CostMeter {
 public:
  explicit CostMeter(Pricing pricing = {}) : pricing_(pricing) {}

  void record(std::uint64_t prompt_tokens, std::uint64_t completion_tokens);
  void add_examples(std::uint64_t n);
  CostSnapshot snapshot() const;
  double total_cost() const { return snapshot().total_cost(); }
  const Pricing& pricing() const { return pricing_; }

  // Upper bound on what one more request could cost.
  double projected_cost(std::uint64_t prompt_tokens,
                        std::uint64_t max_completion_tokens) const;

  void arm_cap(double cap);
  void disarm_cap();
  std::optional<double> cap() const;

 private:
  mutable std::mutex mu_;
  Pricing pricing_;
  std::uint64_t prompt_tokens_ = 0;
  std::uint64_t completion_tokens_ = 0;
  std::uint64_t requests_ = 0;
  std::uint64_t examples_ = 0;
  std::optional<double> cap_;
};

// Retries only transient failures. Delay before retry r (0-based) is
// base_delay * 2^r, scaled by a uniform factor in [1 - jitter, 1 + jitter].
struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds base_delay{1000};
  double jitter = 0.2;
  // Replaceable so tests do not sleep.
  std::function<void(std::chrono::milliseconds)> sleep;
};

enum class FailureKind { kTransient, kPermanent, kAuthentication, kBudget };

struct CompletionOutcome {
  std::optional<CompletionResult> result;
  FailureKind failure = FailureKind::kPermanent;  // meaningful when !ok()
  std::string error;

  bool ok() const { return result.has_value(); }
};

class Provider {
 public:
  explicit Provider(Pricing pricing = {}, RetryPolicy retry = {});
  virtual ~Provider() = default;
  Provider(const Provider&) = delete;
  Provider& operator=(const Provider&) = delete;

  // One completion with retries. Updates the meter once on success.
  // Throws PreconditionError (empty prompt), ProviderError, BudgetExceeded.
  CompletionResult complete(const std::string& prompt,
                            const GenerationParams& params);

  // Order-preserving fan-out with at most `max_in_flight` outstanding
  // requests. Failures are recorded in place and never abort siblings.
  std::vector<CompletionOutcome> complete_many(
      const std::vector<std::string>& prompts, const GenerationParams& params,
      std::size_t max_in_flight);

  CostMeter& meter() { return meter_; }
  const CostMeter& meter() const { return meter_; }
  const RetryPolicy& retry_policy() const { return retry_; }

  virtual std::string model_id() const = 0;

 protected:
  // A single attempt. Throw ProviderError on failure.
  virtual CompletionResult attempt(const std::string& prompt,
                                   const GenerationParams& params) = 0;

 private:
  std::chrono::milliseconds backoff(int retry);

  CostMeter meter_;
  RetryPolicy retry_;
  std::mutex jitter_mu_;
  std::uint64_t jitter_state_ = 0x5eed;
};

// --- Mock backend -----------------------------------------------------------

// One scripted behaviour. The first rule whose matcher accepts the prompt
// wins. `response` may contain "{prompt}", replaced by the prompt text.
// Token counts default to whitespace-token counts of prompt and response.
// A rule with `error` set fails instead; with `fail_times` >= 0 it fails
// that many times and is then skipped, so a later rule can answer.
struct MockRule {
  enum class Match { kSubstring, kPattern };

  Match match = Match::kSubstring;
  std::string pattern;
  std::string response;
  std::optional<std::uint64_t> prompt_tokens;
  std::optional<std::uint64_t> completion_tokens;
  std::optional<ProviderErrorKind> error;
  int fail_times = -1;
};

// Script file (JSON):
//   {"model": "mock",
//    "rules": [{"contains": "economy", "response": "...",
//               "prompt_tokens": 12, "completion_tokens": 40},
//              {"pattern": "^Is the .*", "response": "No"},
//              {"contains": "x", "error": "transient", "fail_times": 2}],
//    "default": {"response": "..."}}
// Without "default", unmatched prompts fail permanently.
struct MockScript {
  std::string model = "mock";
  std::vector<MockRule> rules;
  std::optional<MockRule> fallback;

  static MockScript parse(const std::string& json, const std::string& source);
  static MockScript load(const std::filesystem::path& path);
};

class MockProvider : public Provider {
 public:
  explicit MockProvider(MockScript script, Pricing pricing = {},
                        RetryPolicy retry = {});

  std::string model_id() const override { return script_.model; }

  // Artificial latency per attempt; lets tests observe concurrency.
  void set_latency(std::chrono::milliseconds latency) { latency_ = latency; }
  std::size_t peak_in_flight() const { return peak_; }
  std::size_t attempts() const { return attempts_; }

 protected:
  CompletionResult attempt(const std::string& prompt,
                           const GenerationParams& params) override;

 private:
  struct CompiledRule {
    MockRule rule;
    std::optional<std::regex> regex;
    std::atomic<int> failures{0};
  };

  CompletionResult respond(const MockRule& rule, const std::string& prompt);

  MockScript script_;
  std::vector<std::unique_ptr<CompiledRule>> compiled_;
  std::chrono::milliseconds latency_{0};
  std::atomic<std::size_t> in_flight_{0};
  std::atomic<std::size_t> peak_{0};
  std::atomic<std::size_t> attempts_{0};
};

// --- Remote backend ---------------------------------------------------------

// Chat-completion style HTTP API: POST <base_url>/chat/completions with
// {"model", "messages": [{"role": "user", "content": prompt}],
//  "temperature", "top_p", "max_tokens"}; the reply carries
// choices[0].message.content and usage.{prompt,completion}_tokens.
struct RemoteConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-3.5-turbo";
  std::string api_key_env = "ATTRGEN_API_KEY";
  std::chrono::seconds timeout{60};
};

class RemoteProvider : public Provider {
 public:
  RemoteProvider(RemoteConfig config, Pricing pricing = {},
                 RetryPolicy retry = {});

  std::string model_id() const override { return config_.model; }

 protected:
  CompletionResult attempt(const std::string& prompt,
                           const GenerationParams& params) override;

 private:
  RemoteConfig config_;
};

}  // namespace attrgen
