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

#include "attrgen/provider.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "attrgen/io.h"
#include "attrgen/rng.h"
#include "attrgen/text.h"
#include "http_client.h"
#include "json.hpp"

namespace attrgen {

using nlohmann::json;

void GenerationParams::validate() const {
  if (!(temperature >= 0.0)) {
    throw PreconditionError("temperature must be non-negative");
  }
  if (!(top_p > 0.0 && top_p <= 1.0)) {
    throw PreconditionError("top_p must be in (0, 1]");
  }
  if (max_tokens <= 0) throw PreconditionError("max_tokens must be positive");
}

double token_cost(const Pricing& pricing, std::uint64_t prompt_tokens,
                  std::uint64_t completion_tokens) {
  return static_cast<double>(prompt_tokens) * pricing.prompt_per_1k / 1000.0 +
         static_cast<double>(completion_tokens) * pricing.completion_per_1k /
             1000.0;
}

double cost_per_1k_examples(const CostSnapshot& snapshot) {
  if (snapshot.examples_emitted == 0) {
    throw PreconditionError("cost per 1k examples: no examples emitted");
  }
  return snapshot.total_cost() * 1000.0 /
         static_cast<double>(snapshot.examples_emitted);
}

// --- CostMeter --------------------------------------------------------------

void CostMeter::record(std::uint64_t prompt_tokens,
                       std::uint64_t completion_tokens) {
  std::lock_guard<std::mutex> lock(mu_);
  prompt_tokens_ += prompt_tokens;
  completion_tokens_ += completion_tokens;
  ++requests_;
}

void CostMeter::add_examples(std::uint64_t n) {
  std::lock_guard<std::mutex> lock(mu_);
  examples_ += n;
}

CostSnapshot CostMeter::snapshot() const {
  std::lock_guard<std::mutex> lock(mu_);
  return {pricing_, prompt_tokens_, completion_tokens_, requests_, examples_};
}

double CostMeter::projected_cost(std::uint64_t prompt_tokens,
                                 std::uint64_t max_completion_tokens) const {
  return token_cost(pricing_, prompt_tokens, max_completion_tokens);
}

void CostMeter::arm_cap(double cap) {
  if (!(cap >= 0.0)) throw PreconditionError("budget cap must be >= 0");
  std::lock_guard<std::mutex> lock(mu_);
  cap_ = cap;
}

void CostMeter::disarm_cap() {
  std::lock_guard<std::mutex> lock(mu_);
  cap_.reset();
}

std::optional<double> CostMeter::cap() const {
  std::lock_guard<std::mutex> lock(mu_);
  return cap_;
}

// --- Provider ---------------------------------------------------------------

Provider::Provider(Pricing pricing, RetryPolicy retry)
    : meter_(pricing), retry_(std::move(retry)) {
  if (!retry_.sleep) {
    retry_.sleep = [](std::chrono::milliseconds d) {
      std::this_thread::sleep_for(d);
    };
  }
}

std::chrono::milliseconds Provider::backoff(int retry) {
  double factor = 1.0;
  if (retry_.jitter > 0.0) {
    std::lock_guard<std::mutex> lock(jitter_mu_);
    Rng rng(jitter_state_++);
    factor = 1.0 - retry_.jitter + 2.0 * retry_.jitter * rng.uniform_real();
  }
  double ms = static_cast<double>(retry_.base_delay.count()) *
              std::ldexp(1.0, retry) * factor;
  return std::chrono::milliseconds(static_cast<long long>(std::llround(ms)));
}

CompletionResult Provider::complete(const std::string& prompt,
                                    const GenerationParams& params) {
  if (text::trim(prompt).empty()) {
    throw PreconditionError("prompt must be non-empty");
  }
  params.validate();
  if (auto cap = meter_.cap()) {
    double projected =
        meter_.total_cost() +
        meter_.projected_cost(text::whitespace_token_count(prompt),
                              static_cast<std::uint64_t>(params.max_tokens));
    if (projected > *cap) {
      throw BudgetExceeded("request would exceed the budget cap");
    }
  }
  for (int retry = 0;; ++retry) {
    try {
      CompletionResult result = attempt(prompt, params);
      meter_.record(result.prompt_tokens, result.completion_tokens);
      return result;
    } catch (const ProviderError& e) {
      if (!e.transient() || retry >= retry_.max_retries) throw;
      retry_.sleep(backoff(retry));
    }
  }
}

std::vector<CompletionOutcome> Provider::complete_many(
    const std::vector<std::string>& prompts, const GenerationParams& params,
    std::size_t max_in_flight) {
  if (max_in_flight < 1) throw PreconditionError("max_in_flight must be >= 1");
  std::vector<CompletionOutcome> outcomes(prompts.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= prompts.size()) return;
      CompletionOutcome& out = outcomes[i];
      try {
        out.result = complete(prompts[i], params);
      } catch (const ProviderError& e) {
        out.error = e.what();
        switch (e.kind()) {
          case ProviderErrorKind::kTransient:
            out.failure = FailureKind::kTransient;
            break;
          case ProviderErrorKind::kPermanent:
            out.failure = FailureKind::kPermanent;
            break;
          case ProviderErrorKind::kAuthentication:
            out.failure = FailureKind::kAuthentication;
            break;
        }
      } catch (const BudgetExceeded& e) {
        out.error = e.what();
        out.failure = FailureKind::kBudget;
      } catch (const std::exception& e) {
        out.error = e.what();
        out.failure = FailureKind::kPermanent;
      }
    }
  };
  std::size_t workers = std::min(max_in_flight, prompts.size());
  if (workers <= 1) {
    worker();
    return outcomes;
  }
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  return outcomes;
}

// --- MockProvider -----------------------------------------------------------

namespace {

ProviderErrorKind parse_error_kind(const std::string& s,
                                   const std::string& source) {
  if (s == "transient") return ProviderErrorKind::kTransient;
  if (s == "permanent") return ProviderErrorKind::kPermanent;
  if (s == "auth" || s == "authentication") {
    return ProviderErrorKind::kAuthentication;
  }
  throw ParseError(source, 0, "unknown mock error kind '" + s + "'");
}

MockRule parse_rule(const json& j, const std::string& source,
                    bool is_default) {
  if (!j.is_object()) throw ParseError(source, 0, "mock rule must be object");
  MockRule rule;
  bool has_contains = j.contains("contains");
  bool has_pattern = j.contains("pattern");
  if (!is_default && has_contains == has_pattern) {
    throw ParseError(source, 0,
                     "mock rule needs exactly one of contains/pattern");
  }
  if (has_contains) {
    rule.match = MockRule::Match::kSubstring;
    rule.pattern = j.at("contains").get<std::string>();
  } else if (has_pattern) {
    rule.match = MockRule::Match::kPattern;
    rule.pattern = j.at("pattern").get<std::string>();
  }
  rule.response = j.value("response", std::string());
  if (j.contains("prompt_tokens")) {
    rule.prompt_tokens = j.at("prompt_tokens").get<std::uint64_t>();
  }
  if (j.contains("completion_tokens")) {
    rule.completion_tokens = j.at("completion_tokens").get<std::uint64_t>();
  }
  if (j.contains("error")) {
    rule.error = parse_error_kind(j.at("error").get<std::string>(), source);
  }
  rule.fail_times = j.value("fail_times", -1);
  return rule;
}

std::string expand_response(const std::string& response,
                            const std::string& prompt) {
  static const std::string kToken = "{prompt}";
  std::string out;
  std::size_t pos = 0;
  while (true) {
    std::size_t hit = response.find(kToken, pos);
    if (hit == std::string::npos) {
      out.append(response, pos);
      return out;
    }
    out.append(response, pos, hit - pos);
    out += prompt;
    pos = hit + kToken.size();
  }
}

}  // namespace

MockScript MockScript::parse(const std::string& content,
                             const std::string& source) {
  json j;
  try {
    j = json::parse(content);
  } catch (const json::parse_error& e) {
    throw ParseError(source, 0, e.what());
  }
  MockScript script;
  try {
    script.model = j.value("model", std::string("mock"));
    if (j.contains("rules")) {
      for (const auto& r : j.at("rules")) {
        script.rules.push_back(parse_rule(r, source, false));
      }
    }
    if (j.contains("default") && !j.at("default").is_null()) {
      script.fallback = parse_rule(j.at("default"), source, true);
    }
  } catch (const json::exception& e) {
    throw ParseError(source, 0, e.what());
  }
  return script;
}

MockScript MockScript::load(const std::filesystem::path& path) {
  return parse(io::read_file(path), path.string());
}

MockProvider::MockProvider(MockScript script, Pricing pricing,
                           RetryPolicy retry)
    : Provider(pricing, std::move(retry)), script_(std::move(script)) {
  auto compile = [](const MockRule& rule) {
    auto c = std::make_unique<CompiledRule>();
    c->rule = rule;
    if (rule.match == MockRule::Match::kPattern) {
      c->regex.emplace(rule.pattern, std::regex::ECMAScript);
    }
    return c;
  };
  for (const auto& r : script_.rules) compiled_.push_back(compile(r));
  if (script_.fallback) {
    auto c = compile(*script_.fallback);
    c->rule.match = MockRule::Match::kSubstring;
    c->rule.pattern.clear();  // empty substring matches everything
    compiled_.push_back(std::move(c));
  }
}

CompletionResult MockProvider::respond(const MockRule& rule,
                                       const std::string& prompt) {
  CompletionResult r;
  r.text = expand_response(rule.response, prompt);
  r.prompt_tokens =
      rule.prompt_tokens.value_or(text::whitespace_token_count(prompt));
  r.completion_tokens =
      rule.completion_tokens.value_or(text::whitespace_token_count(r.text));
  return r;
}

CompletionResult MockProvider::attempt(const std::string& prompt,
                                       const GenerationParams&) {
  ++attempts_;
  std::size_t now = ++in_flight_;
  std::size_t peak = peak_.load();
  while (now > peak && !peak_.compare_exchange_weak(peak, now)) {
  }
  struct Leave {
    std::atomic<std::size_t>& n;
    ~Leave() { --n; }
  } leave{in_flight_};
  if (latency_.count() > 0) std::this_thread::sleep_for(latency_);

  for (auto& c : compiled_) {
    const MockRule& rule = c->rule;
    bool matches = rule.match == MockRule::Match::kSubstring
                       ? prompt.find(rule.pattern) != std::string::npos
                       : std::regex_search(prompt, *c->regex);
    if (!matches) continue;
    if (rule.error) {
      if (rule.fail_times < 0 || c->failures.fetch_add(1) < rule.fail_times) {
        throw ProviderError(*rule.error, "scripted mock failure");
      }
      continue;
    }
    return respond(rule, prompt);
  }
  throw ProviderError(ProviderErrorKind::kPermanent,
                      "no mock rule matches prompt: " + prompt.substr(0, 80));
}

// --- RemoteProvider ---------------------------------------------------------

RemoteProvider::RemoteProvider(RemoteConfig config, Pricing pricing,
                               RetryPolicy retry)
    : Provider(pricing, std::move(retry)), config_(std::move(config)) {}

CompletionResult RemoteProvider::attempt(const std::string& prompt,
                                         const GenerationParams& params) {
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw ProviderError(ProviderErrorKind::kAuthentication,
                        "missing credential: set " + config_.api_key_env);
  }
  json body = {
      {"model", config_.model},
      {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
      {"temperature", params.temperature},
      {"top_p", params.top_p},
      {"max_tokens", params.max_tokens},
  };
  std::string url = config_.base_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  url += "/chat/completions";

  http::Response res = http::post_json(url, key, body.dump(), config_.timeout);
  if (res.status == 0) {
    throw ProviderError(ProviderErrorKind::kTransient,
                        "transport error: " + res.transport_error);
  }
  if (res.status == 401 || res.status == 403) {
    throw ProviderError(ProviderErrorKind::kAuthentication,
                        "credential rejected (HTTP " +
                            std::to_string(res.status) + ")");
  }
  if (res.status == 408 || res.status == 429 || res.status >= 500) {
    throw ProviderError(ProviderErrorKind::kTransient,
                        "HTTP " + std::to_string(res.status));
  }
  if (res.status != 200) {
    throw ProviderError(ProviderErrorKind::kPermanent,
                        "HTTP " + std::to_string(res.status) + ": " +
                            res.body.substr(0, 200));
  }
  try {
    json j = json::parse(res.body);
    CompletionResult r;
    r.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
    if (j.contains("usage")) {
      r.prompt_tokens = j["usage"].value("prompt_tokens", std::uint64_t{0});
      r.completion_tokens =
          j["usage"].value("completion_tokens", std::uint64_t{0});
    }
    return r;
  } catch (const json::exception& e) {
    throw ProviderError(ProviderErrorKind::kPermanent,
                        std::string("malformed completion response: ") +
                            e.what());
  }
}

}  // namespace attrgen
