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


#include <cstdlib>
#include <random>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "attrgen/error.h"
#include "attrgen/provider.h"
#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "support.h"

using namespace attrgen;

namespace {

const char* kEconomy = R"({
  "model": "m1",
  "rules": [
    {"contains": "economy prompt", "response": "scripted news text",
     "prompt_tokens": 12, "completion_tokens": 40},
    {"pattern": "^echo ", "response": "<{prompt}>"},
    {"contains": "flaky", "error": "transient", "fail_times": 2},
    {"contains": "flaky", "response": "recovered"},
    {"contains": "always-transient", "error": "transient"},
    {"contains": "broken", "error": "permanent"},
    {"contains": "denied", "error": "auth"}
  ],
  "default": {"response": "fallback answer here"}
})";

// Local stand-in for a chat-completion endpoint.
class FakeApi {
 public:
  FakeApi() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                httplib::Response& res) {
      ++hits_;
      last_auth_ = req.get_header_value("Authorization");
      last_body_ = req.body;
      if (hits_ <= fail_first_) {
        res.status = 503;
        return;
      }
      auto j = nlohmann::json::parse(req.body);
      std::string prompt = j["messages"][0]["content"];
      if (prompt == "reject me") {
        res.status = 400;
        res.set_content("bad request", "text/plain");
        return;
      }
      nlohmann::json out = {
          {"choices", {{{"message", {{"role", "assistant"},
                                     {"content", "reply to " + prompt}}}}}},
          {"usage", {{"prompt_tokens", 7}, {"completion_tokens", 3}}}};
      res.set_content(out.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeApi() {
    server_.stop();
    thread_.join();
  }
  std::string base() const {
    return "http://127.0.0.1:" + std::to_string(port_) + "/v1";
  }
  int fail_first_ = 0;
  int hits_ = 0;
  std::string last_auth_;
  std::string last_body_;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST_CASE("generation defaults") {
  GenerationParams p;
  CHECK(p.temperature == 1.0);
  CHECK(p.top_p == 1.0);
  CHECK(p.max_tokens > 0);
  GenerationParams bad;
  bad.top_p = 0.0;
  CHECK_THROWS_AS(bad.validate(), PreconditionError);
  bad = {};
  bad.temperature = -1;
  CHECK_THROWS_AS(bad.validate(), PreconditionError);
}

TEST_CASE("mock answers from its script") {
  auto p = test::mock(kEconomy);
  auto r = p->complete("the economy prompt", {});
  CHECK(r == CompletionResult{"scripted news text", 12, 40});
  CHECK(p->complete("echo hi there", {}).text == "<echo hi there>");
  // Default rule: whitespace token counts.
  auto d = p->complete("something else entirely", {});
  CHECK(d.text == "fallback answer here");
  CHECK(d.prompt_tokens == 3);
  CHECK(d.completion_tokens == 3);
  CHECK(p->model_id() == "m1");
}

TEST_CASE("empty prompt is a precondition error") {
  auto p = test::mock(kEconomy);
  CHECK_THROWS_AS(p->complete("", {}), PreconditionError);
  CHECK_THROWS_AS(p->complete("  \n", {}), PreconditionError);
}

TEST_CASE("unmatched prompt without default fails permanently") {
  auto p = test::mock(R"({"rules": [{"contains": "x", "response": "y"}]})");
  try {
    p->complete("nothing", {});
    FAIL("expected failure");
  } catch (const ProviderError& e) {
    CHECK(e.kind() == ProviderErrorKind::kPermanent);
  }
}

TEST_CASE("transient failures are retried with growing delays") {
  std::vector<long long> sleeps;
  RetryPolicy retry;
  retry.sleep = [&](std::chrono::milliseconds d) { sleeps.push_back(d.count()); };
  MockProvider p(MockScript::parse(kEconomy, "s"), {}, retry);
  CHECK(p.complete("flaky call", {}).text == "recovered");
  REQUIRE(sleeps.size() == 2);
  CHECK(sleeps[0] >= 800);
  CHECK(sleeps[0] <= 1200);
  CHECK(sleeps[1] >= 1600);
  CHECK(sleeps[1] <= 2400);
  CHECK(p.meter().snapshot().requests == 1);

  sleeps.clear();
  CHECK_THROWS_AS(p.complete("always-transient", {}), ProviderError);
  REQUIRE(sleeps.size() == 3);
  CHECK(sleeps[2] >= 3200);
  CHECK(sleeps[2] <= 4800);
  CHECK(p.attempts() == 3 + 4);
}

TEST_CASE("permanent and authentication errors are not retried") {
  auto p = test::mock(kEconomy);
  CHECK_THROWS_AS(p->complete("broken", {}), ProviderError);
  CHECK(p->attempts() == 1);
  try {
    p->complete("denied", {});
  } catch (const ProviderError& e) {
    CHECK(e.kind() == ProviderErrorKind::kAuthentication);
  }
  CHECK(p->attempts() == 2);
  CHECK(p->meter().snapshot().requests == 0);
}

TEST_CASE("cost arithmetic: five calls of (10, 20) tokens") {
  auto p = test::mock(R"({"default": {"response": "r", "prompt_tokens": 10,
                                      "completion_tokens": 20}})",
                      Pricing{0.001, 0.002});
  for (int i = 0; i < 5; ++i) p->complete("q", {});
  double hand = 0.0;
  for (int i = 0; i < 5; ++i) hand += 10 * 0.000001 + 20 * 0.000002;
  CHECK(p->meter().total_cost() == doctest::Approx(0.00025).epsilon(1e-12));
  CHECK(p->meter().total_cost() == doctest::Approx(hand).epsilon(1e-12));
  auto snap = p->meter().snapshot();
  CHECK(snap.prompt_tokens == 50);
  CHECK(snap.completion_tokens == 100);
  CHECK(snap.requests == 5);
}

TEST_CASE("cost per 1k examples") {
  CostSnapshot s;
  s.pricing = {1.0, 0.0};
  s.prompt_tokens = 100;  // 0.10
  s.examples_emitted = 200;
  CHECK(cost_per_1k_examples(s) == doctest::Approx(0.5).epsilon(1e-12));
  s.prompt_tokens = 0;
  CHECK(cost_per_1k_examples(s) == 0.0);
  s.examples_emitted = 0;
  CHECK_THROWS_AS(cost_per_1k_examples(s), PreconditionError);
}

TEST_CASE("randomized token logs: meter matches a recount and is additive") {
  std::mt19937_64 g(3);
  for (int trial = 0; trial < 50; ++trial) {
    Pricing pr{static_cast<double>(g() % 1000) / 1000.0,
               static_cast<double>(g() % 1000) / 1000.0};
    CostMeter a(pr), b(pr), ab(pr);
    std::uint64_t P = 0, C = 0;
    int n = static_cast<int>(g() % 30);
    for (int i = 0; i < n; ++i) {
      std::uint64_t p = g() % 500, c = g() % 500;
      P += p;
      C += c;
      (i % 2 ? a : b).record(p, c);
      ab.record(p, c);
    }
    double recount = static_cast<double>(P) * pr.prompt_per_1k / 1000.0 +
                     static_cast<double>(C) * pr.completion_per_1k / 1000.0;
    CHECK(ab.total_cost() == doctest::Approx(recount).epsilon(1e-12));
    CHECK(ab.total_cost() ==
          doctest::Approx(a.total_cost() + b.total_cost()).epsilon(1e-12));
  }
}

TEST_CASE("armed cap blocks requests whose worst case does not fit") {
  auto p = test::mock(R"({"default": {"response": "a b"}})", Pricing{1.0, 1.0});
  GenerationParams params;
  params.max_tokens = 10;
  p->meter().arm_cap(0.011);  // prompt 1 token + 10 completion = 0.011
  CHECK_NOTHROW(p->complete("x", params));  // spends 0.003
  CHECK_THROWS_AS(p->complete("x", params), BudgetExceeded);
  p->meter().disarm_cap();
  CHECK_NOTHROW(p->complete("x", params));
  CHECK_THROWS_AS(p->meter().arm_cap(-1.0), PreconditionError);
}

TEST_CASE("complete_many preserves order and bounds concurrency") {
  std::vector<std::string> prompts;
  for (int i = 0; i < 8; ++i) prompts.push_back("echo item " + std::to_string(i));
  auto seq = test::mock(kEconomy);
  std::vector<CompletionResult> sequential;
  for (const auto& q : prompts) sequential.push_back(seq->complete(q, {}));

  auto one = test::mock(kEconomy);
  auto r1 = one->complete_many(prompts, {}, 1);
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    REQUIRE(r1[i].ok());
    CHECK(*r1[i].result == sequential[i]);
  }
  CHECK(one->peak_in_flight() == 1);

  auto four = test::mock(kEconomy);
  four->set_latency(std::chrono::milliseconds(20));
  auto r4 = four->complete_many(prompts, {}, 4);
  std::multiset<std::string> a, b;
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    REQUIRE(r4[i].ok());
    CHECK(*r4[i].result == sequential[i]);  // index-aligned
    a.insert(r4[i].result->text);
    b.insert(sequential[i].text);
  }
  CHECK(a == b);
  CHECK(four->peak_in_flight() <= 4);
  CHECK(four->peak_in_flight() >= 2);
  CHECK(four->meter().snapshot().requests == 8);
  CHECK_THROWS_AS(four->complete_many(prompts, {}, 0), PreconditionError);
}

TEST_CASE("complete_many isolates failures") {
  std::vector<std::string> prompts;
  for (int i = 0; i < 8; ++i) prompts.push_back("echo " + std::to_string(i));
  prompts[5] = "broken one";
  auto p = test::mock(kEconomy);
  auto out = p->complete_many(prompts, {}, 3);
  int ok = 0;
  for (std::size_t i = 0; i < out.size(); ++i) ok += out[i].ok();
  CHECK(ok == 7);
  CHECK(!out[5].ok());
  CHECK(out[5].failure == FailureKind::kPermanent);
  CHECK(!out[5].error.empty());
}

TEST_CASE("mock determinism") {
  auto a = test::mock(kEconomy);
  auto b = test::mock(kEconomy);
  for (const char* q : {"echo a", "economy prompt", "zzz"}) {
    CHECK(a->complete(q, {}) == b->complete(q, {}));
  }
}

TEST_CASE("malformed scripts are parse errors") {
  CHECK_THROWS_AS(MockScript::parse("{", "s"), ParseError);
  CHECK_THROWS_AS(MockScript::parse(R"({"rules": [{"response": "x"}]})", "s"),
                  ParseError);
  CHECK_THROWS_AS(
      MockScript::parse(R"({"rules": [{"contains": "a", "error": "odd"}]})", "s"),
      ParseError);
}

TEST_CASE("remote provider talks to a chat-completion endpoint") {
  FakeApi api;
  ::setenv("ATTRGEN_TEST_KEY", "sk-test", 1);
  RemoteConfig cfg;
  cfg.base_url = api.base();
  cfg.model = "tiny-model";
  cfg.api_key_env = "ATTRGEN_TEST_KEY";
  cfg.timeout = std::chrono::seconds(5);
  RemoteProvider p(cfg, Pricing{1.0, 2.0}, test::no_sleep());
  GenerationParams params;
  params.max_tokens = 64;
  auto r = p.complete("hello", params);
  CHECK(r == CompletionResult{"reply to hello", 7, 3});
  CHECK(api.last_auth_ == "Bearer sk-test");
  auto body = nlohmann::json::parse(api.last_body_);
  CHECK(body["model"] == "tiny-model");
  CHECK(body["max_tokens"] == 64);
  CHECK(body["top_p"] == 1.0);
  CHECK(p.meter().total_cost() == doctest::Approx(0.013));

  // 5xx is transient and retried.
  api.fail_first_ = api.hits_ + 2;
  CHECK(p.complete("again", params).text == "reply to again");

  // 4xx is permanent.
  try {
    p.complete("reject me", params);
    FAIL("expected failure");
  } catch (const ProviderError& e) {
    CHECK(e.kind() == ProviderErrorKind::kPermanent);
  }
}

TEST_CASE("remote provider without a credential") {
  ::unsetenv("ATTRGEN_TEST_MISSING");
  RemoteConfig cfg;
  cfg.base_url = "http://127.0.0.1:9";
  cfg.api_key_env = "ATTRGEN_TEST_MISSING";
  RemoteProvider p(cfg, {}, test::no_sleep());
  try {
    p.complete("x", {});
    FAIL("expected failure");
  } catch (const ProviderError& e) {
    CHECK(e.kind() == ProviderErrorKind::kAuthentication);
  }
}

TEST_CASE("unreachable endpoint is transient") {
  ::setenv("ATTRGEN_TEST_KEY", "sk", 1);
  RemoteConfig cfg;
  cfg.base_url = "http://127.0.0.1:9";
  cfg.api_key_env = "ATTRGEN_TEST_KEY";
  cfg.timeout = std::chrono::seconds(2);
  RemoteProvider p(cfg, {}, test::no_sleep(0));
  try {
    p.complete("x", {});
    FAIL("expected failure");
  } catch (const ProviderError& e) {
    CHECK(e.transient());
  }
}
