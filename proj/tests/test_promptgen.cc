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


#include <random>

#include "attrgen/error.h"
#include "attrgen/log.h"
#include "attrgen/promptgen.h"
#include "attrgen/schema.h"
#include "doctest.h"
#include "support.h"

using namespace attrgen;

namespace {

PromptTemplate shipped(const std::string& task, PromptMode mode) {
  return PromptTemplate::load(
      template_path(test::data_dir() / "templates", task, mode), mode);
}

AttributeConfiguration defense_config() {
  AttributeConfiguration c;
  c.labels = {9};
  c.assignments = {
      {"subtopic", "subtopic", {"defense spending", {}}},
      {"length", "length",
       {"short (30-80 words)", {{"min-words", "30"}, {"max-words", "80"}}}},
      {"writing style", "style", {"investigative journalism", {}}},
      {"location", "location", {"North America", {}}}};
  return c;
}

const char* kNytMeta =
    "The task of generating an example of a NYT news asks for one article "
    "written in that newspaper's house style.";

}  // namespace

TEST_CASE("mode names") {
  for (auto m : {PromptMode::kSim, PromptMode::kAttr, PromptMode::kMeta}) {
    CHECK(parse_mode(mode_name(m)) == m);
  }
  CHECK_THROWS_AS(parse_mode("fancy"), PreconditionError);
}

TEST_CASE("NYT sim prompt") {
  auto s = load_schema(test::data_dir() / "schemas" / "nyt.schema");
  auto t = shipped("nyt", PromptMode::kSim);
  CHECK(render_sim(t, "federal budget", s.persona) ==
        "Suppose you are a news writer. Please generate a federal budget news "
        "in NYT.");
}

TEST_CASE("NYT attr prompt with the defense spending configuration") {
  auto s = load_schema(test::data_dir() / "schemas" / "nyt.schema");
  auto t = shipped("nyt", PromptMode::kAttr);
  std::string p = render_attr(t, "federal budget", defense_config(), nullptr,
                              s.persona);
  CHECK(p ==
        "Suppose you are a news writer. Please generate a federal budget news "
        "in NYT following the requirements below:\n"
        "1. Should focus on defense spending;\n"
        "2. Should be in length between 30 and 80 words;\n"
        "3. The writing style of the news should be investigative journalism;\n"
        "4. The location of the news should be in North America.");
  CHECK(p.find("between 30 and 80 words") != std::string::npos);
}

TEST_CASE("missing dimension is named") {
  auto t = shipped("nyt", PromptMode::kAttr);
  auto c = defense_config();
  c.assignments.erase(c.assignments.begin() + 2);
  try {
    render_attr(t, "federal budget", c, nullptr, "P.");
    FAIL("expected RenderError");
  } catch (const RenderError& e) {
    CHECK(e.placeholder() == "style");
  }
}

TEST_CASE("missing field and missing similar list") {
  auto t = PromptTemplate::parse("## mode: attr\n{length:words} {x}", "t");
  auto c = defense_config();
  try {
    render_attr(t, "c", c);
    FAIL("expected RenderError");
  } catch (const RenderError& e) {
    CHECK(e.placeholder() == "length:words");
  }
  auto amazon = shipped("amazon", PromptMode::kAttr);
  CHECK(amazon.uses("similar-class"));
  try {
    auto cfg = AttributeConfiguration{};
    render_attr(PromptTemplate(PromptMode::kAttr, "avoid {similar-class}"), "c",
                cfg);
    FAIL("expected RenderError");
  } catch (const RenderError& e) {
    CHECK(e.placeholder() == "similar-class");
  }
  std::vector<std::string> sim = {"a b", "c"};
  AttributeConfiguration empty;
  CHECK(render_attr(PromptTemplate(PromptMode::kAttr, "avoid {similar-classes}."),
                    "c", empty, &sim) == "avoid a b, c.");
}

TEST_CASE("unknown placeholder is named") {
  PromptTemplate t(PromptMode::kSim, "Write about {unknown} now");
  try {
    render_sim(t, "x");
    FAIL("expected RenderError");
  } catch (const RenderError& e) {
    CHECK(e.placeholder() == "unknown");
    CHECK(std::string(e.what()).find("unknown") != std::string::npos);
  }
}

TEST_CASE("templates without placeholders render verbatim") {
  std::mt19937_64 g(3);
  const std::string alphabet = "ab c.\n\t{}";
  for (int i = 0; i < 300; ++i) {
    std::string body;
    std::size_t n = g() % 40;
    for (std::size_t k = 0; k < n; ++k) {
      char c = alphabet[g() % alphabet.size()];
      if (c == '{' || c == '}') {
        body += std::string(2, c);
      } else {
        body += c;
      }
    }
    PromptTemplate t(PromptMode::kSim, body);
    std::string expect;
    for (std::size_t k = 0; k < body.size(); ++k) {
      expect += body[k];
      if (body[k] == '{' || body[k] == '}') ++k;
    }
    CHECK(t.placeholders().empty());
    CHECK(render_sim(t, "cls") == expect);
  }
}

TEST_CASE("template parsing") {
  auto t = PromptTemplate::parse(
      "## mode: attr\n## comment\n{persona} {{ok}} {class}, {length : min-words}\n",
      "x.tmpl");
  CHECK(t.mode() == PromptMode::kAttr);
  CHECK(t.body() == "{persona} {{ok}} {class}, {length : min-words}");
  auto ps = t.placeholders();
  REQUIRE(ps.size() == 3);
  CHECK(ps[2] == Placeholder{"length", "min-words"});
  CHECK(ps[2].spelled() == "length:min-words");
  CHECK(t.uses("class"));
  CHECK_FALSE(t.uses("style"));

  CHECK_THROWS_AS(PromptTemplate::parse("a { b", "x"), ParseError);
  CHECK_THROWS_AS(PromptTemplate::parse("a } b", "x"), ParseError);
  CHECK_THROWS_AS(PromptTemplate::parse("{}", "x"), ParseError);
  CHECK_THROWS_AS(PromptTemplate::parse("{a:}", "x"), ParseError);
  try {
    PromptTemplate::parse("## mode: sim\nline\n{oops\n", "y.tmpl");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(
      PromptTemplate::parse("## mode: sim\nx", "x", PromptMode::kAttr),
      ParseError);
  CHECK_THROWS_AS(render_sim(shipped("nyt", PromptMode::kAttr), "c"),
                  PreconditionError);
  CHECK_THROWS_AS(render_attr(shipped("nyt", PromptMode::kSim), "c", {}),
                  PreconditionError);
}

TEST_CASE("every sampled value appears in the rendered prompt") {
  for (const char* task : {"nyt", "amazon", "reddit", "stackexchange"}) {
    auto s = load_schema(test::data_dir() / "schemas" / (std::string(task) + ".schema"));
    auto t = shipped(task, PromptMode::kAttr);
    Rng rng(100);
    for (int i = 0; i < 200; ++i) {
      const auto& cls = s.classes[rng.uniform(s.classes.size())];
      auto c = sample_configuration(s, cls, rng);
      auto it = s.similar.find(cls.name);
      const std::vector<std::string>* sim =
          it == s.similar.end() ? nullptr : &it->second;
      std::string p = render_attr(t, cls.name, c, sim, s.persona);
      CHECK(p.find(cls.name) != std::string::npos);
      CHECK(p.find('{') == std::string::npos);
      for (const auto& ph : t.placeholders()) {
        const Assignment* a = c.find(ph.name);
        if (a == nullptr) continue;
        const std::string& v =
            ph.field.empty() ? a->value.text : a->value.fields.at(ph.field);
        CHECK_MESSAGE(p.find(v) != std::string::npos, task, ": ", v);
      }
    }
  }
}

TEST_CASE("shipped sim templates render for every class") {
  for (const char* task : {"nyt", "amazon", "reddit", "stackexchange"}) {
    auto s = load_schema(test::data_dir() / "schemas" / (std::string(task) + ".schema"));
    auto t = shipped(task, PromptMode::kSim);
    for (const auto& c : s.classes) {
      std::string p = render_sim(t, c.name, s.persona);
      CHECK(p.rfind(s.persona, 0) == 0);
      CHECK(p.find(c.name) != std::string::npos);
    }
  }
}

TEST_CASE("meta query") {
  CHECK(meta_query("Write a news.") ==
        "Write a news. What does this task ask us to do?");
  CHECK(meta_query("  Write a news  ") ==
        "Write a news. What does this task ask us to do?");
  CHECK(meta_query("Ends twice..") ==
        "Ends twice.. What does this task ask us to do?");
}

TEST_CASE("meta prompt with the NYT description") {
  auto base = std::string(
      "Suppose you are a news writer. Please generate a federal budget news in "
      "NYT.");
  std::string script = std::string(R"({"rules": [{"pattern": "What does this task ask us to do\\?$", "response": ")") +
                       kNytMeta + R"("}]})";
  auto p1 = test::mock(script);
  std::string out = render_meta(base, *p1);
  CHECK(out.rfind("The task of generating an example of a NYT news", 0) == 0);
  CHECK(out == std::string(kNytMeta) + "\n\n" + base);
  auto p2 = test::mock(script);
  CHECK(render_meta(base, *p2) == out);
  CHECK(p1->meter().snapshot().requests == 1);
}

TEST_CASE("empty meta answer falls back to the base prompt") {
  auto p = test::mock(R"({"default": {"response": "   "}})");
  log::Capture cap;
  CHECK(render_meta("Base.", *p) == "Base.");
  CHECK(cap.messages().size() == 1);
  CHECK_THROWS_AS(render_meta("  ", *p), PreconditionError);
}

TEST_CASE("meta prompt surfaces provider failure") {
  auto p = test::mock(R"({"rules": [{"contains": "x", "response": "y"}]})");
  CHECK_THROWS_AS(render_meta("Base.", *p), ProviderError);
}
