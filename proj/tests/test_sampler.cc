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


#include <algorithm>
#include <random>
#include <set>

#include "attrgen/error.h"
#include "attrgen/sampler.h"
#include "attrgen/text.h"
#include "doctest.h"
#include "oracles.h"
#include "support.h"

using namespace attrgen;

namespace {

AttributeSchema two_value_schema() {
  return parse_schema(R"([task] name=t persona=p
[class] id=0 name=a
[dimension] name=coin kind=independent
value: heads
value: tails
)",
                      "t");
}

std::string random_word(std::mt19937_64& g, std::size_t max_len) {
  static const std::string alphabet = "abcde fgAB ";
  std::string s;
  std::size_t len = g() % (max_len + 1);
  for (std::size_t i = 0; i < len; ++i) s += alphabet[g() % alphabet.size()];
  return s;
}

}  // namespace

TEST_CASE("forced configuration") {
  auto s = parse_schema(R"([task] name=t persona=p
[class] id=0 name=a
[dimension] name=x kind=independent
value: only
[dimension] name=y kind=dependent
class: a
value: just this
)",
                        "t");
  Rng rng(1);
  auto c = sample_configuration(s, s.classes[0], rng);
  CHECK(c.labels == std::vector<int>{0});
  REQUIRE(c.assignments.size() == 2);
  CHECK(c.assignments[0].value.text == "only");
  CHECK(c.assignments[1].value.text == "just this");
  CHECK(c.find("y") == &c.assignments[1]);
  CHECK(c.find("z") == nullptr);
  CHECK_THROWS_AS(sample_configuration(s, {3, "ghost"}, rng), PreconditionError);
}

TEST_CASE("two-value dimension frequencies over 10000 draws") {
  auto s = two_value_schema();
  Rng rng(2024);
  int heads = 0;
  for (int i = 0; i < 10000; ++i) {
    heads += sample_configuration(s, s.classes[0], rng).assignments[0].value.text ==
             "heads";
  }
  CHECK(heads >= 4600);
  CHECK(heads <= 5400);
}

TEST_CASE("NYT configurations carry the four dimensions") {
  auto s = load_schema(test::data_dir() / "schemas" / "nyt.schema");
  Rng rng(9);
  auto c = sample_configuration(s, s.class_by_name("federal budget"), rng);
  std::vector<std::string> dims;
  for (const auto& a : c.assignments) dims.push_back(text::to_lower(a.dimension));
  CHECK(dims == std::vector<std::string>{"subtopic", "location", "writing style",
                                         "length"});
  // Each value comes from the list applicable to the class.
  for (std::size_t i = 0; i < c.assignments.size(); ++i) {
    const auto& list = s.dimensions[i].values_for("federal budget");
    CHECK(std::find(list.begin(), list.end(), c.assignments[i].value) !=
          list.end());
  }
}

TEST_CASE("sampling is reproducible from the seed") {
  auto s = load_schema(test::data_dir() / "schemas" / "amazon.schema");
  Rng a(77), b(77);
  for (int i = 0; i < 50; ++i) {
    const auto& cls = s.classes[static_cast<std::size_t>(i) % s.classes.size()];
    CHECK(sample_configuration(s, cls, a) == sample_configuration(s, cls, b));
  }
}

TEST_CASE("label count estimation") {
  std::vector<std::vector<int>> sets = {{0}, {0, 1}, {1, 0}};
  auto d = estimate_label_count_distribution(sets, "ref");
  CHECK(d.histogram.size() == 2);
  CHECK(d.histogram.at(1) == doctest::Approx(1.0 / 3));
  CHECK(d.histogram.at(2) == doctest::Approx(2.0 / 3));
  CHECK(d.source == "ref");
  std::vector<std::vector<int>> singles = {{3}, {1}, {2}};
  CHECK(estimate_label_count_distribution(singles).histogram ==
        std::map<int, double>{{1, 1.0}});
  CHECK_THROWS_AS(estimate_label_count_distribution({}), PreconditionError);
  std::vector<std::vector<int>> with_empty = {{1}, {}};
  CHECK_THROWS_AS(estimate_label_count_distribution(with_empty),
                  PreconditionError);
}

TEST_CASE("label count estimation matches a counting oracle") {
  std::mt19937_64 g(31);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::vector<int>> sets(1 + g() % 40);
    std::map<int, int> counts;
    for (auto& s : sets) {
      std::set<int> distinct;
      int n = 1 + static_cast<int>(g() % 5);
      for (int i = 0; i < n; ++i) {
        int l = static_cast<int>(g() % 6);
        s.push_back(l);
        distinct.insert(l);
      }
      ++counts[static_cast<int>(distinct.size())];
    }
    auto d = estimate_label_count_distribution(sets);
    REQUIRE(d.histogram.size() == counts.size());
    double sum = 0;
    for (const auto& [n, c] : counts) {
      CHECK(d.histogram.at(n) ==
            doctest::Approx(static_cast<double>(c) / sets.size()).epsilon(1e-12));
      sum += d.histogram.at(n);
    }
    CHECK(std::abs(sum - 1.0) < 1e-9);
    CHECK_NOTHROW(d.validate());
  }
}

TEST_CASE("label set sampling edge cases") {
  LabelCountDistribution one{{{1, 1.0}}, ""};
  std::vector<std::string> x = {"x"};
  Rng rng(5);
  CHECK(sample_label_set(one, x, rng) == x);
  std::vector<std::string> abc = {"a", "b", "c"};
  LabelCountDistribution three{{{3, 1.0}}, ""};
  CHECK(sample_label_set(three, abc, rng) == abc);
  LabelCountDistribution four{{{4, 1.0}}, ""};
  CHECK_THROWS_AS(sample_label_set(four, abc, rng), PreconditionError);
  LabelCountDistribution bad{{{1, 0.5}}, ""};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  LabelCountDistribution zero{{{0, 1.0}}, ""};
  CHECK_THROWS_AS(zero.validate(), ValidationError);
}

TEST_CASE("pairs of three classes are equally likely") {
  LabelCountDistribution two{{{2, 1.0}}, ""};
  std::vector<std::string> abc = {"a", "b", "c"};
  Rng rng(8);
  std::map<std::vector<std::string>, int> counts;
  for (int i = 0; i < 10000; ++i) ++counts[sample_label_set(two, abc, rng)];
  CHECK(counts.size() == 3);
  for (const auto& [pair, c] : counts) {
    CHECK(pair.size() == 2);
    CHECK(std::abs(c / 10000.0 - 1.0 / 3) <= 0.03);
  }
}

TEST_CASE("label counts follow the distribution") {
  LabelCountDistribution d{{{1, 0.5}, {2, 0.3}, {3, 0.2}}, ""};
  std::vector<std::string> classes = {"a", "b", "c", "d", "e"};
  Rng rng(12);
  std::map<int, int> counts;
  for (int i = 0; i < 4000; ++i) {
    ++counts[static_cast<int>(sample_label_set(d, classes, rng).size())];
  }
  for (const auto& [n, p] : d.histogram) {
    CHECK(std::abs(counts[n] / 4000.0 - p) <= 0.03);
  }
}

TEST_CASE("fuzzy score examples") {
  CHECK(fuzzy_score("Prime numbers", "prime numbers") == 100);
  CHECK(fuzzy_score("", "") == 100);
  CHECK(fuzzy_score("abc", "") == 0);
  CHECK(fuzzy_score("  a   b ", "A B") == 100);
  CHECK(fuzzy_score("abcdefghij", "abcdefghiX") == 90);
  CHECK(fuzzy_score("abcdefghi", "abcdefghX") == 89);
  CHECK(fuzzy_score("ab", "aX") == 50);  // half rounds up
  CHECK(fuzzy_score("caf\xC3\xA9", "cafe") == 75);  // code points, not bytes
}

TEST_CASE("fuzzy score matches the DP oracle and its laws") {
  std::mt19937_64 g(41);
  for (int n = 0; n < 3000; ++n) {
    std::string a = random_word(g, 14), b = random_word(g, 14);
    int s = fuzzy_score(a, b);
    CHECK(s == oracle::fuzzy(a, b));
    CHECK(s == fuzzy_score(b, a));
    CHECK(s >= 0);
    CHECK(s <= 100);
    CHECK(fuzzy_score(a, a) == 100);
  }
}

TEST_CASE("merge policy bounds") {
  CHECK_NOTHROW(MergePolicy{0}.validate());
  CHECK_NOTHROW(MergePolicy{100}.validate());
  CHECK_THROWS_AS(MergePolicy{101}.validate(), ValidationError);
  CHECK_THROWS_AS(MergePolicy{-1}.validate(), ValidationError);
  CHECK(MergePolicy{}.threshold == 90);
}

TEST_CASE("identical subtopics from two classes merge") {
  auto m = merge_subtopics({{"A", {"graph neural networks"}},
                            {"B", {"graph neural networks"}}},
                           MergePolicy{90});
  REQUIRE(m.size() == 1);
  const auto& g = m.at("graph neural networks");
  CHECK(g.classes == std::set<std::string>{"A", "B"});
  CHECK(g.members == std::vector<std::string>{"graph neural networks"});
}

TEST_CASE("a pair scoring 89 stays apart at 90 and merges at 89") {
  std::map<std::string, std::vector<std::string>> in = {
      {"A", {"abcdefghi"}}, {"B", {"abcdefghX"}}};
  CHECK(merge_subtopics(in, {90}).size() == 2);
  auto m = merge_subtopics(in, {89});
  REQUIRE(m.size() == 1);
  CHECK(m.begin()->first == "abcdefghX");  // smallest member
  CHECK(m.begin()->second.classes == std::set<std::string>{"A", "B"});
}

TEST_CASE("merging is transitive") {
  // a~b and b~c at 90 but a and c differ by two edits out of ten.
  auto m = merge_subtopics({{"A", {"abcdefghij"}},
                            {"B", {"abcdefghiX"}},
                            {"C", {"abcdefghYX"}}},
                           {90});
  REQUIRE(m.size() == 1);
  CHECK(m.begin()->second.classes == std::set<std::string>{"A", "B", "C"});
}

TEST_CASE("merge equals brute-force components on planted near-duplicates") {
  std::mt19937_64 g(53);
  const std::vector<std::string> words = {
      "network", "graph", "learning", "finance", "trading", "vision",
      "robust", "language", "retrieval", "security", "quantum", "markets"};
  for (int trial = 0; trial < 10; ++trial) {
    std::map<std::string, std::vector<std::string>> in;
    std::vector<std::string> all;
    for (int i = 0; i < 50; ++i) {
      std::string s;
      if (!all.empty() && g() % 3 == 0) {
        // near-duplicate: one character edit of an earlier subtopic
        s = all[g() % all.size()];
        std::size_t pos = g() % s.size();
        s[pos] = static_cast<char>('a' + g() % 26);
      } else {
        int n = 2 + static_cast<int>(g() % 3);
        for (int k = 0; k < n; ++k) s += (k ? " " : "") + words[g() % words.size()];
      }
      all.push_back(s);
      in["class" + std::to_string(g() % 7)].push_back(s);
    }
    auto merged = merge_subtopics(in, {90});
    std::set<std::vector<std::string>> got;
    std::size_t covered = 0;
    for (const auto& [rep, grp] : merged) {
      CHECK(rep == grp.members.front());
      CHECK(std::is_sorted(grp.members.begin(), grp.members.end()));
      got.insert(grp.members);
      covered += grp.members.size();
      std::set<std::string> cls;
      for (const auto& [c, list] : in)
        for (const auto& s : list)
          if (std::binary_search(grp.members.begin(), grp.members.end(), s))
            cls.insert(c);
      CHECK(grp.classes == cls);
    }
    CHECK(got == oracle::components(all, 90));
    std::set<std::string> distinct(all.begin(), all.end());
    CHECK(covered == distinct.size());  // partition
  }
}
