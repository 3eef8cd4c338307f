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


#include <filesystem>
#include <random>

#include "attrgen/error.h"
#include "attrgen/io.h"
#include "attrgen/log.h"
#include "attrgen/rng.h"
#include "attrgen/text.h"
#include "doctest.h"
#include "oracles.h"
#include "support.h"

using namespace attrgen;

TEST_CASE("splitmix64 reference outputs") {
  Rng r(0);
  CHECK(r.next() == 0xE220A8397B1DCDAFULL);
  CHECK(r.next() == 0x6E789E6AA1B965F4ULL);
  CHECK(r.draws() == 2);
  CHECK(Rng::kAlgorithm == "splitmix64");
}

TEST_CASE("split streams depend only on seed and key") {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 17; ++i) b.next();
  Rng ca = a.split(3), cb = b.split(3);
  for (int i = 0; i < 10; ++i) CHECK(ca.next() == cb.next());
  CHECK(a.split(3).seed() != a.split(4).seed());
  CHECK(a.split(0).seed() != Rng(43).split(0).seed());
}

TEST_CASE("uniform stays in range and is roughly flat") {
  Rng r(7);
  std::vector<int> counts(6, 0);
  for (int i = 0; i < 60000; ++i) {
    auto v = r.uniform(6);
    REQUIRE(v < 6);
    ++counts[v];
  }
  for (int c : counts) {
    CHECK(c > 9500);
    CHECK(c < 10500);
  }
  CHECK(r.uniform(1) == 0);
  for (int i = 0; i < 1000; ++i) {
    double u = r.uniform_real();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("tokenize matches the character-walk oracle") {
  CHECK(text::tokenize("Hello, World! 42x") ==
        std::vector<std::string>{"hello", "world", "42x"});
  CHECK(text::tokenize("").empty());
  CHECK(text::tokenize("caf\xC3\xA9 au-lait") ==
        std::vector<std::string>{"caf\xC3\xA9", "au", "lait"});
  std::mt19937_64 g(5);
  const std::string alphabet = "aB3 ,.-_\t\nxyzQ\xC3\xA9!";
  for (int n = 0; n < 300; ++n) {
    std::string s;
    std::size_t len = g() % 40;
    for (std::size_t i = 0; i < len; ++i) s += alphabet[g() % alphabet.size()];
    CHECK(text::tokenize(s) == oracle::tokens(s));
  }
}

TEST_CASE("string helpers") {
  CHECK(text::trim("  a b \n") == "a b");
  CHECK(text::normalize_space("  A \t B\n\nc ") == "a b c");
  CHECK(text::whitespace_token_count(" one  two\tthree\n") == 3);
  CHECK(text::whitespace_token_count("") == 0);
  CHECK(text::split_lines("a\r\nb\n") == std::vector<std::string>{"a", "b", ""});
  CHECK(text::split("a;b;;c", ';') ==
        std::vector<std::string>{"a", "b", "", "c"});
  CHECK(text::equals_ci("NYT", "nyt"));
  CHECK(text::starts_with_ci("Mode: attr", "mode:"));
  CHECK(text::utf8_decode("a\xC3\xA9") == std::u32string{U'a', U'é'});
  // Invalid and truncated sequences never throw.
  CHECK(text::utf8_decode("\xFF").size() == 1);
  CHECK(text::utf8_decode("\xE2\x80").size() == 2);
}

TEST_CASE("log capture and scoped sinks") {
  log::Capture cap;
  log::warn("first");
  {
    std::vector<std::string> inner;
    log::ScopedSink s([&](std::string_view m) { inner.emplace_back(m); });
    log::warn("second");
    CHECK(inner == std::vector<std::string>{"second"});
  }
  log::warn("third");
  CHECK(cap.messages() == std::vector<std::string>{"first", "third"});
}

TEST_CASE("file helpers") {
  test::TempDir dir;
  auto p = dir.path() / "f.txt";
  io::write_file(p, "abc");
  io::append_file(p, "def");
  CHECK(io::read_file(p) == "abcdef");
  CHECK_THROWS_AS(io::read_file(dir.path() / "missing"), Error);
}
