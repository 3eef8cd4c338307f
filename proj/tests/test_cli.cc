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
#include <sstream>

#include "attrgen/cli.h"
#include "attrgen/engine.h"
#include "attrgen/io.h"
#include "attrgen/metrics.h"
#include "attrgen/schema.h"
#include "doctest.h"
#include "json.hpp"
#include "support.h"

using namespace attrgen;

namespace {

struct Run {
  int code = -1;
  std::string out, err;
};

Run run(std::vector<std::string> args, const std::string& input = "") {
  std::istringstream in(input);
  std::ostringstream out, err;
  Run r;
  r.code = cli::dispatch(args, in, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string data(const std::string& rel) {
  return (test::data_dir() / rel).string();
}

}  // namespace

TEST_CASE("generate writes 4 x C records and reruns identically") {
  test::TempDir dir;
  auto a = (dir.path() / "a.jsonl").string();
  auto b = (dir.path() / "b.jsonl").string();
  std::vector<std::string> base = {"generate", "--schema", data("schemas/nyt.schema"),
                                   "--mode", "attr", "--per-class", "4",
                                   "--seed", "11", "--script",
                                   data("scripts/generate.mock.json")};
  auto args = base;
  args.insert(args.end(), {"--out", a});
  auto r = run(args);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  auto recs = load_dataset(a);
  CHECK(recs.size() == 4 * 26);
  std::map<int, int> per;
  for (const auto& rec : recs) ++per[rec.labels[0]];
  CHECK(per.size() == 26);
  for (const auto& [l, n] : per) CHECK(n == 4);
  CHECK(r.err.find("104 examples") != std::string::npos);
  CHECK(std::filesystem::exists(provenance_path(a)));

  args = base;
  args.insert(args.end(), {"--out", b});
  REQUIRE(run(args).code == 0);
  CHECK(io::read_file(a) == io::read_file(b));
  CHECK(io::read_file(provenance_path(a)) == io::read_file(provenance_path(b)));
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run({}).code == cli::kExitUsage);
  CHECK(run({"frobnicate"}).code == cli::kExitUsage);
  auto r = run({"generate", "--schema", data("schemas/nyt.schema")});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("per-class") != std::string::npos);
  CHECK(run({"generate", "--per-class", "0"}).code == cli::kExitUsage);
  CHECK(run({"generate", "--per-class", "1", "--mode", "fancy"}).code ==
        cli::kExitUsage);
  CHECK(run({"--help"}).code == cli::kExitOk);
}

TEST_CASE("domain errors exit with 1") {
  test::TempDir dir;
  io::write_file(dir.path() / "bad.schema", "[task] name=x\n[class] id=zero name=a\n");
  auto r = run({"generate", "--schema", (dir.path() / "bad.schema").string(),
                "--per-class", "1", "--out", (dir.path() / "o.jsonl").string(),
                "--script", data("scripts/generate.mock.json")});
  CHECK(r.code == cli::kExitDomain);
  CHECK(r.err.find("bad.schema:2") != std::string::npos);
  // Missing output path.
  CHECK(run({"generate", "--schema", data("schemas/nyt.schema"), "--per-class", "1",
             "--script", data("scripts/generate.mock.json")})
            .code == cli::kExitDomain);
}

TEST_CASE("dry run prints prompts without any provider") {
  ::unsetenv("ATTRGEN_API_KEY");
  auto r = run({"generate", "--schema", data("schemas/nyt.schema"), "--mode", "sim",
                "--per-class", "1", "--dry-run", "--price-prompt", "1",
                "--max-tokens", "10"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out.find("Suppose you are a news writer. Please generate a federal budget "
                   "news in NYT.") != std::string::npos);
  CHECK(r.out.find("requests 26\n") != std::string::npos);
  // 26 prompts of 12 words at 1 per 1k prompt tokens; completions are free.
  CHECK(r.out.find("projected_cost ") != std::string::npos);
}

TEST_CASE("meta mode and budget fractions") {
  test::TempDir dir;
  auto out = (dir.path() / "m.jsonl").string();
  auto r = run({"generate", "--schema", data("schemas/amazon.schema"), "--mode", "meta",
                "--per-class", "10", "--budget-fraction", "0.1,0.5", "--out", out,
                "--script", data("scripts/generate.mock.json")});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  auto small = load_dataset(dir.path() / "m.frac-0.1.jsonl");
  auto half = load_dataset(dir.path() / "m.frac-0.5.jsonl");
  CHECK(small.size() == 23);
  CHECK(half.size() == 5 * 23);
  auto prov = load_provenance(provenance_path(dir.path() / "m.frac-0.1.jsonl"));
  CHECK(prov[0].meta_description ==
        "The task asks for one realistic example that matches the request.");
}

TEST_CASE("budget cap stops the run") {
  test::TempDir dir;
  auto out = (dir.path() / "c.jsonl").string();
  auto r = run({"generate", "--schema", data("schemas/nyt.schema"), "--mode", "sim",
                "--per-class", "2", "--out", out, "--script",
                data("scripts/generate.mock.json"), "--price-prompt", "1",
                "--price-completion", "1", "--max-tokens", "10",
                "--budget-cap", "0.00001"});
  REQUIRE(r.code == 0);
  CHECK(r.err.find("partial") != std::string::npos);
  CHECK(load_dataset(out).empty());
}

TEST_CASE("multi-label sim generation from a reference") {
  test::TempDir dir;
  auto ref = dir.path() / "ref.jsonl";
  write_records({{{0, 1}, true, "x"}, {{2}, true, "y"}}, ref);
  auto out = (dir.path() / "ml.jsonl").string();
  auto r = run({"generate", "--schema", data("schemas/nyt.schema"), "--mode", "sim",
                "--per-class", "2", "--multilabel", "--reference", ref.string(),
                "--out", out, "--script", data("scripts/generate.mock.json")});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  auto recs = load_dataset(out);
  CHECK(recs.size() == 52);
  for (const auto& rec : recs) {
    CHECK(rec.multi_label);
    CHECK((rec.labels.size() == 1 || rec.labels.size() == 2));
  }
}

TEST_CASE("metrics, bias and eval-metrics") {
  test::TempDir dir;
  auto ds = (dir.path() / "d.jsonl").string();
  REQUIRE(run({"generate", "--schema", data("schemas/nyt.schema"), "--per-class", "3",
               "--out", ds, "--script", data("scripts/generate.mock.json")})
              .code == 0);

  auto m = run({"metrics", "--dataset", ds, "--against", ds});
  REQUIRE_MESSAGE(m.code == 0, m.err);
  auto mj = nlohmann::json::parse(m.out);
  CHECK(mj["report"]["documents"] == 78);
  CHECK(mj["report"] == mj["against_report"]);

  auto rep = (dir.path() / "bias.json").string();
  auto b = run({"bias", "--train", ds, "--dimension", "location", "--apply", ds,
                "--report", rep, "--schema", data("schemas/nyt.schema")});
  REQUIRE_MESSAGE(b.code == 0, b.err);
  auto bj = nlohmann::json::parse(io::read_file(rep));
  double sum = 0;
  for (const auto& [k, v] : bj["overall"].items()) sum += v.get<double>();
  CHECK(sum == doctest::Approx(1.0));
  CHECK(bj["per_class"][9]["class"] == "federal budget");

  auto truth = dir.path() / "t.jsonl";
  write_records({{{0, 2}, true, "a"}, {{1}, true, "b"}}, truth);
  io::write_file(dir.path() / "s.txt", "0.9 0.1 0.8\n0.2 0.7 0.1\n");
  auto e = run({"eval-metrics", "--scores", (dir.path() / "s.txt").string(),
                "--dataset", truth.string(), "--k", "1,2"});
  REQUIRE_MESSAGE(e.code == 0, e.err);
  auto ej = nlohmann::json::parse(e.out);
  CHECK(ej["precision@1"] == 1.0);
  CHECK(ej["macro_f1"] == 1.0);
  CHECK(ej["mrr"] == 1.0);
  auto bad = run({"eval-metrics", "--scores", (dir.path() / "s.txt").string(),
                  "--dataset", truth.string(), "--k", "4"});
  CHECK(bad.code == cli::kExitDomain);
}

TEST_CASE("propose and curate") {
  auto p = run({"propose", "--task", "NYT news", "--dimension", "subtopics",
                "--class", "economy", "--script", data("scripts/curate.mock.json")});
  REQUIRE_MESSAGE(p.code == 0, p.err);
  CHECK(p.out.rfind("Inflation and deflation\n", 0) == 0);

  test::TempDir dir;
  auto cands = dir.path() / "c.txt";
  io::write_file(cands, "Alpha\nBeta\nGamma\n");
  auto rec = (dir.path() / "decisions.txt").string();
  auto c = run({"curate", "--dimension", "topic", "--candidates", cands.string(),
                "--record", rec},
               "y\nmaybe\nn\nyes\n");
  REQUIRE_MESSAGE(c.code == 0, c.err);
  CHECK(c.out.find("Alpha\nGamma\n") != std::string::npos);
  auto replay = run({"curate", "--dimension", "topic", "--candidates", cands.string(),
                     "--replay", rec, "--out", (dir.path() / "acc.txt").string()});
  REQUIRE_MESSAGE(replay.code == 0, replay.err);
  CHECK(io::read_file(dir.path() / "acc.txt") == "Alpha\nGamma\n");
  // Input ends before every candidate is decided.
  CHECK(run({"curate", "--dimension", "topic", "--candidates", cands.string()}, "y\n")
            .code == cli::kExitDomain);
}

TEST_CASE("filter removes values tied to similar classes") {
  test::TempDir dir;
  auto schema = dir.path() / "s.schema";
  io::write_file(schema, R"([task] name=nyt persona=P.
[class] id=0 name=economy
[class] id=1 name=international business
[dimension] name=subtopic kind=dependent
class: economy
value: effect of trade tariffs on manufacturing companies
value: inflation and deflation
class: international business
value: cross-border mergers
value: currency risk
)");
  auto out = dir.path() / "f.schema";
  auto r = run({"filter", "--schema", schema.string(), "--out", out.string(),
                "--script", data("scripts/curate.mock.json")});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  auto f = load_schema(out);
  const auto& econ = f.dimensions[0].values_for("economy");
  REQUIRE(econ.size() == 1);
  CHECK(econ[0].text == "inflation and deflation");
  CHECK(f.similar.at("economy") == std::vector<std::string>{"international business"});
  CHECK(r.out.find("subtopic / economy: removed 1 of 2") != std::string::npos);
}

TEST_CASE("the installed binary reports exit codes") {
  std::string bin = ATTRGEN_BINARY;
  CHECK(std::system((bin + " frobnicate >/dev/null 2>&1").c_str()) != 0);
  int status = std::system((bin + " --help >/dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(status) == 0);
  status = std::system((bin + " generate >/dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(status) == 2);
}
