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


#include "attrgen/cli.h"

#include <cmath>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "attrgen/biasprobe.h"
#include "attrgen/curation.h"
#include "attrgen/engine.h"
#include "attrgen/error.h"
#include "attrgen/io.h"
#include "attrgen/metrics.h"
#include "attrgen/promptgen.h"
#include "attrgen/provider.h"
#include "attrgen/sampler.h"
#include "attrgen/schema.h"
#include "attrgen/text.h"

namespace attrgen::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Settings shared by every subcommand; the JSON config supplies defaults
// that flags override.
struct Common {
  std::string config_path;
  std::string provider;  // mock | remote
  std::string script;
  std::string base_url;
  std::string model;
  std::optional<double> price_prompt;
  std::optional<double> price_completion;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_in_flight;
  std::optional<int> max_retries;

  json config = json::object();
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "JSON run configuration")
      ->check(CLI::ExistingFile);
  app->add_option("--provider", c.provider, "mock or remote")
      ->check(CLI::IsMember({"mock", "remote"}));
  app->add_option("--script", c.script, "mock provider script (JSON)")
      ->check(CLI::ExistingFile);
  app->add_option("--base-url", c.base_url, "remote API base URL");
  app->add_option("--model", c.model, "remote model id");
  app->add_option("--price-prompt", c.price_prompt,
                  "price per 1k prompt tokens");
  app->add_option("--price-completion", c.price_completion,
                  "price per 1k completion tokens");
  app->add_option("--max-in-flight", c.max_in_flight,
                  "concurrent requests")
      ->check(CLI::PositiveNumber);
  app->add_option("--max-retries", c.max_retries, "retries of transient errors")
      ->check(CLI::NonNegativeNumber);
}

void load_config(Common& c) {
  if (c.config_path.empty()) return;
  try {
    c.config = json::parse(io::read_file(c.config_path));
  } catch (const json::exception& e) {
    throw ParseError(c.config_path, 0, e.what());
  }
  if (!c.config.is_object()) {
    throw ParseError(c.config_path, 0, "configuration must be an object");
  }
}

template <typename T>
T setting(const Common& c, const std::string& section, const std::string& key,
          T fallback) {
  const json* node = &c.config;
  if (!section.empty()) {
    if (!c.config.contains(section)) return fallback;
    node = &c.config[section];
  }
  if (!node->is_object() || !node->contains(key)) return fallback;
  try {
    return (*node)[key].get<T>();
  } catch (const json::exception& e) {
    throw ValidationError("config " + (section.empty() ? "" : section + ".") +
                          key + ": " + e.what());
  }
}

std::string path_setting(const Common& c, const std::string& flag_value,
                         const std::string& key) {
  if (!flag_value.empty()) return flag_value;
  return setting<std::string>(c, "", key, "");
}

std::uint64_t seed_of(const Common& c) {
  return c.seed ? *c.seed : setting<std::uint64_t>(c, "", "seed", 0);
}

std::size_t in_flight_of(const Common& c) {
  std::size_t n = c.max_in_flight
                      ? *c.max_in_flight
                      : setting<std::size_t>(c, "", "max_in_flight", 4);
  if (n < 1) throw ValidationError("max_in_flight must be >= 1");
  return n;
}

Pricing pricing_of(const Common& c) {
  Pricing p;
  p.prompt_per_1k = c.price_prompt
                        ? *c.price_prompt
                        : setting<double>(c, "pricing", "prompt_per_1k", 0.0);
  p.completion_per_1k =
      c.price_completion
          ? *c.price_completion
          : setting<double>(c, "pricing", "completion_per_1k", 0.0);
  if (!(p.prompt_per_1k >= 0.0) || !(p.completion_per_1k >= 0.0)) {
    throw ValidationError("prices must be >= 0");
  }
  return p;
}

std::unique_ptr<Provider> make_provider(const Common& c) {
  std::string kind = !c.provider.empty()
                         ? c.provider
                         : setting<std::string>(c, "provider", "kind", "");
  std::string script = !c.script.empty()
                           ? c.script
                           : setting<std::string>(c, "provider", "script", "");
  if (kind.empty()) kind = script.empty() ? "remote" : "mock";
  RetryPolicy retry;
  retry.max_retries = c.max_retries
                          ? *c.max_retries
                          : setting<int>(c, "provider", "max_retries", 3);
  if (kind == "mock") {
    if (script.empty()) {
      throw ValidationError("the mock provider needs --script");
    }
    return std::make_unique<MockProvider>(MockScript::load(script),
                                          pricing_of(c), retry);
  }
  if (kind != "remote") {
    throw ValidationError("unknown provider kind '" + kind + "'");
  }
  RemoteConfig rc;
  rc.base_url = !c.base_url.empty()
                    ? c.base_url
                    : setting<std::string>(c, "provider", "base_url",
                                           rc.base_url);
  rc.model = !c.model.empty()
                 ? c.model
                 : setting<std::string>(c, "provider", "model", rc.model);
  rc.api_key_env =
      setting<std::string>(c, "provider", "api_key_env", rc.api_key_env);
  rc.timeout = std::chrono::seconds(
      setting<int>(c, "provider", "timeout_s",
                   static_cast<int>(rc.timeout.count())));
  return std::make_unique<RemoteProvider>(rc, pricing_of(c), retry);
}

GenerationParams params_from(const Common& c, std::optional<double> temperature,
                             std::optional<double> top_p,
                             std::optional<int> max_tokens) {
  GenerationParams p;
  p.temperature = temperature
                      ? *temperature
                      : setting<double>(c, "generation", "temperature", 1.0);
  p.top_p = top_p ? *top_p : setting<double>(c, "generation", "top_p", 1.0);
  p.max_tokens =
      max_tokens ? *max_tokens
                 : setting<int>(c, "generation", "max_tokens", p.max_tokens);
  p.validate();
  return p;
}

std::vector<std::string> read_list(const std::string& path) {
  std::vector<std::string> out;
  for (const auto& l : text::split_lines(io::read_file(path))) {
    std::string_view t = text::trim(l);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

void write_or_print(const std::string& path, const std::string& content,
                    std::ostream& out) {
  if (path.empty()) {
    out << content;
  } else {
    io::write_file(path, content);
  }
}

// --- propose / curate -------------------------------------------------------

struct ProposeArgs {
  Common common;
  std::string task;
  std::string dimension;
  std::string class_name;
  std::size_t count = 10;
  std::string out;
};

int run_propose(ProposeArgs& a, std::ostream& out) {
  load_config(a.common);
  auto provider = make_provider(a.common);
  CandidateList list;
  if (a.dimension.empty()) {
    list = propose_dimensions(a.task, *provider);
  } else {
    std::optional<std::string> cls;
    if (!a.class_name.empty()) cls = a.class_name;
    list = propose_values(a.dimension, cls, a.count, a.task, *provider);
  }
  std::string content;
  for (const auto& c : list.candidates) content += c + "\n";
  write_or_print(a.out, content, out);
  return kExitOk;
}

struct CurateArgs {
  ProposeArgs propose;
  std::string candidates;
  std::string replay;
  std::string record;
};

int run_curate(CurateArgs& a, std::istream& in, std::ostream& out) {
  CandidateList list;
  if (!a.candidates.empty()) {
    list.dimension = a.propose.dimension;
    if (!a.propose.class_name.empty()) list.class_name = a.propose.class_name;
    list.candidates = read_list(a.candidates);
  } else {
    load_config(a.propose.common);
    auto provider = make_provider(a.propose.common);
    std::optional<std::string> cls;
    if (!a.propose.class_name.empty()) cls = a.propose.class_name;
    list = a.propose.dimension.empty()
               ? propose_dimensions(a.propose.task, *provider)
               : propose_values(a.propose.dimension, cls, a.propose.count,
                                a.propose.task, *provider);
  }
  SelectOptions opts;
  if (!a.replay.empty()) opts.replay = a.replay;
  if (!a.record.empty()) opts.record = a.record;
  opts.in = &in;
  opts.out = &out;
  DecisionRecord r = interactive_select(list, opts);
  std::string content;
  for (const auto& v : r.accepted) content += v + "\n";
  write_or_print(a.propose.out, content, out);
  return kExitOk;
}

// --- filter -----------------------------------------------------------------

struct FilterArgs {
  Common common;
  std::string schema;
  std::string out;
  std::size_t k = 5;
};

int run_filter(FilterArgs& a, std::ostream& out) {
  load_config(a.common);
  AttributeSchema schema = load_schema(path_setting(a.common, a.schema, "schema"));
  auto provider = make_provider(a.common);
  CafOptions opts;
  opts.max_in_flight = in_flight_of(a.common);
  AttributeSchema filtered = apply_caf(schema, a.k, *provider, opts);
  save_schema(filtered, a.out);
  for (const auto& d : schema.dimensions) {
    if (d.kind != DimensionKind::kDependent) continue;
    const AttributeDimension* fd = filtered.find_dimension(d.name);
    for (const auto& c : schema.classes) {
      std::size_t before = d.values_for(c.name).size();
      std::size_t after = fd->values_for(c.name).size();
      if (before != after) {
        out << d.name << " / " << c.name << ": removed " << (before - after)
            << " of " << before << "\n";
      }
    }
  }
  return kExitOk;
}

// --- generate ---------------------------------------------------------------

struct GenerateArgs {
  Common common;
  std::string schema;
  std::string mode = "attr";
  std::size_t per_class = 0;
  std::string out;
  std::optional<double> budget_cap;
  std::optional<double> temperature;
  std::optional<double> top_p;
  std::optional<int> max_tokens;
  std::string templates;
  std::string template_file;
  int retry_empty = 3;
  bool dry_run = false;
  std::vector<double> budget_fractions;
  bool multilabel = false;
  std::string reference;
  int gamma = 90;
  std::string subtopic_dimension;
};

fs::path with_fraction(const fs::path& out, double f) {
  std::ostringstream s;
  s << f;
  fs::path p = out;
  std::string ext = p.extension().string();
  p.replace_extension();
  return fs::path(p.string() + ".frac-" + s.str() + ext);
}

std::string summary_line(const fs::path& path, const Dataset& d) {
  std::ostringstream s;
  s << path.string() << ": " << d.examples.size() << " examples";
  if (!d.failures.empty()) s << ", " << d.failures.size() << " failed slots";
  if (d.partial) s << ", partial (budget cap reached)";
  s << ", cost " << std::setprecision(10) << d.cost.total_cost();
  if (d.cost.examples_emitted > 0) {
    s << ", per 1k examples " << cost_per_1k_examples(d.cost);
  }
  s << "\n";
  return s.str();
}

int run_generate(GenerateArgs& a, std::ostream& out, std::ostream& err) {
  load_config(a.common);
  const fs::path schema_path = path_setting(a.common, a.schema, "schema");
  if (schema_path.empty()) throw ValidationError("--schema is required");
  GenerationJob job;
  job.schema = load_schema(schema_path);
  job.mode = parse_mode(a.mode);
  job.per_class = a.per_class;
  job.params = params_from(a.common, a.temperature, a.top_p, a.max_tokens);
  job.seed = seed_of(a.common);
  job.budget_cap = a.budget_cap;
  if (!job.budget_cap && a.common.config.contains("budget_cap")) {
    job.budget_cap = setting<double>(a.common, "", "budget_cap", 0.0);
  }
  job.retry_empty = a.retry_empty;
  job.max_in_flight = in_flight_of(a.common);
  job.subtopic_dimension = a.subtopic_dimension;

  fs::path tdir = path_setting(a.common, a.templates, "templates");
  if (tdir.empty()) tdir = schema_path.parent_path().parent_path() / "templates";
  PromptMode tmode = job.mode == PromptMode::kAttr ? PromptMode::kAttr
                                                   : PromptMode::kSim;
  fs::path tpath = !a.template_file.empty()
                       ? fs::path(a.template_file)
                       : template_path(tdir, job.schema.task_name, tmode);
  if (!fs::exists(tpath)) {
    throw ValidationError("template not found: " + tpath.string());
  }
  if (tmode == PromptMode::kAttr) {
    job.attr_template = PromptTemplate::load(tpath, PromptMode::kAttr);
  } else {
    job.sim_template = PromptTemplate::load(tpath, PromptMode::kSim);
  }

  if (a.dry_run) {
    job.validate();
    if (a.multilabel) {
      throw ValidationError("--dry-run is not available with --multilabel");
    }
    Pricing pricing = pricing_of(a.common);
    double projected = 0.0;
    auto plan = plan_requests(job);
    for (std::size_t i = 0; i < plan.size(); ++i) {
      out << "### request " << (i + 1) << " labels=";
      for (std::size_t k = 0; k < plan[i].labels.size(); ++k) {
        out << (k ? "," : "") << plan[i].labels[k];
      }
      out << "\n" << plan[i].prompt << "\n\n";
      projected += token_cost(pricing,
                              text::whitespace_token_count(plan[i].prompt),
                              static_cast<std::uint64_t>(job.params.max_tokens));
    }
    if (job.mode == PromptMode::kMeta) {
      for (std::size_t ci = 0; ci < job.schema.classes.size(); ++ci) {
        std::string q = meta_query(
            render_sim(*job.sim_template, job.schema.classes[ci].name,
                       job.schema.persona));
        projected += token_cost(pricing, text::whitespace_token_count(q),
                                static_cast<std::uint64_t>(job.params.max_tokens));
      }
    }
    out << "requests " << plan.size() << "\n";
    out << "projected_cost " << std::setprecision(10) << projected << "\n";
    return kExitOk;
  }
  if (a.out.empty()) throw ValidationError("--out is required");

  LabelCountDistribution dist;
  std::map<std::string, SubtopicGroup> merged;
  if (a.multilabel) {
    if (!a.reference.empty()) {
      std::vector<std::vector<int>> sets;
      for (const auto& r : load_dataset(a.reference)) sets.push_back(r.labels);
      dist = estimate_label_count_distribution(sets, a.reference);
    } else {
      dist.histogram[1] = 1.0;
      dist.source = "singletons";
    }
    if (job.mode == PromptMode::kAttr) {
      GenerationJob probe = job;
      const AttributeDimension* d = nullptr;
      if (!a.subtopic_dimension.empty()) {
        d = job.schema.find_dimension(a.subtopic_dimension);
      } else {
        for (const auto& dim : job.schema.dimensions) {
          if (dim.kind == DimensionKind::kDependent) {
            d = &dim;
            break;
          }
        }
      }
      if (d == nullptr || d->kind != DimensionKind::kDependent) {
        throw ValidationError("multi-label attr mode needs a class-dependent "
                              "subtopic dimension");
      }
      std::map<std::string, std::vector<std::string>> per_class;
      for (const auto& c : job.schema.classes) {
        for (const auto& v : d->values_for(c.name)) {
          per_class[c.name].push_back(v.text);
        }
      }
      MergePolicy policy;
      policy.threshold = a.gamma;
      merged = merge_subtopics(per_class, policy);
    }
  }

  std::vector<double> fractions = a.budget_fractions;
  if (fractions.empty()) fractions.push_back(1.0);
  for (double f : fractions) {
    if (!(f > 0.0 && f <= 1.0)) {
      throw ValidationError("budget fractions must lie in (0, 1]");
    }
    GenerationJob run = job;
    run.per_class = std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::llround(static_cast<double>(job.per_class) * f)));
    auto provider = make_provider(a.common);
    Dataset d = a.multilabel
                    ? generate_multilabel_dataset(run, dist, merged, *provider)
                    : generate_dataset(run, *provider);
    fs::path path = a.budget_fractions.empty() ? fs::path(a.out)
                                               : with_fraction(a.out, f);
    emit_dataset(d, path);
    err << summary_line(path, d);
  }
  return kExitOk;
}

// --- metrics ----------------------------------------------------------------

struct MetricsArgs {
  Common common;
  std::string dataset;
  std::string against;
  std::string report;
  std::string embedder = "hash";
  std::size_t dimension = 4096;
  int n_max = 3;
  std::size_t bins = 50;
  std::uint64_t pair_cap = 10000;
};

// Multi-label records are grouped by their exact label set.
std::vector<int> label_keys(const std::vector<DatasetRecord>& records) {
  std::map<std::vector<int>, int> ids;
  std::vector<int> out;
  for (const auto& r : records) {
    if (!r.multi_label) {
      out.push_back(r.labels[0]);
      continue;
    }
    auto it = ids.emplace(r.labels, static_cast<int>(ids.size())).first;
    out.push_back(it->second);
  }
  return out;
}

std::unique_ptr<metrics::Embedder> make_embedder(const MetricsArgs& a) {
  std::string kind = a.embedder;
  if (kind == "hash") return std::make_unique<metrics::HashEmbedder>(a.dimension);
  metrics::RemoteEmbedderConfig rc;
  rc.base_url = setting<std::string>(a.common, "embedder", "base_url",
                                     rc.base_url);
  rc.model = setting<std::string>(a.common, "embedder", "model", rc.model);
  rc.api_key_env = setting<std::string>(a.common, "embedder", "api_key_env",
                                        rc.api_key_env);
  return std::make_unique<metrics::RemoteEmbedder>(rc);
}

int run_metrics(MetricsArgs& a, std::ostream& out) {
  load_config(a.common);
  auto embedder = make_embedder(a);
  metrics::DiversityOptions opts;
  opts.n_max = a.n_max;
  opts.bins = a.bins;
  opts.max_pairs_per_class = a.pair_cap;
  opts.seed = seed_of(a.common);
  auto one = [&](const std::string& path) {
    auto records = load_dataset(path);
    std::vector<std::string> corpus;
    for (const auto& r : records) corpus.push_back(r.text);
    return json::parse(metrics::report_json(
        metrics::diversity_report(corpus, label_keys(records), *embedder,
                                  opts)));
  };
  json report;
  report["dataset"] = a.dataset;
  report["report"] = one(a.dataset);
  if (!a.against.empty()) {
    report["against"] = a.against;
    report["against_report"] = one(a.against);
  }
  write_or_print(a.report, report.dump(2) + "\n", out);
  return kExitOk;
}

// --- bias -------------------------------------------------------------------

struct BiasArgs {
  Common common;
  std::string train;
  std::string dimension;
  std::string apply;
  std::string report;
  std::string schema;
  std::string annotations;
  double alpha = 1.0;
};

int run_bias(BiasArgs& a, std::ostream& out) {
  load_config(a.common);
  auto train_records = load_dataset(a.train);
  auto prov = load_provenance(provenance_path(a.train));
  auto clf = bias::train_attribute_classifier(
      a.dimension, bias::training_pairs(train_records, prov, a.dimension),
      a.alpha);
  auto records = load_dataset(a.apply);
  std::vector<std::string> texts;
  std::vector<std::vector<int>> labels;
  for (const auto& r : records) {
    texts.push_back(r.text);
    labels.push_back(r.labels);
  }
  std::map<int, std::string> names;
  std::string schema_path = path_setting(a.common, a.schema, "schema");
  if (!schema_path.empty()) {
    for (const auto& c : load_schema(schema_path).classes) names[c.id] = c.name;
  }
  json report = json::parse(
      bias::report_json(bias::distribution_report(clf, texts, labels), names));
  if (!a.annotations.empty()) {
    auto annotations = read_list(a.annotations);
    std::vector<std::string> predictions;
    for (const auto& t : texts) {
      predictions.push_back(bias::predict_attribute(clf, t).value);
    }
    report["agreement"] = bias::agreement(predictions, annotations);
  }
  write_or_print(a.report, report.dump(2) + "\n", out);
  return kExitOk;
}

// --- eval-metrics -----------------------------------------------------------

struct EvalArgs {
  std::string scores;
  std::string dataset;
  std::vector<int> ks{1, 5};
  double threshold = 0.5;
  std::string report;
};

int run_eval(EvalArgs& a, std::ostream& out) {
  auto scores = metrics::load_score_dump(a.scores);
  std::vector<std::vector<int>> truth;
  for (const auto& r : load_dataset(a.dataset)) truth.push_back(r.labels);
  auto r = metrics::multilabel_metrics(scores, truth, a.ks, a.threshold);
  write_or_print(a.report, metrics::report_json(r) + "\n", out);
  return kExitOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::istream& in,
             std::ostream& out, std::ostream& err) {
  CLI::App app{"attrgen: attributed training-data generation toolkit",
               "attrgen"};
  app.require_subcommand(1);

  ProposeArgs propose;
  auto* p = app.add_subcommand("propose",
                               "ask the provider for dimensions or values");
  add_common(p, propose.common);
  p->add_option("--task", propose.task, "task description")->required();
  p->add_option("--dimension", propose.dimension,
                "propose values of this dimension");
  p->add_option("--class", propose.class_name, "class for dependent values");
  p->add_option("--count", propose.count, "number of values")
      ->check(CLI::PositiveNumber);
  p->add_option("--out", propose.out, "write candidates here");

  CurateArgs curate;
  auto* cu = app.add_subcommand("curate", "accept or reject candidates");
  add_common(cu, curate.propose.common);
  cu->add_option("--task", curate.propose.task, "task description");
  cu->add_option("--dimension", curate.propose.dimension, "dimension name");
  cu->add_option("--class", curate.propose.class_name, "class name");
  cu->add_option("--count", curate.propose.count, "number of values")
      ->check(CLI::PositiveNumber);
  cu->add_option("--candidates", curate.candidates,
                 "candidate list, one per line")
      ->check(CLI::ExistingFile);
  cu->add_option("--replay", curate.replay, "decisions file to replay")
      ->check(CLI::ExistingFile);
  cu->add_option("--record", curate.record, "append decisions here");
  cu->add_option("--out", curate.propose.out, "write accepted values here");

  FilterArgs filter;
  auto* fi = app.add_subcommand(
      "filter", "drop class-dependent values related to similar classes");
  add_common(fi, filter.common);
  fi->add_option("--schema", filter.schema, "input schema");
  fi->add_option("--out", filter.out, "filtered schema")->required();
  fi->add_option("--k", filter.k, "similar classes per class")
      ->check(CLI::PositiveNumber);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "generate a dataset");
  add_common(g, gen.common);
  g->add_option("--schema", gen.schema, "schema file");
  g->add_option("--mode", gen.mode, "sim, attr or meta")
      ->check(CLI::IsMember({"sim", "attr", "meta"}));
  g->add_option("--per-class", gen.per_class, "examples per class")
      ->required()
      ->check(CLI::PositiveNumber);
  g->add_option("--seed", gen.common.seed, "random seed");
  g->add_option("--out", gen.out, "dataset file");
  g->add_option("--budget-cap", gen.budget_cap, "spending cap")
      ->check(CLI::NonNegativeNumber);
  g->add_option("--temperature", gen.temperature, "sampling temperature");
  g->add_option("--top-p", gen.top_p, "nucleus sampling mass");
  g->add_option("--max-tokens", gen.max_tokens, "completion token limit");
  g->add_option("--templates", gen.templates, "template directory");
  g->add_option("--template", gen.template_file, "template file")
      ->check(CLI::ExistingFile);
  g->add_option("--retry-empty", gen.retry_empty,
                "re-queries for empty answers")
      ->check(CLI::NonNegativeNumber);
  g->add_flag("--dry-run", gen.dry_run,
              "print prompts and projected cost only");
  g->add_option("--budget-fraction", gen.budget_fractions,
                "emit one dataset per fraction of --per-class")
      ->delimiter(',');
  g->add_flag("--multilabel", gen.multilabel, "multi-label generation");
  g->add_option("--reference", gen.reference,
                "dataset whose label counts are imitated")
      ->check(CLI::ExistingFile);
  g->add_option("--gamma", gen.gamma, "subtopic merge threshold")
      ->check(CLI::Range(0, 100));
  g->add_option("--subtopic-dimension", gen.subtopic_dimension,
                "dimension holding merged subtopics");

  MetricsArgs met;
  auto* m = app.add_subcommand("metrics", "diversity metrics of a dataset");
  add_common(m, met.common);
  m->add_option("--dataset", met.dataset, "dataset file")
      ->required()
      ->check(CLI::ExistingFile);
  m->add_option("--against", met.against, "second dataset")
      ->check(CLI::ExistingFile);
  m->add_option("--report", met.report, "report file");
  m->add_option("--embedder", met.embedder, "hash or remote")
      ->check(CLI::IsMember({"hash", "remote"}));
  m->add_option("--dimension", met.dimension, "hash embedding dimension")
      ->check(CLI::PositiveNumber);
  m->add_option("--n-max", met.n_max, "longest n-gram for INGF")
      ->check(CLI::PositiveNumber);
  m->add_option("--bins", met.bins, "histogram bins")
      ->check(CLI::PositiveNumber);
  m->add_option("--pair-cap", met.pair_cap, "same-class pairs per class")
      ->check(CLI::PositiveNumber);
  m->add_option("--seed", met.common.seed, "pair subsampling seed");

  BiasArgs bias_args;
  auto* b = app.add_subcommand("bias", "attribute distribution report");
  add_common(b, bias_args.common);
  b->add_option("--train", bias_args.train, "generated dataset with provenance")
      ->required()
      ->check(CLI::ExistingFile);
  b->add_option("--dimension", bias_args.dimension, "attribute dimension")
      ->required();
  b->add_option("--apply", bias_args.apply, "dataset to analyse")
      ->required()
      ->check(CLI::ExistingFile);
  b->add_option("--report", bias_args.report, "report file");
  b->add_option("--schema", bias_args.schema, "schema for class names")
      ->check(CLI::ExistingFile);
  b->add_option("--annotations", bias_args.annotations,
                "manual annotations, one per line, aligned with --apply")
      ->check(CLI::ExistingFile);
  b->add_option("--alpha", bias_args.alpha, "additive smoothing")
      ->check(CLI::PositiveNumber);

  EvalArgs eval;
  auto* e = app.add_subcommand("eval-metrics",
                               "multi-label metrics of a score dump");
  e->add_option("--scores", eval.scores, "score dump")
      ->required()
      ->check(CLI::ExistingFile);
  e->add_option("--dataset", eval.dataset, "dataset with the true labels")
      ->required()
      ->check(CLI::ExistingFile);
  e->add_option("--k", eval.ks, "cutoffs")->delimiter(',');
  e->add_option("--threshold", eval.threshold, "F1 decision threshold");
  e->add_option("--report", eval.report, "report file");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << "\n";
    const CLI::App* sub = nullptr;
    for (const auto* s : app.get_subcommands()) sub = s;
    err << (sub ? sub->help() : app.help());
    return kExitUsage;
  }

  try {
    if (p->parsed()) return run_propose(propose, out);
    if (cu->parsed()) return run_curate(curate, in, out);
    if (fi->parsed()) return run_filter(filter, out);
    if (g->parsed()) return run_generate(gen, out, err);
    if (m->parsed()) return run_metrics(met, out);
    if (b->parsed()) return run_bias(bias_args, out);
    if (e->parsed()) return run_eval(eval, out);
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitDomain;
  }
  err << app.help();
  return kExitUsage;
}

int dispatch(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch(args, std::cin, std::cout, std::cerr);
}

}  // namespace attrgen::cli
