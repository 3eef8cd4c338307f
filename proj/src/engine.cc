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


#include "attrgen/engine.h"

#include <algorithm>
#include <deque>
#include <functional>
#include <regex>
#include <set>

#include <json.hpp>

#include "attrgen/error.h"
#include "attrgen/io.h"
#include "attrgen/log.h"
#include "attrgen/rng.h"
#include "attrgen/text.h"

namespace attrgen {

using ojson = nlohmann::ordered_json;

void GenerationJob::validate() const {
  validate_schema(schema);
  if (per_class < 1) throw PreconditionError("per-class count must be >= 1");
  if (budget_cap && !(*budget_cap >= 0.0)) {
    throw PreconditionError("budget cap must be >= 0");
  }
  if (retry_empty < 0 || max_refills < 0) {
    throw PreconditionError("retry counts must be >= 0");
  }
  if (max_in_flight < 1) throw PreconditionError("max_in_flight must be >= 1");
  params.validate();
  if (mode == PromptMode::kAttr) {
    if (!attr_template) throw PreconditionError("attr mode needs a template");
    if (attr_template->mode() != PromptMode::kAttr) {
      throw PreconditionError("attr mode needs an attr template");
    }
  } else if (!sim_template) {
    throw PreconditionError(std::string(mode_name(mode)) +
                            " mode needs a sim template");
  }
}

std::optional<std::string> postprocess(std::string_view raw) {
  std::vector<std::string> lines;
  bool blank_run = false;
  for (const auto& l : text::split_lines(raw)) {
    std::string_view t = text::trim(l);
    if (t.empty()) {
      blank_run = !lines.empty();
      continue;
    }
    if (blank_run) lines.emplace_back();
    blank_run = false;
    lines.emplace_back(t);
  }
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += '\n';
    out += lines[i];
  }
  static const std::regex marker(
      R"(^(?:[-*]|\xE2\x80\xA2|[0-9]+[.)])[ \t]+)");
  std::smatch m;
  if (std::regex_search(out, m, marker)) {
    out = std::string(
        text::trim(std::string_view(out).substr(
            static_cast<std::size_t>(m.length(0)))));
  }
  if (out.empty()) return std::nullopt;
  return out;
}

namespace {

const std::vector<std::string>* similar_for(const AttributeSchema& schema,
                                            const std::string& name) {
  auto it = schema.similar.find(name);
  return it == schema.similar.end() || it->second.empty() ? nullptr
                                                          : &it->second;
}

Provenance base_provenance(const GenerationJob& job, const Rng& rng,
                           std::uint64_t stream) {
  Provenance p;
  p.mode = std::string(mode_name(job.mode));
  p.rng = std::string(Rng::kAlgorithm);
  p.seed = job.seed;
  p.stream = stream;
  p.draw = rng.draws();
  return p;
}

// Draws fresh requests for the classes of a multi-class job.
class ClassPlanner {
 public:
  explicit ClassPlanner(const GenerationJob& job) : job_(job) {
    Rng root(job.seed);
    for (const auto& c : job.schema.classes) {
      streams_.push_back(root.split(static_cast<std::uint64_t>(c.id)));
    }
    meta_.resize(job.schema.classes.size());
  }

  std::string base_prompt(std::size_t ci) const {
    return render_sim(*job_.sim_template, job_.schema.classes[ci].name,
                      job_.schema.persona);
  }

  void set_meta(std::size_t ci, std::string description) {
    meta_[ci] = std::move(description);
  }

  Provenance draw(std::size_t ci) {
    const ClassLabel& c = job_.schema.classes[ci];
    Rng& rng = streams_[ci];
    Provenance p =
        base_provenance(job_, rng, static_cast<std::uint64_t>(c.id));
    p.labels = {c.id};
    p.class_names = {c.name};
    switch (job_.mode) {
      case PromptMode::kSim:
        p.prompt = base_prompt(ci);
        break;
      case PromptMode::kMeta:
        p.meta_description = meta_[ci];
        p.prompt = meta_[ci].empty() ? base_prompt(ci)
                                     : meta_[ci] + "\n\n" + base_prompt(ci);
        break;
      case PromptMode::kAttr: {
        AttributeConfiguration config =
            sample_configuration(job_.schema, c, rng);
        const auto* similar = job_.attr_template->uses("similar-classes") ||
                                      job_.attr_template->uses("similar-class")
                                  ? similar_for(job_.schema, c.name)
                                  : nullptr;
        p.prompt = render_attr(*job_.attr_template, c.name, config, similar,
                               job_.schema.persona);
        if (similar) p.similar = *similar;
        p.configuration = std::move(config);
        break;
      }
    }
    return p;
  }

 private:
  const GenerationJob& job_;
  std::vector<Rng> streams_;
  std::vector<std::string> meta_;
};

class LabelSetPlanner {
 public:
  LabelSetPlanner(const GenerationJob& job, const LabelCountDistribution& dist,
                  const std::map<std::string, SubtopicGroup>& merged)
      : job_(job), dist_(dist), rng_(Rng(job.seed).split(0)) {
    for (const auto& c : job.schema.classes) names_.push_back(c.name);
    for (const auto& [rep, g] : merged) groups_.push_back(&g);
    if (job.mode == PromptMode::kMeta) {
      throw PreconditionError("meta mode is not available for multi-label "
                              "generation");
    }
    if (job.mode == PromptMode::kSim) {
      dist.validate();
      return;
    }
    if (groups_.empty()) {
      throw PreconditionError("multi-label attr mode needs merged subtopics");
    }
    for (const auto* g : groups_) {
      if (g->members.empty() || g->classes.empty()) {
        throw PreconditionError("merged group '" + g->representative +
                                "' has no members or classes");
      }
      for (const auto& c : g->classes) {
        if (job.schema.find_class(c) == nullptr) {
          throw PreconditionError("merged group '" + g->representative +
                                  "' names unknown class '" + c + "'");
        }
      }
    }
    if (!job.subtopic_dimension.empty()) {
      subtopic_ = job.schema.find_dimension(job.subtopic_dimension);
      if (subtopic_ == nullptr) {
        throw PreconditionError("unknown subtopic dimension '" +
                                job.subtopic_dimension + "'");
      }
    } else {
      for (const auto& d : job.schema.dimensions) {
        if (d.kind == DimensionKind::kDependent) {
          subtopic_ = &d;
          break;
        }
      }
      if (subtopic_ == nullptr) {
        throw PreconditionError("schema has no class-dependent dimension for "
                                "merged subtopics");
      }
    }
  }

  Provenance draw(std::size_t) {
    Provenance p = base_provenance(job_, rng_, 0);
    std::vector<std::string> chosen;
    if (job_.mode == PromptMode::kSim) {
      chosen = sample_label_set(dist_, names_, rng_);
      p.class_names = chosen;
      for (const auto& n : chosen) {
        p.labels.push_back(job_.schema.class_by_name(n).id);
      }
      p.prompt = render_sim(*job_.sim_template, text::join(chosen, ", "),
                            job_.schema.persona);
      return p;
    }
    const SubtopicGroup& g = *groups_[rng_.uniform(groups_.size())];
    const std::string& member = g.members[rng_.uniform(g.members.size())];
    std::vector<const ClassLabel*> classes;
    for (const auto& n : g.classes) {
      classes.push_back(&job_.schema.class_by_name(n));
    }
    std::sort(classes.begin(), classes.end(),
              [](const ClassLabel* a, const ClassLabel* b) {
                return a->id < b->id;
              });
    const ClassLabel& anchor = *classes[rng_.uniform(classes.size())];
    AttributeConfiguration config;
    for (const auto* c : classes) {
      config.labels.push_back(c->id);
      p.labels.push_back(c->id);
      p.class_names.push_back(c->name);
    }
    for (const auto& d : job_.schema.dimensions) {
      if (&d == subtopic_) {
        config.assignments.push_back({d.name, d.key, subtopic_value(d, g, member)});
        continue;
      }
      const auto& values = d.values_for(anchor.name);
      config.assignments.push_back(
          {d.name, d.key, values[rng_.uniform(values.size())]});
    }
    p.prompt = render_attr(*job_.attr_template, text::join(p.class_names, ", "),
                           config, nullptr, job_.schema.persona);
    p.configuration = std::move(config);
    return p;
  }

 private:
  static AttributeValue subtopic_value(const AttributeDimension& d,
                                       const SubtopicGroup& g,
                                       const std::string& member) {
    for (const auto& c : g.classes) {
      if (d.kind == DimensionKind::kDependent && !d.per_class.count(c)) {
        continue;
      }
      for (const auto& v : d.values_for(c)) {
        if (v.text == member) return v;
      }
    }
    return AttributeValue{member, {}};
  }

  const GenerationJob& job_;
  const LabelCountDistribution& dist_;
  Rng rng_;
  std::vector<std::string> names_;
  std::vector<const SubtopicGroup*> groups_;
  const AttributeDimension* subtopic_ = nullptr;
};

struct Work {
  std::size_t slot = 0;
  std::size_t group = 0;
  Provenance prov;
  int empty_left = 0;
  int refills_left = 0;
};

struct Runner {
  const GenerationJob& job;
  Provider& provider;
  double base_cost = 0.0;
  bool stopped = false;

  Runner(const GenerationJob& j, Provider& p)
      : job(j), provider(p), base_cost(p.meter().total_cost()) {}

  double spent() const { return provider.meter().total_cost() - base_cost; }

  double worst_case(const std::string& prompt) const {
    return provider.meter().projected_cost(
        text::whitespace_token_count(prompt),
        static_cast<std::uint64_t>(job.params.max_tokens));
  }

  bool fits(double committed, const std::string& prompt) const {
    return !job.budget_cap || committed + worst_case(prompt) <= *job.budget_cap;
  }

  void run(std::deque<Work> queue, std::size_t slots,
           const std::function<Provenance(std::size_t)>& redraw,
           Dataset& out) {
    std::vector<std::optional<GeneratedExample>> filled(slots);
    const std::string model = provider.model_id();
    while (!queue.empty() && !stopped) {
      std::vector<Work> wave;
      double committed = spent();
      while (wave.size() < job.max_in_flight && !queue.empty()) {
        if (!fits(committed, queue.front().prov.prompt)) {
          stopped = true;
          break;
        }
        committed += worst_case(queue.front().prov.prompt);
        wave.push_back(std::move(queue.front()));
        queue.pop_front();
      }
      if (wave.empty()) break;
      std::vector<std::string> prompts;
      for (const auto& w : wave) prompts.push_back(w.prov.prompt);
      auto outcomes =
          provider.complete_many(prompts, job.params, job.max_in_flight);
      for (std::size_t i = 0; i < wave.size(); ++i) {
        Work& w = wave[i];
        const auto& o = outcomes[i];
        if (!o.ok()) {
          if (o.failure == FailureKind::kBudget) {
            stopped = true;
            continue;
          }
          log::warn("slot " + std::to_string(w.slot) + " failed: " + o.error);
          out.failures.push_back({w.prov.labels, w.slot, o.error});
          continue;
        }
        if (auto text = postprocess(o.result->text)) {
          GeneratedExample ex;
          ex.labels = w.prov.labels;
          ex.text = std::move(*text);
          ex.provenance = std::move(w.prov);
          ex.provenance.model = model;
          ex.provenance.prompt_tokens = o.result->prompt_tokens;
          ex.provenance.completion_tokens = o.result->completion_tokens;
          filled[w.slot] = std::move(ex);
          continue;
        }
        if (w.empty_left > 0) {
          --w.empty_left;
          queue.push_back(std::move(w));
        } else if (w.refills_left > 0) {
          log::warn("slot " + std::to_string(w.slot) +
                    ": empty answers; trying a new configuration");
          Work next;
          next.slot = w.slot;
          next.group = w.group;
          next.prov = redraw(w.group);
          next.empty_left = job.retry_empty;
          next.refills_left = w.refills_left - 1;
          queue.push_back(std::move(next));
        } else {
          log::warn("slot " + std::to_string(w.slot) +
                    ": dropped after repeated empty answers");
          out.failures.push_back(
              {w.prov.labels, w.slot, "empty completion after retries"});
        }
      }
    }
    out.partial = stopped;
    for (auto& f : filled) {
      if (f) out.examples.push_back(std::move(*f));
    }
    std::sort(out.failures.begin(), out.failures.end(),
              [](const FailedSlot& a, const FailedSlot& b) {
                return a.slot < b.slot;
              });
    provider.meter().add_examples(out.examples.size());
    out.cost = provider.meter().snapshot();
  }
};

}  // namespace

std::vector<PlannedRequest> plan_requests(const GenerationJob& job) {
  job.validate();
  ClassPlanner planner(job);
  std::vector<PlannedRequest> out;
  for (std::size_t ci = 0; ci < job.schema.classes.size(); ++ci) {
    for (std::size_t k = 0; k < job.per_class; ++k) {
      Provenance p = planner.draw(ci);
      out.push_back({p.labels, p.prompt, p});
    }
  }
  return out;
}

Dataset generate_dataset(const GenerationJob& job, Provider& provider) {
  job.validate();
  ClassPlanner planner(job);
  Runner runner(job, provider);
  Dataset out;
  const std::size_t n_classes = job.schema.classes.size();
  std::vector<bool> class_ok(n_classes, true);

  if (job.mode == PromptMode::kMeta) {
    for (std::size_t ci = 0; ci < n_classes; ++ci) {
      std::string base = planner.base_prompt(ci);
      if (!runner.fits(runner.spent(), meta_query(base))) {
        runner.stopped = true;
        break;
      }
      try {
        std::string full = render_meta(base, provider, job.params);
        if (full.size() > base.size()) {
          planner.set_meta(ci, full.substr(0, full.size() - base.size() - 2));
        }
      } catch (const ProviderError& e) {
        log::warn("task description for '" + job.schema.classes[ci].name +
                  "' failed: " + e.what());
        class_ok[ci] = false;
      }
    }
  }

  std::deque<Work> queue;
  for (std::size_t ci = 0; ci < n_classes; ++ci) {
    for (std::size_t k = 0; k < job.per_class; ++k) {
      std::size_t slot = ci * job.per_class + k;
      if (!class_ok[ci]) {
        out.failures.push_back({{job.schema.classes[ci].id},
                                slot,
                                "task description query failed"});
        continue;
      }
      Work w;
      w.slot = slot;
      w.group = ci;
      w.prov = planner.draw(ci);
      w.empty_left = job.retry_empty;
      w.refills_left = job.max_refills;
      queue.push_back(std::move(w));
    }
  }
  if (runner.stopped) queue.clear();
  runner.run(std::move(queue), n_classes * job.per_class,
             [&](std::size_t ci) { return planner.draw(ci); }, out);
  return out;
}

Dataset generate_multilabel_dataset(
    const GenerationJob& job, const LabelCountDistribution& dist,
    const std::map<std::string, SubtopicGroup>& merged, Provider& provider) {
  job.validate();
  LabelSetPlanner planner(job, dist, merged);
  Runner runner(job, provider);
  Dataset out;
  const std::size_t total = job.per_class * job.schema.classes.size();
  std::deque<Work> queue;
  for (std::size_t slot = 0; slot < total; ++slot) {
    Work w;
    w.slot = slot;
    w.prov = planner.draw(slot);
    w.empty_left = job.retry_empty;
    w.refills_left = job.max_refills;
    queue.push_back(std::move(w));
  }
  runner.run(std::move(queue), total,
             [&](std::size_t g) { return planner.draw(g); }, out);
  for (auto& ex : out.examples) ex.multi_label = true;
  return out;
}

// --- dataset files ----------------------------------------------------------

std::string format_record(const DatasetRecord& r) {
  std::string line = "{\"label\": ";
  if (r.multi_label) {
    line += '[';
    for (std::size_t i = 0; i < r.labels.size(); ++i) {
      if (i) line += ", ";
      line += std::to_string(r.labels[i]);
    }
    line += ']';
  } else {
    if (r.labels.size() != 1) {
      throw PreconditionError("single-label record needs exactly one label");
    }
    line += std::to_string(r.labels[0]);
  }
  line += ", \"text\": ";
  line += nlohmann::json(r.text).dump(-1, ' ', false,
                                      nlohmann::json::error_handler_t::replace);
  line += '}';
  return line;
}

namespace {

int label_id(const nlohmann::json& v, const std::string& source,
             std::size_t line_no) {
  if (!v.is_number_integer()) {
    throw ParseError(source, line_no, "label must be an integer");
  }
  auto id = v.get<long long>();
  if (id < 0 || id > std::numeric_limits<int>::max()) {
    throw ParseError(source, line_no, "label out of range");
  }
  return static_cast<int>(id);
}

}  // namespace

DatasetRecord parse_record(std::string_view line, const std::string& source,
                           std::size_t line_no) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(source, line_no, e.what());
  }
  if (!j.is_object() || !j.contains("label") || !j.contains("text")) {
    throw ParseError(source, line_no,
                     "record needs \"label\" and \"text\" fields");
  }
  DatasetRecord r;
  const auto& label = j["label"];
  if (label.is_array()) {
    r.multi_label = true;
    for (const auto& v : label) r.labels.push_back(label_id(v, source, line_no));
    if (r.labels.empty()) throw ParseError(source, line_no, "empty label list");
  } else {
    r.labels.push_back(label_id(label, source, line_no));
  }
  if (!j["text"].is_string()) {
    throw ParseError(source, line_no, "text must be a string");
  }
  r.text = j["text"].get<std::string>();
  return r;
}

void write_records(const std::vector<DatasetRecord>& records,
                   const std::filesystem::path& path) {
  std::string content;
  for (const auto& r : records) content += format_record(r) + "\n";
  io::write_file(path, content);
}

std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path) {
  std::vector<DatasetRecord> out;
  auto lines = text::split_lines(io::read_file(path));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    out.push_back(parse_record(lines[i], path.string(), i + 1));
  }
  return out;
}

std::filesystem::path provenance_path(const std::filesystem::path& dataset) {
  return std::filesystem::path(dataset.string() + ".provenance.jsonl");
}

std::string format_provenance(const Provenance& p, std::size_t line) {
  ojson j;
  j["line"] = line;
  j["labels"] = p.labels;
  j["classes"] = p.class_names;
  j["mode"] = p.mode;
  j["prompt"] = p.prompt;
  if (p.configuration) {
    ojson config = ojson::array();
    for (const auto& a : p.configuration->assignments) {
      ojson entry;
      entry["dimension"] = a.dimension;
      entry["key"] = a.key;
      entry["value"] = a.value.text;
      if (!a.value.fields.empty()) entry["fields"] = a.value.fields;
      config.push_back(std::move(entry));
    }
    j["configuration"] = std::move(config);
  }
  if (!p.similar.empty()) j["similar"] = p.similar;
  if (!p.meta_description.empty()) j["meta_description"] = p.meta_description;
  j["model"] = p.model;
  j["prompt_tokens"] = p.prompt_tokens;
  j["completion_tokens"] = p.completion_tokens;
  j["rng"] = p.rng;
  j["seed"] = p.seed;
  j["stream"] = p.stream;
  j["draw"] = p.draw;
  return j.dump(-1, ' ', false, ojson::error_handler_t::replace);
}

Provenance parse_provenance(std::string_view line, const std::string& source,
                            std::size_t line_no) {
  try {
    ojson j = ojson::parse(line);
    Provenance p;
    p.labels = j.at("labels").get<std::vector<int>>();
    p.class_names = j.at("classes").get<std::vector<std::string>>();
    p.mode = j.at("mode").get<std::string>();
    p.prompt = j.at("prompt").get<std::string>();
    if (j.contains("configuration")) {
      AttributeConfiguration config;
      config.labels = p.labels;
      for (const auto& e : j["configuration"]) {
        Assignment a;
        a.dimension = e.at("dimension").get<std::string>();
        a.key = e.at("key").get<std::string>();
        a.value.text = e.at("value").get<std::string>();
        if (e.contains("fields")) {
          a.value.fields = e["fields"].get<std::map<std::string, std::string>>();
        }
        config.assignments.push_back(std::move(a));
      }
      p.configuration = std::move(config);
    }
    if (j.contains("similar")) {
      p.similar = j["similar"].get<std::vector<std::string>>();
    }
    if (j.contains("meta_description")) {
      p.meta_description = j["meta_description"].get<std::string>();
    }
    p.model = j.at("model").get<std::string>();
    p.prompt_tokens = j.at("prompt_tokens").get<std::uint64_t>();
    p.completion_tokens = j.at("completion_tokens").get<std::uint64_t>();
    p.rng = j.at("rng").get<std::string>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.stream = j.at("stream").get<std::uint64_t>();
    p.draw = j.at("draw").get<std::uint64_t>();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(source, line_no, e.what());
  }
}

std::vector<Provenance> load_provenance(const std::filesystem::path& path) {
  std::vector<Provenance> out;
  auto lines = text::split_lines(io::read_file(path));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    out.push_back(parse_provenance(lines[i], path.string(), i + 1));
  }
  return out;
}

void emit_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::string records;
  std::string provenance;
  for (std::size_t i = 0; i < dataset.examples.size(); ++i) {
    const auto& ex = dataset.examples[i];
    records += format_record({ex.labels, ex.multi_label, ex.text}) + "\n";
    provenance += format_provenance(ex.provenance, i + 1) + "\n";
  }
  io::write_file(path, records);
  io::write_file(provenance_path(path), provenance);
}

}  // namespace attrgen
