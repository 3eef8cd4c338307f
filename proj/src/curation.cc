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


#include "attrgen/curation.h"

#include <cctype>
#include <chrono>
#include <ctime>
#include <istream>
#include <map>
#include <ostream>
#include <regex>
#include <set>

#include "attrgen/error.h"
#include "attrgen/io.h"
#include "attrgen/log.h"
#include "attrgen/promptgen.h"
#include "attrgen/text.h"

namespace attrgen {

std::vector<std::string> parse_enumerated_list(std::string_view input) {
  static const std::regex marker(R"(^(?:[-*]|\xE2\x80\xA2|[0-9]+[.)])(?:\s+|$))");
  std::vector<std::string> out;
  for (const auto& raw : text::split_lines(input)) {
    std::string item(text::trim(raw));
    std::smatch m;
    while (std::regex_search(item, m, marker)) {
      item = std::string(text::trim(std::string_view(item).substr(
          static_cast<std::size_t>(m.length(0)))));
    }
    if (!item.empty()) out.push_back(std::move(item));
  }
  return out;
}

namespace {

std::string fill(const std::string& pattern,
                 const std::map<std::string, std::string>& values) {
  PromptTemplate t(PromptMode::kSim, pattern);
  std::string out;
  for (const auto& s : t.segments()) {
    out += s.literal;
    if (!s.placeholder) continue;
    auto it = values.find(s.placeholder->spelled());
    if (it == values.end()) {
      throw RenderError(s.placeholder->spelled(),
                        "unresolved placeholder '" + s.placeholder->spelled() +
                            "' in curation prompt");
    }
    out += it->second;
  }
  return out;
}

// "Name: explanation" -> "Name"; drops intro lines ending with ':'.
std::vector<std::string> item_heads(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    if (item.back() == ':') continue;
    std::size_t colon = item.find(": ");
    std::string head(text::trim(std::string_view(item).substr(0, colon)));
    if (!head.empty()) out.push_back(std::move(head));
  }
  return out;
}

std::vector<std::string> split_single_line(std::vector<std::string> items) {
  if (items.size() != 1 || items[0].find(',') == std::string::npos) {
    return items;
  }
  std::vector<std::string> out;
  for (const auto& part : text::split(items[0], ',')) {
    std::string p(text::trim(part));
    if (!p.empty() && p.back() == '.') p.pop_back();
    if (!p.empty()) out.push_back(std::move(p));
  }
  return out;
}

std::vector<std::string> dedup_ci(const std::vector<std::string>& items) {
  std::set<std::string> seen;
  std::vector<std::string> out;
  for (const auto& item : items) {
    if (seen.insert(text::to_lower(item)).second) out.push_back(item);
  }
  return out;
}

}  // namespace

CandidateList propose_dimensions(std::string_view task_description,
                                 Provider& provider,
                                 const GenerationParams& params,
                                 const CurationPrompts& prompts) {
  if (text::trim(task_description).empty()) {
    throw PreconditionError("task description is empty");
  }
  CandidateList list;
  list.source_prompt =
      fill(prompts.dimensions, {{"task", std::string(task_description)}});
  std::string answer = provider.complete(list.source_prompt, params).text;
  list.candidates = dedup_ci(
      split_single_line(item_heads(parse_enumerated_list(answer))));
  if (list.candidates.empty()) {
    throw ValidationError("no attribute dimensions could be parsed from: " +
                          answer);
  }
  return list;
}

CandidateList propose_values(std::string_view dimension,
                             const std::optional<std::string>& class_name,
                             std::size_t count, std::string_view task,
                             Provider& provider,
                             const GenerationParams& params,
                             const CurationPrompts& prompts) {
  if (count == 0) throw PreconditionError("value count must be positive");
  if (text::trim(dimension).empty()) {
    throw PreconditionError("dimension name is empty");
  }
  CandidateList list;
  list.dimension = std::string(dimension);
  list.class_name = class_name;
  std::map<std::string, std::string> vars = {
      {"count", std::to_string(count)},
      {"dimension", std::string(dimension)},
      {"task", std::string(task)}};
  if (class_name) {
    vars["class"] = *class_name;
    list.source_prompt = fill(prompts.dependent_values, vars);
  } else {
    list.source_prompt = fill(prompts.independent_values, vars);
  }
  std::string answer = provider.complete(list.source_prompt, params).text;
  auto items = item_heads(parse_enumerated_list(answer));
  if (count > 1) items = split_single_line(std::move(items));
  items = dedup_ci(items);
  if (items.empty()) {
    throw ValidationError("no values for '" + std::string(dimension) +
                          "' could be parsed from: " + answer);
  }
  if (items.size() > count) items.resize(count);
  list.candidates = std::move(items);
  return list;
}

// --- decisions file ---------------------------------------------------------

namespace {

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '\\' || c == ';' || c == '=') out += '\\';
    out += c;
  }
  return out;
}

std::string join_escaped(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ';';
    out += escape(items[i]);
  }
  return out;
}

std::string unescape(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) ++i;
    out += s[i];
  }
  return out;
}

std::vector<std::string> split_escaped(std::string_view s) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::string cur;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      cur += s[i];
      cur += s[++i];
    } else if (s[i] == ';') {
      out.push_back(unescape(cur));
      cur.clear();
    } else {
      cur += s[i];
    }
  }
  out.push_back(unescape(cur));
  return out;
}

std::string utc_now() {
  std::time_t t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string format_decision(const DecisionRecord& r) {
  std::string line = "dimension=" + escape(r.dimension) +
                     " class=" + (r.class_name ? escape(*r.class_name) : "-") +
                     " accept=" + join_escaped(r.accepted) +
                     " reject=" + join_escaped(r.rejected);
  if (!r.timestamp.empty()) line += " time=" + escape(r.timestamp);
  return line;
}

DecisionRecord parse_decision(std::string_view line, const std::string& source,
                              std::size_t line_no) {
  // Keys appear in fixed order; '=' inside values is always escaped.
  static const char* kKeys[] = {"dimension", "class", "accept", "reject",
                                "time"};
  std::string_view rest = text::trim(line);
  std::map<std::string, std::string_view> fields;
  for (std::size_t k = 0; k < 5; ++k) {
    std::string key = kKeys[k];
    std::string prefix = key + "=";
    if (rest.substr(0, prefix.size()) != prefix) {
      if (k == 4 && rest.empty()) break;
      throw ParseError(source, line_no, "expected '" + prefix + "'");
    }
    rest.remove_prefix(prefix.size());
    std::size_t end = rest.size();
    if (k + 1 < 5) {
      std::string next = std::string(" ") + kKeys[k + 1] + "=";
      std::size_t pos = rest.find(next);
      if (pos == std::string_view::npos && k + 1 < 4) {
        throw ParseError(source, line_no,
                         "missing '" + std::string(kKeys[k + 1]) + "='");
      }
      if (pos != std::string_view::npos) end = pos;
    }
    fields[key] = rest.substr(0, end);
    rest.remove_prefix(end);
    if (!rest.empty()) rest.remove_prefix(1);  // the separating space
  }
  DecisionRecord r;
  r.dimension = unescape(fields["dimension"]);
  if (r.dimension.empty()) {
    throw ParseError(source, line_no, "empty dimension");
  }
  if (fields["class"] != "-") r.class_name = unescape(fields["class"]);
  r.accepted = split_escaped(fields["accept"]);
  r.rejected = split_escaped(fields["reject"]);
  if (fields.count("time")) r.timestamp = unescape(fields["time"]);
  std::set<std::string> acc(r.accepted.begin(), r.accepted.end());
  for (const auto& v : r.rejected) {
    if (acc.count(v)) {
      throw ParseError(source, line_no,
                       "'" + v + "' is both accepted and rejected");
    }
  }
  return r;
}

std::vector<DecisionRecord> load_decisions(const std::filesystem::path& path) {
  std::vector<DecisionRecord> out;
  auto lines = text::split_lines(io::read_file(path));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view l = text::trim(lines[i]);
    if (l.empty() || l.front() == '#') continue;
    out.push_back(parse_decision(l, path.string(), i + 1));
  }
  return out;
}

DecisionRecord interactive_select(const CandidateList& candidates,
                                  const SelectOptions& options) {
  DecisionRecord record;
  record.dimension =
      candidates.dimension.empty() ? "dimensions" : candidates.dimension;
  record.class_name = candidates.class_name;

  if (options.replay) {
    auto all = load_decisions(*options.replay);
    const DecisionRecord* found = nullptr;
    for (const auto& r : all) {
      if (r.dimension == record.dimension &&
          r.class_name == record.class_name) {
        found = &r;
      }
    }
    std::string what = "'" + record.dimension + "'" +
                       (record.class_name ? " class '" + *record.class_name +
                                                "'"
                                          : "");
    if (found == nullptr) {
      throw ValidationError("replay file has no decision for " + what);
    }
    std::set<std::string> known(candidates.candidates.begin(),
                                candidates.candidates.end());
    std::set<std::string> decided;
    for (const auto* side : {&found->accepted, &found->rejected}) {
      for (const auto& v : *side) {
        if (!known.count(v)) {
          throw ValidationError("replay decision for " + what +
                                " names unknown candidate '" + v + "'");
        }
        decided.insert(v);
      }
    }
    for (const auto& c : candidates.candidates) {
      if (!decided.count(c)) {
        throw ValidationError("replay decision for " + what +
                              " leaves candidate '" + c + "' undecided");
      }
    }
    return *found;
  }

  if (options.in == nullptr) {
    throw PreconditionError(
        "interactive selection needs a terminal or a replay file");
  }
  const std::size_t n = candidates.candidates.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = candidates.candidates[i];
    for (;;) {
      if (options.out) {
        *options.out << "[" << (i + 1) << "/" << n << "] " << c
                     << "  accept? [y/n] " << std::flush;
      }
      std::string answer;
      if (!std::getline(*options.in, answer)) {
        throw PreconditionError("input ended before every candidate was "
                                "decided");
      }
      std::string a = text::to_lower(text::trim(answer));
      if (a == "y" || a == "yes") {
        record.accepted.push_back(c);
        break;
      }
      if (a == "n" || a == "no") {
        record.rejected.push_back(c);
        break;
      }
    }
  }
  record.timestamp = utc_now();
  if (options.record) {
    io::append_file(*options.record, format_decision(record) + "\n");
  }
  return record;
}

// --- similar classes and CAF ------------------------------------------------

namespace {

std::string class_key(std::string_view name) {
  std::string s = text::normalize_space(name);
  for (char& c : s) {
    if (c == '_') c = ' ';
  }
  s = text::normalize_space(s);
  while (!s.empty() && (s.back() == '.' || s.back() == ',')) s.pop_back();
  return s;
}

}  // namespace

std::vector<std::string> similar_classes(const ClassLabel& label,
                                         const std::vector<ClassLabel>& all,
                                         std::size_t k, Provider& provider,
                                         const GenerationParams& params,
                                         const CurationPrompts& prompts) {
  if (k == 0) throw PreconditionError("k must be at least 1");
  std::map<std::string, std::string> by_key;
  std::vector<std::string> names;
  for (const auto& c : all) {
    by_key.emplace(class_key(c.name), c.name);
    names.push_back(c.name);
  }
  if (!by_key.count(class_key(label.name))) {
    throw PreconditionError("class '" + label.name +
                            "' is not among the task classes");
  }
  std::string prompt = fill(prompts.similar, {{"k", std::to_string(k)},
                                              {"class", label.name},
                                              {"classes", text::join(names, ", ")}});
  std::string answer = provider.complete(prompt, params).text;
  auto items = split_single_line(item_heads(parse_enumerated_list(answer)));
  std::vector<std::string> out;
  std::set<std::string> seen;
  const std::string self = class_key(label.name);
  for (const auto& item : items) {
    std::string key = class_key(item);
    auto it = by_key.find(key);
    if (it == by_key.end()) {
      log::warn("similar classes for '" + label.name + "': '" + item +
                "' is not a task class; ignored");
      continue;
    }
    if (key == self || !seen.insert(key).second) continue;
    if (out.size() < k) out.push_back(it->second);
  }
  return out;
}

bool parse_yes_no(std::string_view answer) {
  std::size_t i = 0;
  while (i < answer.size() &&
         !std::isalpha(static_cast<unsigned char>(answer[i]))) {
    ++i;
  }
  std::size_t j = i;
  while (j < answer.size() &&
         std::isalpha(static_cast<unsigned char>(answer[j]))) {
    ++j;
  }
  std::string token = text::to_lower(answer.substr(i, j - i));
  if (token == "yes") return true;
  if (token == "no") return false;
  log::warn("could not read a yes/no answer from '" +
            std::string(text::trim(answer)) + "'; treating it as no");
  return false;
}

CafResult caf_filter(const ClassLabel& label, std::string_view dimension,
                     const std::vector<AttributeValue>& values,
                     const std::vector<std::string>& similar,
                     Provider& provider, const CafOptions& options) {
  CafResult result;
  if (similar.empty()) {
    result.kept = values;
    return result;
  }
  std::vector<std::string> prompts;
  prompts.reserve(values.size() * similar.size());
  for (const auto& v : values) {
    for (const auto& s : similar) {
      prompts.push_back(fill(options.relevance,
                             {{"dimension", std::string(dimension)},
                              {"value", v.text},
                              {"class", label.name},
                              {"similar-class", s}}));
    }
  }
  auto outcomes =
      provider.complete_many(prompts, options.params, options.max_in_flight);
  for (std::size_t i = 0; i < values.size(); ++i) {
    bool related = false;
    for (std::size_t j = 0; j < similar.size(); ++j) {
      const auto& o = outcomes[i * similar.size() + j];
      if (!o.ok()) {
        log::warn("relevance query for '" + values[i].text + "' vs '" +
                  similar[j] + "' failed (" + o.error + "); keeping the value");
        continue;
      }
      if (parse_yes_no(o.result->text)) related = true;
    }
    (related ? result.removed : result.kept).push_back(values[i]);
  }
  return result;
}

AttributeSchema apply_caf(const AttributeSchema& schema, std::size_t k,
                          Provider& provider, const CafOptions& options,
                          const CurationPrompts& prompts) {
  AttributeSchema out = schema;
  for (const auto& c : schema.classes) {
    auto similar =
        similar_classes(c, schema.classes, k, provider, options.params, prompts);
    out.similar[c.name] = similar;
    for (auto& d : out.dimensions) {
      if (d.kind != DimensionKind::kDependent) continue;
      auto r = caf_filter(c, d.name, d.values_for(c.name), similar, provider,
                          options);
      if (r.kept.empty()) {
        throw ValidationError("filtering removed every value of dimension '" +
                              d.name + "' for class '" + c.name + "'");
      }
      d.per_class[c.name] = std::move(r.kept);
    }
  }
  for (auto it = out.similar.begin(); it != out.similar.end();) {
    it = it->second.empty() ? out.similar.erase(it) : std::next(it);
  }
  validate_schema(out);
  return out;
}

}  // namespace attrgen
