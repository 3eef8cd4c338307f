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


// LLM-assisted curation of the attribute space: proposing dimensions and
// values, recording human accept/reject decisions, finding similar classes
// and filtering class-dependent values that overlap with them.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "attrgen/provider.h"
#include "attrgen/schema.h"

namespace attrgen {

// Items of a numbered ("1.", "1)"), bulleted ("-", "*", "•") or plain
// one-per-line list. Markers and surrounding whitespace are stripped and
// empty items dropped.
std::vector<std::string> parse_enumerated_list(std::string_view text);

struct CandidateList {
  std::string dimension;  // empty for dimension proposals
  std::optional<std::string> class_name;
  std::vector<std::string> candidates;  // case-insensitively distinct
  std::string source_prompt;

  bool operator==(const CandidateList&) const = default;
};

// Query wording. Placeholders are filled by name; see README.
struct CurationPrompts {
  std::string dimensions =
      "Which attribute dimensions matter most when writing {task}? "
      "Answer with a list.";
  std::string dependent_values = "List {count} diverse {dimension} for {class} {task}.";
  std::string independent_values = "List {count} different {dimension} for {task}.";
  std::string similar =
      "List {k} similar classes for {class}. The set of classes is: "
      "{classes}.";
  std::string relevance =
      "Is the {dimension} '{value}' related to the topic '{similar-class}'? "
      "Answer Yes or No.";
};

// Throws ValidationError when the answer holds no list item.
CandidateList propose_dimensions(std::string_view task_description,
                                 Provider& provider,
                                 const GenerationParams& params = {},
                                 const CurationPrompts& prompts = {});

// `task` fills {task}; `class_name` is required for dependent dimensions.
CandidateList propose_values(std::string_view dimension,
                             const std::optional<std::string>& class_name,
                             std::size_t count, std::string_view task,
                             Provider& provider,
                             const GenerationParams& params = {},
                             const CurationPrompts& prompts = {});

struct DecisionRecord {
  std::string dimension;
  std::optional<std::string> class_name;
  std::vector<std::string> accepted;
  std::vector<std::string> rejected;
  std::string timestamp;  // ISO 8601 UTC; may be empty

  bool operator==(const DecisionRecord&) const = default;
};

// Decisions file: one record per line,
//   dimension=<s> class=<s|-> accept=<v1;v2;...> reject=<...> [time=<iso>]
// Inside values `\` `;` and `=` are escaped with a backslash. Lines that are
// blank or start with '#' are skipped.
std::string format_decision(const DecisionRecord& record);
DecisionRecord parse_decision(std::string_view line, const std::string& source,
                              std::size_t line_no);
std::vector<DecisionRecord> load_decisions(const std::filesystem::path& path);

struct SelectOptions {
  std::optional<std::filesystem::path> replay;  // replay mode when set
  std::optional<std::filesystem::path> record;  // appended to afterwards
  std::istream* in = nullptr;                   // terminal dialog
  std::ostream* out = nullptr;
};

// Replay uses the last record for (dimension, class) and fails when it names
// an unknown candidate or leaves one undecided. Otherwise each candidate is
// asked about on `in`. The resulting record is appended to `record`.
DecisionRecord interactive_select(const CandidateList& candidates,
                                  const SelectOptions& options);

// Names from `all_classes` the provider considers similar to `label`, in
// answer order, at most k, never `label` itself. Unknown names are logged
// and dropped.
std::vector<std::string> similar_classes(const ClassLabel& label,
                                         const std::vector<ClassLabel>& all,
                                         std::size_t k, Provider& provider,
                                         const GenerationParams& params = {},
                                         const CurationPrompts& prompts = {});

// First alphabetic token: "yes" -> true, "no" -> false, anything else is
// logged and treated as false.
bool parse_yes_no(std::string_view answer);

struct CafOptions {
  std::string relevance = CurationPrompts{}.relevance;
  GenerationParams params;
  std::size_t max_in_flight = 4;
};

struct CafResult {
  std::vector<AttributeValue> kept;
  std::vector<AttributeValue> removed;
};

// Removes values the provider relates to any of the similar classes. Failed
// queries keep the value and log a warning.
CafResult caf_filter(const ClassLabel& label, std::string_view dimension,
                     const std::vector<AttributeValue>& values,
                     const std::vector<std::string>& similar,
                     Provider& provider, const CafOptions& options = {});

// Runs similar_classes and caf_filter for every class and every dependent
// dimension, returning the filtered schema with its [similar] map filled.
// Throws ValidationError when a class would be left without values.
AttributeSchema apply_caf(const AttributeSchema& schema, std::size_t k,
                          Provider& provider, const CafOptions& options = {},
                          const CurationPrompts& prompts = {});

}  // namespace attrgen
