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

// The attribute space of a classification task: its classes, the attribute
// dimensions and the values each dimension can take, either shared by all
// classes or specific to each class.
//
// Schema files are line-oriented UTF-8 text. Blank lines and lines starting
// with '#' are ignored.
//
//   [task] name=<s> persona=<s>
//   [class] id=<int> name=<s>
//   [dimension] name=<s> [key=<s>] kind=<independent|dependent>
//   value: <text> [| <field>=<v> ...]
//   class: <class-name>          (dependent dimensions only)
//   [similar] class=<s> classes=<s>;<s>;...
//
// Header values run to the next `<known-key>=` or to the end of the line;
// wrap a value in double quotes to include such text (\" and \\ escape).
// In value lines `\|` is a literal bar. Field values containing spaces must
// be quoted. `key` names the dimension inside templates and defaults to the
// lowercased name with spaces replaced by '-'. `[similar]` sections record
// the classes a class must be kept apart from (filled in by `filter`).

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace attrgen {

struct ClassLabel {
  int id = 0;
  std::string name;

  bool operator==(const ClassLabel&) const = default;
};

struct AttributeValue {
  std::string text;
  // Compound parts such as min-words/max-words. Kept as strings; only the
  // renderer interprets them.
  std::map<std::string, std::string> fields;

  bool operator==(const AttributeValue&) const = default;
};

enum class DimensionKind { kIndependent, kDependent };

struct AttributeDimension {
  std::string name;
  std::string key;
  DimensionKind kind = DimensionKind::kIndependent;
  std::vector<AttributeValue> shared;  // kIndependent
  std::map<std::string, std::vector<AttributeValue>> per_class;  // kDependent

  // Values applicable to `class_name`. Throws ValidationError when a
  // dependent dimension has no list for the class.
  const std::vector<AttributeValue>& values_for(
      std::string_view class_name) const;

  bool operator==(const AttributeDimension&) const = default;
};

struct AttributeSchema {
  std::string task_name;
  std::string persona;
  std::vector<ClassLabel> classes;  // sorted by id
  std::vector<AttributeDimension> dimensions;
  std::map<std::string, std::vector<std::string>> similar;

  const ClassLabel* find_class(std::string_view name) const;
  const ClassLabel& class_by_name(std::string_view name) const;
  const ClassLabel& class_by_id(int id) const;
  // Matches either the dimension name or its key.
  const AttributeDimension* find_dimension(std::string_view name_or_key) const;

  bool operator==(const AttributeSchema&) const = default;
};

std::string default_dimension_key(std::string_view name);

// Throws ValidationError naming the offending class or dimension.
void validate_schema(const AttributeSchema& schema);

// Parses schema text; `source` labels error messages. Throws ParseError for
// syntax problems and ValidationError for invariant violations.
AttributeSchema parse_schema(std::string_view content,
                             const std::string& source = "<schema>");
AttributeSchema load_schema(const std::filesystem::path& path);

std::string format_schema(const AttributeSchema& schema);
void save_schema(const AttributeSchema& schema,
                 const std::filesystem::path& path);

// Product over dimensions of the number of values applicable to the class.
std::uint64_t count_configurations(const AttributeSchema& schema,
                                   const ClassLabel& label);

}  // namespace attrgen
