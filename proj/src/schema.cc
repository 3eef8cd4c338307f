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

#include "attrgen/schema.h"

#include <algorithm>
#include <charconv>
#include <limits>
#include <optional>
#include <set>

#include "attrgen/error.h"
#include "attrgen/io.h"
#include "attrgen/text.h"

namespace attrgen {
namespace {

using text::trim;

const std::vector<std::string> kTaskKeys = {"name", "persona"};
const std::vector<std::string> kClassKeys = {"id", "name"};
const std::vector<std::string> kDimensionKeys = {"name", "key", "kind"};
const std::vector<std::string> kSimilarKeys = {"class", "classes"};

bool is_space(char c) { return c == ' ' || c == '\t'; }

// Position of the next " <key>=" (whitespace-preceded) at or after `from`.
std::size_t find_next_key(std::string_view s, std::size_t from,
                          const std::vector<std::string>& keys) {
  for (std::size_t i = from; i < s.size(); ++i) {
    if (!is_space(s[i])) continue;
    std::size_t j = i;
    while (j < s.size() && is_space(s[j])) ++j;
    for (const auto& k : keys) {
      if (s.substr(j, k.size()) == k && j + k.size() < s.size() &&
          s[j + k.size()] == '=') {
        return i;
      }
    }
  }
  return std::string_view::npos;
}

class LineParser {
 public:
  LineParser(const std::string& source, std::size_t line)
      : source_(source), line_(line) {}

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(source_, line_, message);
  }

  // Parses `key=value key=value` with the header grammar described in the
  // header file.
  std::map<std::string, std::string> attributes(
      std::string_view s, const std::vector<std::string>& keys) const {
    std::map<std::string, std::string> out;
    std::size_t i = 0;
    while (true) {
      while (i < s.size() && is_space(s[i])) ++i;
      if (i >= s.size()) break;
      std::size_t eq = s.find('=', i);
      if (eq == std::string_view::npos) {
        fail("column " + std::to_string(i + 1) + ": expected key=value");
      }
      std::string key(s.substr(i, eq - i));
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        fail("column " + std::to_string(i + 1) + ": unknown key '" + key +
             "'");
      }
      if (out.count(key)) fail("duplicate key '" + key + "'");
      std::size_t v = eq + 1;
      std::string value;
      if (v < s.size() && s[v] == '"') {
        std::size_t k = v + 1;
        bool closed = false;
        while (k < s.size()) {
          char c = s[k];
          if (c == '\\' && k + 1 < s.size()) {
            value += s[k + 1];
            k += 2;
            continue;
          }
          if (c == '"') {
            closed = true;
            ++k;
            break;
          }
          value += c;
          ++k;
        }
        if (!closed) {
          fail("column " + std::to_string(v + 1) + ": unterminated quote");
        }
        i = k;
      } else {
        std::size_t end = find_next_key(s, v, keys);
        std::size_t stop = end == std::string_view::npos ? s.size() : end;
        value = std::string(trim(s.substr(v, stop - v)));
        i = stop;
      }
      out.emplace(std::move(key), std::move(value));
    }
    return out;
  }

  AttributeValue value_line(std::string_view s) const {
    AttributeValue value;
    std::size_t i = 0;
    std::string raw;
    bool has_fields = false;
    for (; i < s.size(); ++i) {
      char c = s[i];
      if (c == '\\' && i + 1 < s.size() &&
          (s[i + 1] == '|' || s[i + 1] == '\\')) {
        raw += s[i + 1];
        ++i;
        continue;
      }
      if (c == '|') {
        has_fields = true;
        ++i;
        break;
      }
      raw += c;
    }
    value.text = std::string(trim(raw));
    if (value.text.empty()) fail("empty attribute value");
    if (!has_fields) return value;
    while (true) {
      while (i < s.size() && is_space(s[i])) ++i;
      if (i >= s.size()) break;
      std::size_t eq = s.find('=', i);
      if (eq == std::string_view::npos) {
        fail("column " + std::to_string(i + 1) + ": expected field=value");
      }
      std::string key(trim(s.substr(i, eq - i)));
      if (key.empty() ||
          key.find_first_of(" \t") != std::string::npos) {
        fail("column " + std::to_string(i + 1) + ": bad field name");
      }
      std::size_t v = eq + 1;
      std::string field_value;
      if (v < s.size() && s[v] == '"') {
        std::size_t k = v + 1;
        bool closed = false;
        while (k < s.size()) {
          if (s[k] == '\\' && k + 1 < s.size()) {
            field_value += s[k + 1];
            k += 2;
            continue;
          }
          if (s[k] == '"') {
            closed = true;
            ++k;
            break;
          }
          field_value += s[k++];
        }
        if (!closed) fail("unterminated quote in field '" + key + "'");
        i = k;
      } else {
        std::size_t k = v;
        while (k < s.size() && !is_space(s[k])) ++k;
        field_value = std::string(s.substr(v, k - v));
        i = k;
      }
      if (value.fields.count(key)) fail("duplicate field '" + key + "'");
      value.fields.emplace(std::move(key), std::move(field_value));
    }
    return value;
  }

 private:
  const std::string& source_;
  std::size_t line_;
};

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

std::string header_value(std::string_view v,
                         const std::vector<std::string>& keys) {
  bool safe = !v.empty() && trim(v) == v && v.front() != '"' &&
              find_next_key(v, 0, keys) == std::string_view::npos &&
              v.find('\n') == std::string_view::npos;
  return safe ? std::string(v) : quote(v);
}

std::string field_value(std::string_view v) {
  bool safe = !v.empty() && v.front() != '"' &&
              v.find_first_of(" \t\n") == std::string_view::npos;
  return safe ? std::string(v) : quote(v);
}

std::string value_line(const AttributeValue& value) {
  std::string out = "value: ";
  for (char c : value.text) {
    if (c == '|' || c == '\\') out += '\\';
    out += c;
  }
  if (!value.fields.empty()) {
    out += " |";
    for (const auto& [k, v] : value.fields) {
      out += ' ';
      out += k;
      out += '=';
      out += field_value(v);
    }
  }
  return out;
}

std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

void check_value_list(const std::vector<AttributeValue>& values,
                      const std::string& where) {
  if (values.empty()) throw ValidationError(where + " has no values");
  std::set<std::string> seen;
  for (const auto& v : values) {
    if (v.text.empty()) throw ValidationError(where + " has an empty value");
    if (!seen.insert(v.text).second) {
      throw ValidationError(where + " lists '" + v.text + "' twice");
    }
  }
}

}  // namespace

const std::vector<AttributeValue>& AttributeDimension::values_for(
    std::string_view class_name) const {
  if (kind == DimensionKind::kIndependent) return shared;
  auto it = per_class.find(std::string(class_name));
  if (it == per_class.end()) {
    throw ValidationError("dimension '" + name + "' has no values for class '" +
                          std::string(class_name) + "'");
  }
  return it->second;
}

const ClassLabel* AttributeSchema::find_class(std::string_view name) const {
  for (const auto& c : classes) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

const ClassLabel& AttributeSchema::class_by_name(std::string_view name) const {
  if (const ClassLabel* c = find_class(name)) return *c;
  throw ValidationError("unknown class '" + std::string(name) + "'");
}

const ClassLabel& AttributeSchema::class_by_id(int id) const {
  if (id < 0 || id >= static_cast<int>(classes.size())) {
    throw ValidationError("class id " + std::to_string(id) + " out of range");
  }
  return classes[static_cast<std::size_t>(id)];
}

const AttributeDimension* AttributeSchema::find_dimension(
    std::string_view name_or_key) const {
  for (const auto& d : dimensions) {
    if (d.name == name_or_key || d.key == name_or_key) return &d;
  }
  return nullptr;
}

std::string default_dimension_key(std::string_view name) {
  std::string key = text::to_lower(trim(name));
  std::replace(key.begin(), key.end(), ' ', '-');
  return key;
}

void validate_schema(const AttributeSchema& schema) {
  if (schema.classes.empty()) throw ValidationError("schema has no classes");
  std::set<std::string> names;
  for (std::size_t i = 0; i < schema.classes.size(); ++i) {
    const auto& c = schema.classes[i];
    if (c.id != static_cast<int>(i)) {
      throw ValidationError("class ids must be contiguous from 0; class '" +
                            c.name + "' has id " + std::to_string(c.id));
    }
    if (c.name.empty()) {
      throw ValidationError("class " + std::to_string(c.id) + " has no name");
    }
    if (!names.insert(c.name).second) {
      throw ValidationError("duplicate class name '" + c.name + "'");
    }
  }
  if (schema.dimensions.empty()) {
    throw ValidationError("schema has no dimensions");
  }
  std::set<std::string> dim_names;
  std::set<std::string> dim_keys;
  for (const auto& d : schema.dimensions) {
    if (d.name.empty()) throw ValidationError("dimension with empty name");
    if (!dim_names.insert(d.name).second) {
      throw ValidationError("duplicate dimension '" + d.name + "'");
    }
    if (d.key.empty() || !dim_keys.insert(d.key).second) {
      throw ValidationError("dimension '" + d.name +
                            "' has an empty or duplicate key '" + d.key + "'");
    }
    if (d.kind == DimensionKind::kIndependent) {
      if (!d.per_class.empty()) {
        throw ValidationError("independent dimension '" + d.name +
                              "' has per-class values");
      }
      check_value_list(d.shared, "dimension '" + d.name + "'");
      continue;
    }
    if (!d.shared.empty()) {
      throw ValidationError("dependent dimension '" + d.name +
                            "' has values outside a class block");
    }
    for (const auto& [cls, values] : d.per_class) {
      if (!names.count(cls)) {
        throw ValidationError("dimension '" + d.name +
                              "' lists values for unknown class '" + cls +
                              "'");
      }
      check_value_list(values,
                       "dimension '" + d.name + "' for class '" + cls + "'");
    }
    for (const auto& c : schema.classes) {
      if (!d.per_class.count(c.name)) {
        throw ValidationError("dimension '" + d.name +
                              "' is missing values for class '" + c.name +
                              "'");
      }
    }
  }
  for (const auto& [cls, others] : schema.similar) {
    if (!names.count(cls)) {
      throw ValidationError("similar-class list for unknown class '" + cls +
                            "'");
    }
    for (const auto& o : others) {
      if (!names.count(o) || o == cls) {
        throw ValidationError("similar-class list of '" + cls +
                              "' names invalid class '" + o + "'");
      }
    }
  }
}

AttributeSchema parse_schema(std::string_view content,
                             const std::string& source) {
  AttributeSchema schema;
  bool have_task = false;
  AttributeDimension* dim = nullptr;
  std::string current_class;
  auto lines = text::split_lines(content);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    LineParser p(source, n + 1);
    std::string_view line = trim(lines[n]);
    if (line.empty() || line.front() == '#') continue;

    if (line.front() == '[') {
      std::size_t close = line.find(']');
      if (close == std::string_view::npos) p.fail("unterminated section");
      std::string_view section = line.substr(1, close - 1);
      std::string_view rest = line.substr(close + 1);
      if (section == "task") {
        if (have_task) p.fail("second [task] section");
        auto attrs = p.attributes(rest, kTaskKeys);
        if (!attrs.count("name")) p.fail("[task] requires name=");
        schema.task_name = attrs["name"];
        schema.persona = attrs["persona"];
        have_task = true;
        dim = nullptr;
      } else if (section == "class") {
        auto attrs = p.attributes(rest, kClassKeys);
        if (!attrs.count("id") || !attrs.count("name")) {
          p.fail("[class] requires id= and name=");
        }
        auto id = parse_int(attrs["id"]);
        if (!id || *id < 0) p.fail("bad class id '" + attrs["id"] + "'");
        schema.classes.push_back({*id, attrs["name"]});
        dim = nullptr;
      } else if (section == "dimension") {
        auto attrs = p.attributes(rest, kDimensionKeys);
        if (!attrs.count("name") || !attrs.count("kind")) {
          p.fail("[dimension] requires name= and kind=");
        }
        AttributeDimension d;
        d.name = attrs["name"];
        d.key = attrs.count("key") ? attrs["key"]
                                   : default_dimension_key(d.name);
        if (attrs["kind"] == "independent") {
          d.kind = DimensionKind::kIndependent;
        } else if (attrs["kind"] == "dependent") {
          d.kind = DimensionKind::kDependent;
        } else {
          p.fail("kind must be independent or dependent, got '" +
                 attrs["kind"] + "'");
        }
        schema.dimensions.push_back(std::move(d));
        dim = &schema.dimensions.back();
        current_class.clear();
      } else if (section == "similar") {
        auto attrs = p.attributes(rest, kSimilarKeys);
        if (!attrs.count("class")) p.fail("[similar] requires class=");
        std::vector<std::string> others;
        for (const auto& part : text::split(attrs["classes"], ';')) {
          std::string_view t = trim(part);
          if (!t.empty()) others.emplace_back(t);
        }
        if (schema.similar.count(attrs["class"])) {
          p.fail("second [similar] section for '" + attrs["class"] + "'");
        }
        schema.similar[attrs["class"]] = std::move(others);
        dim = nullptr;
      } else {
        p.fail("unknown section [" + std::string(section) + "]");
      }
      continue;
    }

    if (line.substr(0, 6) == "class:") {
      if (!dim) p.fail("class: outside a dimension");
      if (dim->kind != DimensionKind::kDependent) {
        p.fail("class: inside independent dimension '" + dim->name + "'");
      }
      current_class = std::string(trim(line.substr(6)));
      if (current_class.empty()) p.fail("class: needs a class name");
      if (dim->per_class.count(current_class)) {
        p.fail("second block for class '" + current_class +
               "' in dimension '" + dim->name + "'");
      }
      dim->per_class[current_class];
      continue;
    }

    if (line.substr(0, 6) == "value:") {
      if (!dim) p.fail("value: outside a dimension");
      AttributeValue v = p.value_line(line.substr(6));
      if (dim->kind == DimensionKind::kIndependent) {
        dim->shared.push_back(std::move(v));
      } else {
        if (current_class.empty()) {
          p.fail("value: before any class: in dependent dimension '" +
                 dim->name + "'");
        }
        dim->per_class[current_class].push_back(std::move(v));
      }
      continue;
    }

    p.fail("unrecognized line");
  }
  if (!have_task) throw ParseError(source, 0, "missing [task] section");
  std::stable_sort(
      schema.classes.begin(), schema.classes.end(),
      [](const ClassLabel& a, const ClassLabel& b) { return a.id < b.id; });
  validate_schema(schema);
  return schema;
}

AttributeSchema load_schema(const std::filesystem::path& path) {
  return parse_schema(io::read_file(path), path.string());
}

std::string format_schema(const AttributeSchema& schema) {
  std::string out;
  out += "[task] name=" + header_value(schema.task_name, kTaskKeys);
  if (!schema.persona.empty()) {
    out += " persona=" + header_value(schema.persona, kTaskKeys);
  }
  out += "\n\n";
  for (const auto& c : schema.classes) {
    out += "[class] id=" + std::to_string(c.id) +
           " name=" + header_value(c.name, kClassKeys) + "\n";
  }
  for (const auto& d : schema.dimensions) {
    out += "\n[dimension] name=" + header_value(d.name, kDimensionKeys);
    if (d.key != default_dimension_key(d.name)) {
      out += " key=" + header_value(d.key, kDimensionKeys);
    }
    out += d.kind == DimensionKind::kIndependent ? " kind=independent\n"
                                                 : " kind=dependent\n";
    if (d.kind == DimensionKind::kIndependent) {
      for (const auto& v : d.shared) out += value_line(v) + "\n";
      continue;
    }
    // Class blocks follow class-id order; stray names (invalid schemas) last.
    std::set<std::string> written;
    for (const auto& c : schema.classes) {
      auto it = d.per_class.find(c.name);
      if (it == d.per_class.end()) continue;
      out += "class: " + c.name + "\n";
      for (const auto& v : it->second) out += value_line(v) + "\n";
      written.insert(c.name);
    }
    for (const auto& [cls, values] : d.per_class) {
      if (written.count(cls)) continue;
      out += "class: " + cls + "\n";
      for (const auto& v : values) out += value_line(v) + "\n";
    }
  }
  if (!schema.similar.empty()) out += "\n";
  for (const auto& [cls, others] : schema.similar) {
    out += "[similar] class=" + header_value(cls, kSimilarKeys) +
           " classes=" + quote(text::join(others, ";")) + "\n";
  }
  return out;
}

void save_schema(const AttributeSchema& schema,
                 const std::filesystem::path& path) {
  io::write_file(path, format_schema(schema));
}

std::uint64_t count_configurations(const AttributeSchema& schema,
                                   const ClassLabel& label) {
  std::uint64_t product = 1;
  for (const auto& d : schema.dimensions) {
    std::uint64_t n = d.values_for(label.name).size();
    if (n != 0 && product > std::numeric_limits<std::uint64_t>::max() / n) {
      throw ValidationError("configuration count overflows 64 bits");
    }
    product *= n;
  }
  return product;
}

}  // namespace attrgen
