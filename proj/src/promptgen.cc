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


#include "attrgen/promptgen.h"

#include "attrgen/error.h"
#include "attrgen/io.h"
#include "attrgen/log.h"
#include "attrgen/text.h"

namespace attrgen {

std::string_view mode_name(PromptMode mode) {
  switch (mode) {
    case PromptMode::kSim:
      return "sim";
    case PromptMode::kAttr:
      return "attr";
    case PromptMode::kMeta:
      return "meta";
  }
  return "?";
}

PromptMode parse_mode(std::string_view name) {
  if (name == "sim") return PromptMode::kSim;
  if (name == "attr") return PromptMode::kAttr;
  if (name == "meta") return PromptMode::kMeta;
  throw PreconditionError("unknown prompt mode '" + std::string(name) +
                          "' (expected sim, attr or meta)");
}

std::string Placeholder::spelled() const {
  return field.empty() ? name : name + ":" + field;
}

namespace {

std::vector<PromptTemplate::Segment> split_segments(std::string_view body,
                                                    const std::string& source,
                                                    std::size_t first_line) {
  std::vector<PromptTemplate::Segment> out;
  std::string literal;
  std::size_t line = first_line;
  for (std::size_t i = 0; i < body.size(); ++i) {
    char c = body[i];
    if (c == '\n') ++line;
    if (c == '{' && i + 1 < body.size() && body[i + 1] == '{') {
      literal += '{';
      ++i;
      continue;
    }
    if (c == '}' && i + 1 < body.size() && body[i + 1] == '}') {
      literal += '}';
      ++i;
      continue;
    }
    if (c == '}') throw ParseError(source, line, "unbalanced '}'");
    if (c != '{') {
      literal += c;
      continue;
    }
    std::size_t close = i + 1;
    while (close < body.size() && body[close] != '}') {
      if (body[close] == '{' || body[close] == '\n') {
        throw ParseError(source, line, "unbalanced '{'");
      }
      ++close;
    }
    if (close == body.size()) throw ParseError(source, line, "unbalanced '{'");
    std::string_view inner = text::trim(body.substr(i + 1, close - i - 1));
    Placeholder p;
    std::size_t colon = inner.find(':');
    p.name = std::string(text::trim(inner.substr(0, colon)));
    if (colon != std::string_view::npos) {
      p.field = std::string(text::trim(inner.substr(colon + 1)));
      if (p.field.empty()) throw ParseError(source, line, "empty field name");
    }
    if (p.name.empty()) throw ParseError(source, line, "empty placeholder");
    out.push_back({std::move(literal), std::move(p)});
    literal.clear();
    i = close;
  }
  if (!literal.empty()) out.push_back({std::move(literal), std::nullopt});
  return out;
}

}  // namespace

PromptTemplate::PromptTemplate(PromptMode mode, std::string body)
    : mode_(mode), body_(std::move(body)) {
  segments_ = split_segments(body_, "<template>", 1);
}

PromptTemplate PromptTemplate::parse(std::string_view content,
                                     const std::string& source,
                                     std::optional<PromptMode> mode) {
  auto lines = text::split_lines(content);
  std::size_t i = 0;
  std::optional<PromptMode> declared;
  for (; i < lines.size(); ++i) {
    std::string_view l = lines[i];
    if (l.substr(0, 2) != "##") break;
    std::string_view d = text::trim(l.substr(2));
    if (text::starts_with_ci(d, "mode:")) {
      try {
        declared = parse_mode(text::trim(d.substr(5)));
      } catch (const PreconditionError& e) {
        throw ParseError(source, i + 1, e.what());
      }
    }
  }
  if (mode && declared && *mode != *declared) {
    throw ParseError(source, 1,
                     "template declares mode '" +
                         std::string(mode_name(*declared)) + "', expected '" +
                         std::string(mode_name(*mode)) + "'");
  }
  std::string body;
  for (std::size_t j = i; j < lines.size(); ++j) {
    if (j > i) body += '\n';
    body += lines[j];
  }
  while (!body.empty() && body.back() == '\n') body.pop_back();
  PromptMode m = mode ? *mode : declared.value_or(PromptMode::kSim);
  PromptTemplate t(m, std::string());
  t.body_ = std::move(body);
  t.segments_ = split_segments(t.body_, source, i + 1);
  return t;
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& path,
                                    std::optional<PromptMode> mode) {
  return parse(io::read_file(path), path.string(), mode);
}

std::vector<Placeholder> PromptTemplate::placeholders() const {
  std::vector<Placeholder> out;
  for (const auto& s : segments_) {
    if (s.placeholder) out.push_back(*s.placeholder);
  }
  return out;
}

bool PromptTemplate::uses(std::string_view name) const {
  for (const auto& s : segments_) {
    if (s.placeholder && s.placeholder->name == name) return true;
  }
  return false;
}

std::filesystem::path template_path(const std::filesystem::path& dir,
                                    std::string_view task, PromptMode mode) {
  return dir / (std::string(task) + "." + std::string(mode_name(mode)) +
                ".tmpl");
}

namespace {

std::string resolve(const Placeholder& p, const RenderInputs& in) {
  auto no_field = [&] {
    if (!p.field.empty()) {
      throw RenderError(p.spelled(),
                        "placeholder '" + p.spelled() + "' takes no field");
    }
  };
  if (p.name == "class") {
    no_field();
    if (in.class_name.empty()) {
      throw RenderError(p.name, "no class name for placeholder 'class'");
    }
    return in.class_name;
  }
  if (p.name == "persona") {
    no_field();
    if (in.persona.empty()) {
      throw RenderError(p.name, "placeholder 'persona' needs a persona");
    }
    return in.persona;
  }
  if (p.name == "similar-classes" || p.name == "similar-class") {
    no_field();
    if (in.similar == nullptr || in.similar->empty()) {
      throw RenderError(p.name, "placeholder '" + p.name +
                                    "' needs a similar-class list");
    }
    return text::join(*in.similar, ", ");
  }
  const Assignment* a =
      in.configuration ? in.configuration->find(p.name) : nullptr;
  if (a == nullptr) {
    throw RenderError(p.name, "unresolved placeholder '" + p.name + "'");
  }
  if (p.field.empty()) return a->value.text;
  auto it = a->value.fields.find(p.field);
  if (it == a->value.fields.end()) {
    throw RenderError(p.spelled(), "value '" + a->value.text +
                                       "' has no field '" + p.field +
                                       "' for placeholder '" + p.spelled() +
                                       "'");
  }
  return it->second;
}

}  // namespace

std::string render(const PromptTemplate& tmpl, const RenderInputs& inputs) {
  std::string out;
  for (const auto& s : tmpl.segments()) {
    out += s.literal;
    if (s.placeholder) out += resolve(*s.placeholder, inputs);
  }
  return out;
}

std::string render_sim(const PromptTemplate& tmpl, std::string_view class_name,
                       std::string_view persona) {
  if (tmpl.mode() == PromptMode::kAttr) {
    throw PreconditionError("render_sim needs a sim or meta template");
  }
  RenderInputs in;
  in.class_name = std::string(class_name);
  in.persona = std::string(persona);
  return render(tmpl, in);
}

std::string render_attr(const PromptTemplate& tmpl,
                        std::string_view class_name,
                        const AttributeConfiguration& configuration,
                        const std::vector<std::string>* similar,
                        std::string_view persona) {
  if (tmpl.mode() != PromptMode::kAttr) {
    throw PreconditionError("render_attr needs an attr template");
  }
  RenderInputs in;
  in.class_name = std::string(class_name);
  in.persona = std::string(persona);
  in.configuration = &configuration;
  in.similar = similar;
  return render(tmpl, in);
}

std::string meta_query(std::string_view base_prompt) {
  std::string_view b = text::trim(base_prompt);
  if (!b.empty() && b.back() == '.') b.remove_suffix(1);
  return std::string(b) + ". What does this task ask us to do?";
}

std::string render_meta(std::string_view base_prompt, Provider& provider,
                        const GenerationParams& params) {
  if (text::trim(base_prompt).empty()) {
    throw PreconditionError("meta prompt needs a non-empty base prompt");
  }
  CompletionResult r = provider.complete(meta_query(base_prompt), params);
  std::string_view description = text::trim(r.text);
  if (description.empty()) {
    log::warn("meta prompt: empty task description; using the base prompt");
    return std::string(base_prompt);
  }
  return std::string(description) + "\n\n" + std::string(base_prompt);
}

}  // namespace attrgen
