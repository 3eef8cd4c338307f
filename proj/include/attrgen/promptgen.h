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

// Prompt templates and their rendering.
//
// Template files are UTF-8 text. Leading lines starting with "##" are
// directives or comments ("## mode: attr"); the rest is the body, with the
// final newline removed. Placeholders:
//
//   {class}              class name (label names joined by ", " for sets)
//   {persona}            the schema persona line
//   {<dim>}              value text of the dimension with that key or name
//   {<dim>:<field>}      a field of a compound value, e.g. {length:min-words}
//   {similar-classes}    similar class names joined by ", "
//                        ({similar-class} is accepted as a synonym)
//
// "{{" and "}}" are literal braces. Any other brace is an error.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "attrgen/provider.h"
#include "attrgen/sampler.h"

namespace attrgen {

enum class PromptMode { kSim, kAttr, kMeta };

std::string_view mode_name(PromptMode mode);
PromptMode parse_mode(std::string_view name);  // throws PreconditionError

struct Placeholder {
  std::string name;
  std::string field;  // empty unless {name:field}

  std::string spelled() const;  // "name" or "name:field"
  bool operator==(const Placeholder&) const = default;
};

class PromptTemplate {
 public:
  PromptTemplate(PromptMode mode, std::string body);

  static PromptTemplate parse(std::string_view content,
                              const std::string& source,
                              std::optional<PromptMode> mode = std::nullopt);
  static PromptTemplate load(const std::filesystem::path& path,
                             std::optional<PromptMode> mode = std::nullopt);

  PromptMode mode() const { return mode_; }
  const std::string& body() const { return body_; }
  std::vector<Placeholder> placeholders() const;
  bool uses(std::string_view name) const;

  struct Segment {
    std::string literal;
    std::optional<Placeholder> placeholder;
  };
  const std::vector<Segment>& segments() const { return segments_; }

 private:
  PromptMode mode_;
  std::string body_;
  std::vector<Segment> segments_;
};

// Conventional location: <dir>/<task>.<mode>.tmpl
std::filesystem::path template_path(const std::filesystem::path& dir,
                                    std::string_view task, PromptMode mode);

struct RenderInputs {
  std::string class_name;
  std::string persona;
  const AttributeConfiguration* configuration = nullptr;
  const std::vector<std::string>* similar = nullptr;
};

// Substitutes every placeholder; throws RenderError naming the first one
// that cannot be resolved.
std::string render(const PromptTemplate& tmpl, const RenderInputs& inputs);

// Sim (or meta base) rendering from the class name alone.
std::string render_sim(const PromptTemplate& tmpl, std::string_view class_name,
                       std::string_view persona = {});

std::string render_attr(const PromptTemplate& tmpl,
                        std::string_view class_name,
                        const AttributeConfiguration& configuration,
                        const std::vector<std::string>* similar = nullptr,
                        std::string_view persona = {});

// "<base without one trailing '.'>. What does this task ask us to do?"
std::string meta_query(std::string_view base_prompt);

// Asks the provider what the task requires and returns
// "<description>\n\n<base>". An empty answer returns the base prompt and
// logs a warning.
std::string render_meta(std::string_view base_prompt, Provider& provider,
                        const GenerationParams& params = {});

}  // namespace attrgen
