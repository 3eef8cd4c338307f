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


// Dataset generation: sampling, prompt rendering, provider fan-out with a
// spending cap, post-processing, provenance and the dataset file format.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "attrgen/promptgen.h"
#include "attrgen/provider.h"
#include "attrgen/sampler.h"
#include "attrgen/schema.h"

namespace attrgen {

struct GenerationJob {
  AttributeSchema schema;
  PromptMode mode = PromptMode::kAttr;
  std::optional<PromptTemplate> sim_template;   // sim and meta modes
  std::optional<PromptTemplate> attr_template;  // attr mode
  std::size_t per_class = 1;
  GenerationParams params;
  std::uint64_t seed = 0;
  std::optional<double> budget_cap;
  int retry_empty = 3;   // re-queries of a prompt whose answer is empty
  int max_refills = 3;   // fresh configurations tried after that
  std::size_t max_in_flight = 4;
  // Multi-label attr mode: the dimension the merged subtopics belong to.
  // Defaults to the first class-dependent dimension.
  std::string subtopic_dimension;

  void validate() const;  // throws PreconditionError / ValidationError
};

struct Provenance {
  std::string prompt;
  std::string mode;
  std::vector<int> labels;
  std::vector<std::string> class_names;
  std::optional<AttributeConfiguration> configuration;
  std::vector<std::string> similar;
  std::string meta_description;
  std::string model;
  std::uint64_t prompt_tokens = 0;
  std::uint64_t completion_tokens = 0;
  std::string rng;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::uint64_t draw = 0;  // stream position before this example's draws

  bool operator==(const Provenance&) const = default;
};

struct GeneratedExample {
  std::vector<int> labels;
  bool multi_label = false;
  std::string text;
  Provenance provenance;
};

struct FailedSlot {
  std::vector<int> labels;
  std::size_t slot = 0;
  std::string error;
};

struct Dataset {
  std::vector<GeneratedExample> examples;
  std::vector<FailedSlot> failures;
  bool partial = false;  // the spending cap stopped the run
  CostSnapshot cost;
};

// Trims, trims every line, collapses runs of blank lines into one and
// strips one leading list marker ("1.", "1)", "-", "*", "•"). Returns
// nullopt for text that ends up empty.
std::optional<std::string> postprocess(std::string_view raw);

// The first request of every slot, without calling a provider. Meta-mode
// prompts are the base prompts (the task description is unknown).
struct PlannedRequest {
  std::vector<int> labels;
  std::string prompt;
  Provenance provenance;
};
std::vector<PlannedRequest> plan_requests(const GenerationJob& job);

// Multi-class generation: per_class examples for every class, in class-id
// then sampling order. Each class draws from its own stream
// Rng(seed).split(class id). A request is dispatched only when the money
// already spent plus the worst case of everything in flight stays within
// the cap; the first request that does not fit ends the run as partial.
Dataset generate_dataset(const GenerationJob& job, Provider& provider);

// Multi-label generation of per_class * C examples from stream
// Rng(seed).split(0). Sim mode samples a label set from `dist`; attr mode
// picks a merged subtopic group uniformly and uses its classes as labels.
Dataset generate_multilabel_dataset(
    const GenerationJob& job, const LabelCountDistribution& dist,
    const std::map<std::string, SubtopicGroup>& merged, Provider& provider);

// --- dataset files ----------------------------------------------------------

// One line per example: {"label": 3, "text": "..."} or
// {"label": [1, 4], "text": "..."}.
struct DatasetRecord {
  std::vector<int> labels;
  bool multi_label = false;
  std::string text;

  bool operator==(const DatasetRecord&) const = default;
};

std::string format_record(const DatasetRecord& record);
DatasetRecord parse_record(std::string_view line, const std::string& source,
                           std::size_t line_no);
void write_records(const std::vector<DatasetRecord>& records,
                   const std::filesystem::path& path);
std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path);

// <dataset path>.provenance.jsonl
std::filesystem::path provenance_path(const std::filesystem::path& dataset);

std::string format_provenance(const Provenance& p, std::size_t line);
Provenance parse_provenance(std::string_view line, const std::string& source,
                            std::size_t line_no);
std::vector<Provenance> load_provenance(const std::filesystem::path& path);

// Writes the dataset and its provenance sidecar.
void emit_dataset(const Dataset& dataset, const std::filesystem::path& path);

}  // namespace attrgen
