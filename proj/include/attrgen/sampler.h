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

// Random attribute configurations, label-set sampling for multi-label
// generation, and fuzzy merging of subtopics shared between classes.

#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "attrgen/rng.h"
#include "attrgen/schema.h"

namespace attrgen {

struct Assignment {
  std::string dimension;  // dimension name
  std::string key;        // template key
  AttributeValue value;

  bool operator==(const Assignment&) const = default;
};

struct AttributeConfiguration {
  // One id for multi-class generation; the sorted label set otherwise.
  std::vector<int> labels;
  // One entry per schema dimension, in schema order.
  std::vector<Assignment> assignments;

  // Lookup by dimension name or key; nullptr when absent.
  const Assignment* find(std::string_view name_or_key) const;

  bool operator==(const AttributeConfiguration&) const = default;
};

// Draws each dimension's value independently and uniformly from the list
// applicable to `label`, in schema dimension order (one draw per dimension).
AttributeConfiguration sample_configuration(const AttributeSchema& schema,
                                            const ClassLabel& label, Rng& rng);

struct LabelCountDistribution {
  std::map<int, double> histogram;  // label count -> probability
  std::string source;

  void validate() const;
  int max_count() const;
};

// Histogram of distinct-label counts, normalised to probabilities.
LabelCountDistribution estimate_label_count_distribution(
    std::span<const std::vector<int>> reference_label_sets,
    std::string source = {});

// Draws n from `dist` (inverse CDF on one uniform draw), then a uniform
// n-subset of `classes` without replacement. The result keeps the order of
// `classes`.
std::vector<std::string> sample_label_set(const LabelCountDistribution& dist,
                                          std::span<const std::string> classes,
                                          Rng& rng);

struct MergePolicy {
  int threshold = 90;

  void validate() const;
};

// 100 * (1 - lev(a', b') / max(|a'|, |b'|)) rounded half-up, where a', b'
// are lowercased, whitespace-collapsed code-point strings. Two empty
// strings score 100.
int fuzzy_score(std::string_view a, std::string_view b);

struct SubtopicGroup {
  std::string representative;        // lexicographically smallest member
  std::vector<std::string> members;  // sorted, distinct
  std::set<std::string> classes;

  bool operator==(const SubtopicGroup&) const = default;
};

// Groups subtopics by the transitive closure of pairs scoring >= threshold.
// Identical texts from different classes are one subtopic. Keyed by the
// group representative.
std::map<std::string, SubtopicGroup> merge_subtopics(
    const std::map<std::string, std::vector<std::string>>& per_class_subtopics,
    const MergePolicy& policy);

}  // namespace attrgen
