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

#include "attrgen/sampler.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "attrgen/error.h"
#include "attrgen/text.h"

namespace attrgen {

const Assignment* AttributeConfiguration::find(
    std::string_view name_or_key) const {
  for (const auto& a : assignments) {
    if (a.dimension == name_or_key || a.key == name_or_key) return &a;
  }
  return nullptr;
}

AttributeConfiguration sample_configuration(const AttributeSchema& schema,
                                            const ClassLabel& label,
                                            Rng& rng) {
  if (schema.find_class(label.name) == nullptr) {
    throw PreconditionError("class '" + label.name + "' is not in the schema");
  }
  AttributeConfiguration config;
  config.labels = {label.id};
  config.assignments.reserve(schema.dimensions.size());
  for (const auto& d : schema.dimensions) {
    const auto& values = d.values_for(label.name);
    if (values.empty()) {
      throw ValidationError("dimension '" + d.name + "' has no values for '" +
                            label.name + "'");
    }
    const auto& v = values[rng.uniform(values.size())];
    config.assignments.push_back({d.name, d.key, v});
  }
  return config;
}

// --- label counts -----------------------------------------------------------

void LabelCountDistribution::validate() const {
  if (histogram.empty()) {
    throw ValidationError("label-count distribution is empty");
  }
  double sum = 0.0;
  for (const auto& [n, p] : histogram) {
    if (n < 1) throw ValidationError("label counts must be >= 1");
    if (!(p >= 0.0)) throw ValidationError("negative label-count probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError("label-count probabilities sum to " +
                          std::to_string(sum));
  }
}

int LabelCountDistribution::max_count() const {
  int m = 0;
  for (const auto& [n, p] : histogram) {
    if (p > 0.0) m = std::max(m, n);
  }
  return m;
}

LabelCountDistribution estimate_label_count_distribution(
    std::span<const std::vector<int>> reference_label_sets,
    std::string source) {
  if (reference_label_sets.empty()) {
    throw PreconditionError("label-count estimation needs at least one set");
  }
  std::map<int, std::size_t> counts;
  for (const auto& set : reference_label_sets) {
    std::set<int> distinct(set.begin(), set.end());
    if (distinct.empty()) {
      throw PreconditionError("reference label sets must be non-empty");
    }
    ++counts[static_cast<int>(distinct.size())];
  }
  LabelCountDistribution dist;
  dist.source = std::move(source);
  const double total = static_cast<double>(reference_label_sets.size());
  for (const auto& [n, c] : counts) {
    dist.histogram[n] = static_cast<double>(c) / total;
  }
  return dist;
}

std::vector<std::string> sample_label_set(const LabelCountDistribution& dist,
                                          std::span<const std::string> classes,
                                          Rng& rng) {
  dist.validate();
  if (dist.max_count() > static_cast<int>(classes.size())) {
    throw PreconditionError("label count " + std::to_string(dist.max_count()) +
                            " exceeds the " + std::to_string(classes.size()) +
                            " available classes");
  }
  double u = rng.uniform_real();
  int n = dist.max_count();
  double cumulative = 0.0;
  for (const auto& [count, p] : dist.histogram) {
    cumulative += p;
    if (p > 0.0 && u < cumulative) {
      n = count;
      break;
    }
  }
  // Partial Fisher-Yates over indices.
  std::vector<std::size_t> idx(classes.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < n; ++i) {
    std::size_t j = static_cast<std::size_t>(i) +
                    rng.uniform(idx.size() - static_cast<std::size_t>(i));
    std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
  }
  std::vector<std::size_t> chosen(idx.begin(), idx.begin() + n);
  std::sort(chosen.begin(), chosen.end());
  std::vector<std::string> out;
  out.reserve(chosen.size());
  for (std::size_t i : chosen) out.push_back(classes[i]);
  return out;
}

// --- fuzzy merge ------------------------------------------------------------

void MergePolicy::validate() const {
  if (threshold < 0 || threshold > 100) {
    throw ValidationError("merge threshold must be in [0, 100]");
  }
}

namespace {

std::size_t levenshtein(const std::u32string& a, const std::u32string& b) {
  const std::u32string& s = a.size() < b.size() ? a : b;
  const std::u32string& t = a.size() < b.size() ? b : a;
  std::vector<std::size_t> row(s.size() + 1);
  std::iota(row.begin(), row.end(), 0);
  for (std::size_t i = 1; i <= t.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= s.size(); ++j) {
      std::size_t up = row[j];
      std::size_t cost = t[i - 1] == s[j - 1] ? 0 : 1;
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + cost});
      diag = up;
    }
  }
  return row[s.size()];
}

int score_normalized(const std::u32string& a, const std::u32string& b) {
  std::size_t m = std::max(a.size(), b.size());
  if (m == 0) return 100;
  std::size_t d = levenshtein(a, b);
  // round(100 * (m - d) / m), half-up, in integers.
  return static_cast<int>((200 * (m - d) + m) / (2 * m));
}

std::u32string normalized(std::string_view s) {
  return text::utf8_decode(text::normalize_space(s));
}

}  // namespace

int fuzzy_score(std::string_view a, std::string_view b) {
  return score_normalized(normalized(a), normalized(b));
}

std::map<std::string, SubtopicGroup> merge_subtopics(
    const std::map<std::string, std::vector<std::string>>& per_class_subtopics,
    const MergePolicy& policy) {
  policy.validate();
  // Distinct subtopic texts and the classes listing each.
  std::map<std::string, std::set<std::string>> owners;
  for (const auto& [cls, subtopics] : per_class_subtopics) {
    for (const auto& s : subtopics) owners[s].insert(cls);
  }
  std::vector<std::string> texts;
  texts.reserve(owners.size());
  for (const auto& [t, _] : owners) texts.push_back(t);
  std::vector<std::u32string> norm;
  norm.reserve(texts.size());
  for (const auto& t : texts) norm.push_back(normalized(t));

  std::vector<std::size_t> parent(texts.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };

  const auto threshold = static_cast<std::size_t>(policy.threshold);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    for (std::size_t j = i + 1; j < texts.size(); ++j) {
      std::size_t ri = find(i);
      std::size_t rj = find(j);
      if (ri == rj) continue;
      // lev >= |len difference|, so the score is bounded by the lengths.
      std::size_t m = std::max(norm[i].size(), norm[j].size());
      std::size_t diff = m - std::min(norm[i].size(), norm[j].size());
      if (m > 0 && (200 * (m - diff) + m) / (2 * m) < threshold) continue;
      if (static_cast<std::size_t>(score_normalized(norm[i], norm[j])) >=
          threshold) {
        parent[std::max(ri, rj)] = std::min(ri, rj);
      }
    }
  }

  std::map<std::size_t, SubtopicGroup> by_root;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    SubtopicGroup& g = by_root[find(i)];
    g.members.push_back(texts[i]);  // texts are sorted, so members stay sorted
    g.classes.insert(owners[texts[i]].begin(), owners[texts[i]].end());
  }
  std::map<std::string, SubtopicGroup> out;
  for (auto& [root, g] : by_root) {
    g.representative = g.members.front();
    out.emplace(g.representative, std::move(g));
  }
  return out;
}

}  // namespace attrgen
