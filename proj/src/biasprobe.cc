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


#include "attrgen/biasprobe.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <json.hpp>

#include "attrgen/error.h"
#include "attrgen/log.h"
#include "attrgen/text.h"

namespace attrgen::bias {

double AttributeClassifier::prior(std::size_t v) const {
  return static_cast<double>(doc_counts_.at(v)) / static_cast<double>(docs_);
}

double AttributeClassifier::token_probability(std::size_t v,
                                              std::string_view token) const {
  auto it = vocab_.find(std::string(token));
  double count = it == vocab_.end()
                     ? 0.0
                     : static_cast<double>(token_counts_.at(v)[it->second]);
  return (count + alpha_) /
         (static_cast<double>(token_totals_.at(v)) +
          alpha_ * static_cast<double>(vocab_.size()));
}

std::vector<std::string> AttributeClassifier::vocabulary() const {
  std::vector<std::string> out;
  out.reserve(vocab_.size());
  for (const auto& [t, i] : vocab_) out.push_back(t);
  std::sort(out.begin(), out.end());
  return out;
}

AttributeClassifier train_attribute_classifier(
    std::string dimension, const std::vector<LabeledText>& examples,
    double alpha) {
  if (!(alpha > 0.0)) throw PreconditionError("alpha must be > 0");
  std::set<std::string> values;
  for (const auto& e : examples) {
    if (e.value != kUnknown) values.insert(e.value);
  }
  if (values.size() < 2) {
    throw PreconditionError("attribute classifier needs at least two "
                            "distinct values, got " +
                            std::to_string(values.size()));
  }
  AttributeClassifier c;
  c.dimension_ = std::move(dimension);
  c.alpha_ = alpha;
  c.values_.assign(values.begin(), values.end());
  c.doc_counts_.assign(c.values_.size(), 0);
  c.token_totals_.assign(c.values_.size(), 0);
  c.token_counts_.assign(c.values_.size(), {});
  // Vocabulary indices follow sorted token order so the model does not
  // depend on example order.
  std::set<std::string> tokens;
  for (const auto& e : examples) {
    if (e.value == kUnknown) continue;
    for (auto& t : text::tokenize(e.text)) tokens.insert(std::move(t));
  }
  std::size_t next = 0;
  for (const auto& t : tokens) c.vocab_.emplace(t, next++);
  for (auto& row : c.token_counts_) row.assign(c.vocab_.size(), 0);
  for (const auto& e : examples) {
    if (e.value == kUnknown) continue;
    auto v = static_cast<std::size_t>(
        std::lower_bound(c.values_.begin(), c.values_.end(), e.value) -
        c.values_.begin());
    ++c.doc_counts_[v];
    ++c.docs_;
    for (const auto& t : text::tokenize(e.text)) {
      ++c.token_counts_[v][c.vocab_.at(t)];
      ++c.token_totals_[v];
    }
  }
  return c;
}

Prediction predict_attribute(const AttributeClassifier& c,
                             std::string_view input) {
  const std::size_t V = c.values_.size();
  std::vector<double> score(V);
  for (std::size_t v = 0; v < V; ++v) score[v] = std::log(c.prior(v));
  const double vocab = static_cast<double>(c.vocab_.size());
  for (const auto& t : text::tokenize(input)) {
    auto it = c.vocab_.find(t);
    if (it == c.vocab_.end()) continue;
    for (std::size_t v = 0; v < V; ++v) {
      score[v] += std::log(
          (static_cast<double>(c.token_counts_[v][it->second]) + c.alpha_) /
          (static_cast<double>(c.token_totals_[v]) + c.alpha_ * vocab));
    }
  }
  std::size_t best = 0;
  for (std::size_t v = 1; v < V; ++v) {
    if (score[v] > score[best]) best = v;
  }
  double norm = 0.0;
  for (double s : score) norm += std::exp(s - score[best]);
  Prediction p;
  p.value = c.values_[best];
  for (std::size_t v = 0; v < V; ++v) {
    p.posterior[c.values_[v]] = std::exp(score[v] - score[best]) / norm;
  }
  return p;
}

AttributeDistributionReport distribution_report(
    const AttributeClassifier& classifier,
    const std::vector<std::string>& texts,
    const std::vector<std::vector<int>>& labels) {
  if (texts.empty()) throw PreconditionError("dataset is empty");
  if (!labels.empty() && labels.size() != texts.size()) {
    throw PreconditionError("labels and texts differ in length");
  }
  std::map<std::string, std::uint64_t> overall;
  std::map<int, std::map<std::string, std::uint64_t>> per_class;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    std::string v = predict_attribute(classifier, texts[i]).value;
    ++overall[v];
    if (labels.empty()) continue;
    for (int l : std::set<int>(labels[i].begin(), labels[i].end())) {
      ++per_class[l][v];
    }
  }
  auto normalise = [](const std::map<std::string, std::uint64_t>& counts) {
    std::uint64_t total = 0;
    for (const auto& [v, n] : counts) total += n;
    std::map<std::string, double> out;
    for (const auto& [v, n] : counts) {
      out[v] = static_cast<double>(n) / static_cast<double>(total);
    }
    return out;
  };
  AttributeDistributionReport r;
  r.dimension = classifier.dimension();
  r.overall = normalise(overall);
  for (const auto& [l, counts] : per_class) r.per_class[l] = normalise(counts);
  return r;
}

std::string report_json(const AttributeDistributionReport& r,
                        const std::map<int, std::string>& class_names) {
  nlohmann::ordered_json j;
  j["dimension"] = r.dimension;
  j["overall"] = r.overall;
  nlohmann::ordered_json per = nlohmann::ordered_json::array();
  for (const auto& [l, dist] : r.per_class) {
    nlohmann::ordered_json e;
    e["label"] = l;
    auto it = class_names.find(l);
    if (it != class_names.end()) e["class"] = it->second;
    e["distribution"] = dist;
    per.push_back(std::move(e));
  }
  j["per_class"] = std::move(per);
  return j.dump(2);
}

double agreement(const std::vector<std::string>& predictions,
                 const std::vector<std::string>& annotations) {
  if (predictions.size() != annotations.size()) {
    throw PreconditionError("got " + std::to_string(predictions.size()) +
                            " predictions for " +
                            std::to_string(annotations.size()) +
                            " annotations");
  }
  if (predictions.empty()) throw PreconditionError("nothing to compare");
  std::size_t same = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] == annotations[i]) ++same;
  }
  return static_cast<double>(same) / static_cast<double>(predictions.size());
}

std::vector<LabeledText> training_pairs(
    const std::vector<DatasetRecord>& records,
    const std::vector<Provenance>& provenance, std::string_view dimension) {
  if (records.size() != provenance.size()) {
    throw PreconditionError("dataset has " + std::to_string(records.size()) +
                            " records but provenance has " +
                            std::to_string(provenance.size()));
  }
  std::vector<LabeledText> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& p = provenance[i];
    const Assignment* a =
        p.configuration ? p.configuration->find(dimension) : nullptr;
    if (a == nullptr) {
      throw PreconditionError("record " + std::to_string(i + 1) +
                              " has no value for dimension '" +
                              std::string(dimension) + "'");
    }
    out.push_back({records[i].text, a->value.text});
  }
  return out;
}

}  // namespace attrgen::bias
