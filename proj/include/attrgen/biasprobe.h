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


// Attribute classifier (multinomial naive Bayes over corpus tokens) trained
// from generation provenance, and attribute distribution reports.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "attrgen/engine.h"

namespace attrgen::bias {

// Legal annotation, never a training target.
inline constexpr std::string_view kUnknown = "unknown";

struct Prediction;

struct LabeledText {
  std::string text;
  std::string value;
};

class AttributeClassifier {
 public:
  const std::string& dimension() const { return dimension_; }
  double alpha() const { return alpha_; }
  const std::vector<std::string>& values() const { return values_; }  // sorted
  std::size_t vocabulary_size() const { return vocab_.size(); }

  double prior(std::size_t value_index) const;
  // Smoothed P(token | value); the value's row over the vocabulary sums to 1.
  double token_probability(std::size_t value_index,
                           std::string_view token) const;
  std::vector<std::string> vocabulary() const;  // sorted

  bool operator==(const AttributeClassifier&) const = default;

 private:
  friend AttributeClassifier train_attribute_classifier(
      std::string dimension, const std::vector<LabeledText>& examples,
      double alpha);
  friend Prediction predict_attribute(const AttributeClassifier&,
                                      std::string_view);

  std::string dimension_;
  double alpha_ = 1.0;
  std::vector<std::string> values_;
  std::vector<std::uint64_t> doc_counts_;
  std::uint64_t docs_ = 0;
  std::unordered_map<std::string, std::size_t> vocab_;
  std::vector<std::vector<std::uint64_t>> token_counts_;  // [value][token]
  std::vector<std::uint64_t> token_totals_;
};

// Examples labelled "unknown" are skipped. Throws PreconditionError with
// fewer than two distinct values or alpha <= 0.
AttributeClassifier train_attribute_classifier(
    std::string dimension, const std::vector<LabeledText>& examples,
    double alpha = 1.0);

struct Prediction {
  std::string value;
  std::map<std::string, double> posterior;
};

// argmax of log prior + sum of token log-likelihoods; tokens never seen in
// training are ignored; ties go to the earlier value.
Prediction predict_attribute(const AttributeClassifier& classifier,
                             std::string_view text);

struct AttributeDistributionReport {
  std::string dimension;
  std::map<std::string, double> overall;
  std::map<int, std::map<std::string, double>> per_class;
};

// Predicted value proportions over all texts and per class. A text with
// several labels counts once in each of its classes.
AttributeDistributionReport distribution_report(
    const AttributeClassifier& classifier,
    const std::vector<std::string>& texts,
    const std::vector<std::vector<int>>& labels);

std::string report_json(const AttributeDistributionReport& report,
                        const std::map<int, std::string>& class_names = {});

// Fraction of positions where the prediction equals the annotation.
double agreement(const std::vector<std::string>& predictions,
                 const std::vector<std::string>& annotations);

// (text, value) pairs from a generated dataset and its provenance; the
// value is the configuration's assignment for `dimension` (name or key).
std::vector<LabeledText> training_pairs(
    const std::vector<DatasetRecord>& records,
    const std::vector<Provenance>& provenance, std::string_view dimension);

}  // namespace attrgen::bias
