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


// Corpus diversity metrics (vocabulary size, average pairwise similarity,
// n-gram frequency, same-class similarity histogram) and multi-label
// ranking metrics.

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace attrgen::metrics {

struct VocabSize {
  std::size_t all = 0;
  double class_avg = 0.0;
};

// Distinct tokens overall and averaged over classes. `labels` is either
// empty (one class) or aligned with `corpus`.
VocabSize vocab_size(const std::vector<std::string>& corpus,
                     const std::vector<int>& labels);

using Vector = std::vector<double>;

class Embedder {
 public:
  virtual ~Embedder() = default;
  // Unit vectors; the zero vector for texts without tokens.
  virtual std::vector<Vector> embed(const std::vector<std::string>& texts) = 0;
  virtual std::string id() const = 0;
};

// Term frequencies of hashed unigrams and bigrams (FNV-1a 64 of the token,
// or of "a b" for a bigram, modulo `dimension`), L2-normalised.
class HashEmbedder : public Embedder {
 public:
  explicit HashEmbedder(std::size_t dimension = 4096);
  std::vector<Vector> embed(const std::vector<std::string>& texts) override;
  std::string id() const override;
  std::size_t dimension() const { return dimension_; }

 private:
  std::size_t dimension_;
};

std::uint64_t fnv1a64(std::string_view s);

// Embedding endpoint: POST <base_url>/embeddings with {"model", "input"};
// reads data[i].embedding. Vectors are re-normalised.
struct RemoteEmbedderConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "text-embedding-ada-002";
  std::string api_key_env = "ATTRGEN_API_KEY";
  std::chrono::seconds timeout{60};
  std::size_t batch = 64;
};

class RemoteEmbedder : public Embedder {
 public:
  explicit RemoteEmbedder(RemoteEmbedderConfig config);
  std::vector<Vector> embed(const std::vector<std::string>& texts) override;
  std::string id() const override { return "remote:" + config_.model; }

 private:
  RemoteEmbedderConfig config_;
};

// 0 when either vector is zero.
double cosine(const Vector& a, const Vector& b);

enum class Scope { kAll, kIntra, kInter };

// Unordered distinct pairs qualifying for the scope.
std::uint64_t pair_count(const std::vector<int>& labels, Scope scope);

// Mean cosine over the scope's pairs. Throws PreconditionError when the
// scope has no pair. `labels` may be empty for Scope::kAll.
double aps(const std::vector<Vector>& vectors, const std::vector<int>& labels,
           Scope scope);

struct Histogram {
  std::vector<double> edges;  // bins + 1 edges over [-1, 1]
  std::vector<std::uint64_t> counts;
  std::uint64_t seed = 0;

  std::uint64_t total() const;
};

// Same-class pair cosines. Classes with more than max_pairs_per_class pairs
// are subsampled without replacement from stream Rng(seed).split(label).
Histogram similarity_histogram(const std::vector<Vector>& vectors,
                               const std::vector<int>& labels,
                               std::size_t bins = 50,
                               std::uint64_t max_pairs_per_class = 10000,
                               std::uint64_t seed = 0);

// With S(d) the word n-grams (1 <= n <= n_max) of document d:
//   |union of S(d)| / |corpus| * mean_d(|S(d)| / max_d' |S(d')|)
double ingf(const std::vector<std::string>& corpus, int n_max = 3);

struct DiversityOptions {
  int n_max = 3;
  std::size_t bins = 50;
  std::uint64_t max_pairs_per_class = 10000;
  std::uint64_t seed = 0;
};

struct DiversityReport {
  std::size_t documents = 0;
  std::size_t vocab_all = 0;
  double vocab_class_avg = 0.0;
  std::optional<double> aps_all;
  std::optional<double> aps_intra;
  std::optional<double> aps_inter;
  double ingf = 0.0;
  std::optional<Histogram> histogram;
  std::string embedder;
  std::string tokenizer;
};

DiversityReport diversity_report(const std::vector<std::string>& corpus,
                                 const std::vector<int>& labels,
                                 Embedder& embedder,
                                 const DiversityOptions& options = {});

std::string report_json(const DiversityReport& report);

// --- multi-label ranking ----------------------------------------------------

struct MultilabelReport {
  double macro_f1 = 0.0;
  double micro_f1 = 0.0;
  double mrr = 0.0;
  std::map<int, double> precision_at;
  std::map<int, double> ndcg_at;
};

// Classes are ranked by descending score, ties by ascending index. F1 uses
// score >= threshold as the prediction; a class with no true and no
// predicted member contributes 0 to macro-F1. Throws PreconditionError for
// k outside [1, C], ragged scores, empty truth sets or labels >= C.
MultilabelReport multilabel_metrics(
    const std::vector<std::vector<double>>& scores,
    const std::vector<std::vector<int>>& truth, const std::vector<int>& ks,
    double threshold = 0.5);

std::string report_json(const MultilabelReport& report);

// Score dump: one line per example, whitespace-separated reals in class
// index order.
std::vector<std::vector<double>> load_score_dump(
    const std::filesystem::path& path);
std::string format_score_dump(const std::vector<std::vector<double>>& scores);

}  // namespace attrgen::metrics
