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


#include "attrgen/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "attrgen/error.h"
#include "attrgen/io.h"
#include "attrgen/rng.h"
#include "attrgen/text.h"
#include "http_client.h"

namespace attrgen::metrics {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

void check_labels(std::size_t n, const std::vector<int>& labels) {
  if (!labels.empty() && labels.size() != n) {
    throw PreconditionError("got " + std::to_string(labels.size()) +
                            " labels for " + std::to_string(n) + " items");
  }
}

// Label -> member indices, in ascending label order.
std::map<int, std::vector<std::size_t>> by_label(
    std::size_t n, const std::vector<int>& labels) {
  std::map<int, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < n; ++i) {
    out[labels.empty() ? 0 : labels[i]].push_back(i);
  }
  return out;
}

}  // namespace

VocabSize vocab_size(const std::vector<std::string>& corpus,
                     const std::vector<int>& labels) {
  if (corpus.empty()) throw PreconditionError("corpus is empty");
  check_labels(corpus.size(), labels);
  std::unordered_set<std::string> all;
  std::map<int, std::unordered_set<std::string>> per_class;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    auto& cls = per_class[labels.empty() ? 0 : labels[i]];
    for (auto& t : text::tokenize(corpus[i])) {
      all.insert(t);
      cls.insert(std::move(t));
    }
  }
  VocabSize v;
  v.all = all.size();
  double sum = 0.0;
  for (const auto& [label, set] : per_class) {
    sum += static_cast<double>(set.size());
  }
  v.class_avg = sum / static_cast<double>(per_class.size());
  return v;
}

// --- embeddings -------------------------------------------------------------

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

void normalize(Vector& v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm == 0.0) return;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
}

}  // namespace

HashEmbedder::HashEmbedder(std::size_t dimension) : dimension_(dimension) {
  if (dimension == 0) throw PreconditionError("embedding dimension must be > 0");
}

std::string HashEmbedder::id() const {
  return "hash-tf-fnv1a64-uni-bi-" + std::to_string(dimension_);
}

std::vector<Vector> HashEmbedder::embed(const std::vector<std::string>& texts) {
  std::vector<Vector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    Vector v(dimension_, 0.0);
    auto tokens = text::tokenize(t);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      v[fnv1a64(tokens[i]) % dimension_] += 1.0;
      if (i + 1 < tokens.size()) {
        v[fnv1a64(tokens[i] + " " + tokens[i + 1]) % dimension_] += 1.0;
      }
    }
    normalize(v);
    out.push_back(std::move(v));
  }
  return out;
}

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderConfig config)
    : config_(std::move(config)) {
  if (config_.batch == 0) config_.batch = 1;
}

std::vector<Vector> RemoteEmbedder::embed(
    const std::vector<std::string>& texts) {
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw ProviderError(ProviderErrorKind::kAuthentication,
                        "missing credential: set " + config_.api_key_env);
  }
  std::string url = config_.base_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  url += "/embeddings";
  std::vector<Vector> out;
  out.reserve(texts.size());
  for (std::size_t start = 0; start < texts.size(); start += config_.batch) {
    std::size_t end = std::min(texts.size(), start + config_.batch);
    std::vector<std::string> batch(texts.begin() + static_cast<long>(start),
                                   texts.begin() + static_cast<long>(end));
    json body = {{"model", config_.model}, {"input", batch}};
    http::Response res = http::post_json(
        url, key, body.dump(-1, ' ', false, json::error_handler_t::replace),
        config_.timeout);
    if (res.status != 200) {
      auto kind = res.status == 0 || res.status == 429 || res.status >= 500
                      ? ProviderErrorKind::kTransient
                  : res.status == 401 || res.status == 403
                      ? ProviderErrorKind::kAuthentication
                      : ProviderErrorKind::kPermanent;
      throw ProviderError(kind, "embedding request failed: " +
                                    (res.status == 0
                                         ? res.transport_error
                                         : "HTTP " + std::to_string(res.status)));
    }
    try {
      json j = json::parse(res.body);
      const auto& data = j.at("data");
      if (data.size() != batch.size()) {
        throw ProviderError(ProviderErrorKind::kPermanent,
                            "embedding response has " +
                                std::to_string(data.size()) + " vectors for " +
                                std::to_string(batch.size()) + " inputs");
      }
      std::vector<Vector> vecs(batch.size());
      for (std::size_t i = 0; i < data.size(); ++i) {
        std::size_t idx = data[i].value("index", i);
        if (idx >= batch.size()) {
          throw ProviderError(ProviderErrorKind::kPermanent,
                              "embedding index out of range");
        }
        vecs[idx] = data[i].at("embedding").get<Vector>();
        normalize(vecs[idx]);
      }
      for (auto& v : vecs) out.push_back(std::move(v));
    } catch (const json::exception& e) {
      throw ProviderError(ProviderErrorKind::kPermanent,
                          std::string("malformed embedding response: ") +
                              e.what());
    }
  }
  return out;
}

// --- APS --------------------------------------------------------------------

double cosine(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw PreconditionError("vectors differ in dimension");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::uint64_t pair_count(const std::vector<int>& labels, Scope scope) {
  const std::uint64_t n = labels.size();
  const std::uint64_t all = n * (n - (n > 0 ? 1 : 0)) / 2;
  if (scope == Scope::kAll) return all;
  std::uint64_t intra = 0;
  for (const auto& [label, members] : by_label(labels.size(), labels)) {
    std::uint64_t m = members.size();
    intra += m * (m - 1) / 2;
  }
  return scope == Scope::kIntra ? intra : all - intra;
}

namespace {

// Sum of dot products over unordered distinct pairs of unit (or zero)
// vectors: (|sum v|^2 - sum |v|^2) / 2.
double pair_dot_sum(const std::vector<Vector>& units,
                    const std::vector<std::size_t>& members) {
  if (members.size() < 2) return 0.0;
  Vector total(units[members[0]].size(), 0.0);
  double self = 0.0;
  for (std::size_t i : members) {
    const Vector& v = units[i];
    for (std::size_t d = 0; d < v.size(); ++d) {
      total[d] += v[d];
      self += v[d] * v[d];
    }
  }
  double sq = 0.0;
  for (double x : total) sq += x * x;
  return (sq - self) / 2.0;
}

}  // namespace

double aps(const std::vector<Vector>& vectors, const std::vector<int>& labels,
           Scope scope) {
  if (vectors.size() < 2) throw PreconditionError("APS needs >= 2 vectors");
  if (scope != Scope::kAll && labels.empty()) {
    throw PreconditionError("intra/inter APS needs labels");
  }
  check_labels(vectors.size(), labels);
  const std::size_t dim = vectors[0].size();
  std::vector<Vector> units = vectors;
  for (auto& v : units) {
    if (v.size() != dim) throw PreconditionError("vectors differ in dimension");
    normalize(v);
  }
  std::vector<int> effective =
      labels.empty() ? std::vector<int>(vectors.size(), 0) : labels;
  const std::uint64_t pairs = pair_count(effective, scope);
  if (pairs == 0) {
    throw PreconditionError(std::string("no ") +
                            (scope == Scope::kIntra   ? "same-class"
                             : scope == Scope::kInter ? "cross-class"
                                                      : "") +
                            " pairs for APS");
  }
  std::vector<std::size_t> everyone(vectors.size());
  std::iota(everyone.begin(), everyone.end(), 0);
  double all_sum = scope == Scope::kIntra ? 0.0 : pair_dot_sum(units, everyone);
  double intra_sum = 0.0;
  if (scope != Scope::kAll) {
    for (const auto& [label, members] : by_label(units.size(), effective)) {
      intra_sum += pair_dot_sum(units, members);
    }
  }
  double sum = scope == Scope::kAll     ? all_sum
               : scope == Scope::kIntra ? intra_sum
                                        : all_sum - intra_sum;
  return sum / static_cast<double>(pairs);
}

// --- histogram --------------------------------------------------------------

std::uint64_t Histogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

Histogram similarity_histogram(const std::vector<Vector>& vectors,
                               const std::vector<int>& labels,
                               std::size_t bins,
                               std::uint64_t max_pairs_per_class,
                               std::uint64_t seed) {
  if (bins < 1) throw PreconditionError("histogram needs >= 1 bin");
  if (max_pairs_per_class < 1) {
    throw PreconditionError("pair cap must be >= 1");
  }
  check_labels(vectors.size(), labels);
  Histogram h;
  h.seed = seed;
  h.counts.assign(bins, 0);
  for (std::size_t b = 0; b <= bins; ++b) {
    h.edges.push_back(-1.0 + 2.0 * static_cast<double>(b) /
                                 static_cast<double>(bins));
  }
  auto add = [&](double c) {
    auto b = static_cast<long long>(std::floor((c + 1.0) / 2.0 *
                                               static_cast<double>(bins)));
    b = std::clamp<long long>(b, 0, static_cast<long long>(bins) - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  };
  Rng root(seed);
  bool any = false;
  for (const auto& [label, members] : by_label(vectors.size(), labels)) {
    const std::uint64_t m = members.size();
    const std::uint64_t pairs = m * (m - (m > 0 ? 1 : 0)) / 2;
    if (pairs == 0) continue;
    any = true;
    if (pairs <= max_pairs_per_class) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
          add(cosine(vectors[members[i]], vectors[members[j]]));
        }
      }
      continue;
    }
    // Floyd's sampling of distinct pair indices.
    Rng rng = root.split(static_cast<std::uint64_t>(label));
    std::set<std::uint64_t> picked;
    for (std::uint64_t j = pairs - max_pairs_per_class; j < pairs; ++j) {
      std::uint64_t t = rng.uniform(j + 1);
      if (!picked.insert(t).second) picked.insert(j);
    }
    // Pair index k enumerates (i, j), i < j, row by row.
    std::uint64_t row = 0, row_start = 0;
    for (std::uint64_t k : picked) {
      while (k >= row_start + (m - 1 - row)) {
        row_start += m - 1 - row;
        ++row;
      }
      std::uint64_t col = row + 1 + (k - row_start);
      add(cosine(vectors[members[row]], vectors[members[col]]));
    }
  }
  if (!any) throw PreconditionError("no same-class pairs for the histogram");
  return h;
}

// --- INGF -------------------------------------------------------------------

double ingf(const std::vector<std::string>& corpus, int n_max) {
  if (corpus.empty()) throw PreconditionError("corpus is empty");
  if (n_max < 1) throw PreconditionError("n_max must be >= 1");
  std::unordered_set<std::string> all;
  std::vector<std::size_t> sizes;
  sizes.reserve(corpus.size());
  for (const auto& doc : corpus) {
    auto tokens = text::tokenize(doc);
    std::unordered_set<std::string> grams;
    for (int n = 1; n <= n_max; ++n) {
      const auto un = static_cast<std::size_t>(n);
      for (std::size_t i = 0; i + un <= tokens.size(); ++i) {
        std::string g = tokens[i];
        for (std::size_t k = 1; k < un; ++k) g += " " + tokens[i + k];
        grams.insert(std::move(g));
      }
    }
    sizes.push_back(grams.size());
    all.insert(grams.begin(), grams.end());
  }
  std::size_t max_size = *std::max_element(sizes.begin(), sizes.end());
  if (max_size == 0) return 0.0;
  double ratio = 0.0;
  for (std::size_t s : sizes) {
    ratio += static_cast<double>(s) / static_cast<double>(max_size);
  }
  ratio /= static_cast<double>(sizes.size());
  return static_cast<double>(all.size()) /
         static_cast<double>(corpus.size()) * ratio;
}

// --- report -----------------------------------------------------------------

DiversityReport diversity_report(const std::vector<std::string>& corpus,
                                 const std::vector<int>& labels,
                                 Embedder& embedder,
                                 const DiversityOptions& options) {
  DiversityReport r;
  r.documents = corpus.size();
  VocabSize v = vocab_size(corpus, labels);
  r.vocab_all = v.all;
  r.vocab_class_avg = v.class_avg;
  r.ingf = ingf(corpus, options.n_max);
  r.embedder = embedder.id();
  r.tokenizer = std::string(text::kTokenizerId);
  auto vectors = embedder.embed(corpus);
  std::vector<int> effective =
      labels.empty() ? std::vector<int>(corpus.size(), 0) : labels;
  if (corpus.size() >= 2) r.aps_all = aps(vectors, effective, Scope::kAll);
  if (pair_count(effective, Scope::kIntra) > 0) {
    r.aps_intra = aps(vectors, effective, Scope::kIntra);
    r.histogram = similarity_histogram(vectors, effective, options.bins,
                                       options.max_pairs_per_class,
                                       options.seed);
  }
  if (pair_count(effective, Scope::kInter) > 0) {
    r.aps_inter = aps(vectors, effective, Scope::kInter);
  }
  return r;
}

namespace {

ojson opt(const std::optional<double>& v) {
  return v ? ojson(*v) : ojson(nullptr);
}

}  // namespace

std::string report_json(const DiversityReport& r) {
  ojson j;
  j["documents"] = r.documents;
  j["vocab_all"] = r.vocab_all;
  j["vocab_class_avg"] = r.vocab_class_avg;
  j["aps_all"] = opt(r.aps_all);
  j["aps_intra"] = opt(r.aps_intra);
  j["aps_inter"] = opt(r.aps_inter);
  j["ingf"] = r.ingf;
  if (r.histogram) {
    j["histogram"] = {{"edges", r.histogram->edges},
                      {"counts", r.histogram->counts},
                      {"seed", r.histogram->seed}};
  } else {
    j["histogram"] = nullptr;
  }
  j["embedder"] = r.embedder;
  j["tokenizer"] = r.tokenizer;
  return j.dump(2);
}

// --- multi-label ------------------------------------------------------------

MultilabelReport multilabel_metrics(
    const std::vector<std::vector<double>>& scores,
    const std::vector<std::vector<int>>& truth, const std::vector<int>& ks,
    double threshold) {
  if (scores.empty()) throw PreconditionError("no examples to score");
  if (scores.size() != truth.size()) {
    throw PreconditionError("got " + std::to_string(scores.size()) +
                            " score rows for " + std::to_string(truth.size()) +
                            " truth sets");
  }
  const std::size_t C = scores[0].size();
  if (C == 0) throw PreconditionError("score rows are empty");
  for (int k : ks) {
    if (k < 1 || static_cast<std::size_t>(k) > C) {
      throw PreconditionError("k=" + std::to_string(k) + " outside [1, " +
                              std::to_string(C) + "]");
    }
  }
  std::vector<std::uint64_t> tp(C, 0), fp(C, 0), fn(C, 0);
  MultilabelReport r;
  for (int k : ks) {
    r.precision_at[k] = 0.0;
    r.ndcg_at[k] = 0.0;
  }
  std::vector<std::size_t> order(C);
  for (std::size_t e = 0; e < scores.size(); ++e) {
    const auto& s = scores[e];
    if (s.size() != C) {
      throw PreconditionError("score row " + std::to_string(e) + " has " +
                              std::to_string(s.size()) + " values, expected " +
                              std::to_string(C));
    }
    if (truth[e].empty()) {
      throw PreconditionError("truth set " + std::to_string(e) + " is empty");
    }
    std::vector<bool> relevant(C, false);
    for (int t : truth[e]) {
      if (t < 0 || static_cast<std::size_t>(t) >= C) {
        throw PreconditionError("truth label " + std::to_string(t) +
                                " outside [0, " + std::to_string(C) + ")");
      }
      relevant[static_cast<std::size_t>(t)] = true;
    }
    const std::size_t n_rel =
        static_cast<std::size_t>(std::count(relevant.begin(), relevant.end(), true));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
    for (std::size_t rank = 0; rank < C; ++rank) {
      if (relevant[order[rank]]) {
        r.mrr += 1.0 / static_cast<double>(rank + 1);
        break;
      }
    }
    for (int k : ks) {
      const auto uk = static_cast<std::size_t>(k);
      double hits = 0.0, dcg = 0.0, idcg = 0.0;
      for (std::size_t rank = 0; rank < uk; ++rank) {
        double discount = 1.0 / std::log2(static_cast<double>(rank) + 2.0);
        if (relevant[order[rank]]) {
          hits += 1.0;
          dcg += discount;
        }
        if (rank < n_rel) idcg += discount;
      }
      r.precision_at[k] += hits / static_cast<double>(k);
      r.ndcg_at[k] += dcg / idcg;
    }
    for (std::size_t c = 0; c < C; ++c) {
      bool predicted = s[c] >= threshold;
      if (predicted && relevant[c]) ++tp[c];
      if (predicted && !relevant[c]) ++fp[c];
      if (!predicted && relevant[c]) ++fn[c];
    }
  }
  const double n = static_cast<double>(scores.size());
  r.mrr /= n;
  for (int k : ks) {
    r.precision_at[k] /= n;
    r.ndcg_at[k] /= n;
  }
  std::uint64_t TP = 0, FP = 0, FN = 0;
  double macro = 0.0;
  for (std::size_t c = 0; c < C; ++c) {
    std::uint64_t denom = 2 * tp[c] + fp[c] + fn[c];
    macro += denom == 0 ? 0.0
                        : 2.0 * static_cast<double>(tp[c]) /
                              static_cast<double>(denom);
    TP += tp[c];
    FP += fp[c];
    FN += fn[c];
  }
  r.macro_f1 = macro / static_cast<double>(C);
  std::uint64_t denom = 2 * TP + FP + FN;
  r.micro_f1 = denom == 0 ? 0.0
                          : 2.0 * static_cast<double>(TP) /
                                static_cast<double>(denom);
  return r;
}

std::string report_json(const MultilabelReport& r) {
  ojson j;
  j["macro_f1"] = r.macro_f1;
  j["micro_f1"] = r.micro_f1;
  for (const auto& [k, v] : r.precision_at) {
    j["precision@" + std::to_string(k)] = v;
  }
  for (const auto& [k, v] : r.ndcg_at) j["ndcg@" + std::to_string(k)] = v;
  j["mrr"] = r.mrr;
  return j.dump(2);
}

std::vector<std::vector<double>> load_score_dump(
    const std::filesystem::path& path) {
  std::vector<std::vector<double>> out;
  auto lines = text::split_lines(io::read_file(path));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto fields = text::split_whitespace(lines[i]);
    if (fields.empty()) continue;
    std::vector<double> row;
    for (const auto& f : fields) {
      char* end = nullptr;
      double v = std::strtod(f.c_str(), &end);
      if (end != f.c_str() + f.size() || !std::isfinite(v)) {
        throw ParseError(path.string(), i + 1, "not a number: '" + f + "'");
      }
      row.push_back(v);
    }
    if (!out.empty() && row.size() != out[0].size()) {
      throw ParseError(path.string(), i + 1,
                       "expected " + std::to_string(out[0].size()) +
                           " scores, got " + std::to_string(row.size()));
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::string format_score_dump(const std::vector<std::vector<double>>& scores) {
  std::string out;
  char buf[32];
  for (const auto& row : scores) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", row[i]);
      if (i) out += ' ';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace attrgen::metrics
