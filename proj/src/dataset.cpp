#include "alrank/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <unordered_map>

#include "alrank/error.hpp"

namespace alrank {
namespace {

std::string LineError(std::size_t line_no, const std::string& what) {
  return "line " + std::to_string(line_no) + ": " + what;
}

std::string_view Trim(std::string_view s) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' ||
           c == '\f';
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> SplitWhitespace(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

template <typename T>
bool ParseNumber(std::string_view s, T* out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, *out);
  return ec == std::errc() && ptr == last;
}

// Looks for `key=<value>` among whitespace-separated comment tokens.
bool FindCommentValue(std::string_view comment, std::string_view key,
                      std::string_view* value) {
  for (std::string_view token : SplitWhitespace(comment)) {
    if (token.size() > key.size() && token.substr(0, key.size()) == key &&
        token[key.size()] == '=') {
      *value = token.substr(key.size() + 1);
      return true;
    }
  }
  return false;
}

void AppendDouble(std::string* out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out->append(buf, ptr);
}

}  // namespace

std::vector<int> QueryGroup::Labels() const {
  std::vector<int> labels;
  labels.reserve(documents.size());
  for (const auto& d : documents) labels.push_back(d.label);
  return labels;
}

const char* ProvenanceName(Provenance p) {
  return p == Provenance::kSynthetic ? "synthetic" : "parsed";
}

std::size_t Corpus::NumDocuments() const {
  std::size_t n = 0;
  for (const auto& q : queries) n += q.documents.size();
  return n;
}

const QueryGroup* Corpus::Find(QueryId id) const {
  for (const auto& q : queries) {
    if (q.query_id == id) return &q;
  }
  return nullptr;
}

void Corpus::Validate() const {
  if (feature_dim == 0) throw DataError("corpus feature dimensionality is 0");
  std::set<QueryId> seen;
  for (const auto& q : queries) {
    if (!seen.insert(q.query_id).second) {
      throw DataError("duplicate query_id " + std::to_string(q.query_id));
    }
    if (q.bucket < 0 || q.bucket >= kNumBuckets) {
      throw DataError("query " + std::to_string(q.query_id) +
                      ": bucket out of range");
    }
    if (q.documents.empty()) {
      throw DataError("query " + std::to_string(q.query_id) +
                      " has no documents");
    }
    std::set<std::size_t> doc_ids;
    for (const auto& d : q.documents) {
      if (!doc_ids.insert(d.doc_id).second) {
        throw DataError("query " + std::to_string(q.query_id) +
                        ": duplicate doc_id " + std::to_string(d.doc_id));
      }
      if (d.label < 0 || d.label > kMaxLabel) {
        throw DataError("query " + std::to_string(q.query_id) +
                        ": label out of range");
      }
      if (d.features.size() != feature_dim) {
        throw DataError("query " + std::to_string(q.query_id) +
                        ": feature vector length " +
                        std::to_string(d.features.size()) + " != " +
                        std::to_string(feature_dim));
      }
      for (double v : d.features) {
        if (!std::isfinite(v)) {
          throw DataError("query " + std::to_string(q.query_id) +
                          ": non-finite feature value");
        }
      }
    }
  }
}

QueryRefs AllQueries(const Corpus& corpus) {
  QueryRefs refs;
  refs.reserve(corpus.queries.size());
  for (const auto& q : corpus.queries) refs.push_back(&q);
  return refs;
}

QueryRefs SelectQueries(const Corpus& corpus, const std::set<QueryId>& ids) {
  QueryRefs refs;
  refs.reserve(ids.size());
  for (const auto& q : corpus.queries) {
    if (ids.count(q.query_id)) refs.push_back(&q);
  }
  if (refs.size() != ids.size()) {
    throw DataError("selection references query ids absent from the corpus");
  }
  return refs;
}

Corpus ParseLetor(std::string_view text) {
  Corpus corpus;
  std::unordered_map<QueryId, std::size_t> group_index;
  std::vector<bool> bucket_annotated;
  bool have_dim = false;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    line = Trim(line);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    std::string_view comment;
    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) {
      comment = line.substr(hash + 1);
      line = Trim(line.substr(0, hash));
    }
    if (line.empty()) {
      // Whole-line comment; may carry the serializer's provenance header.
      std::string_view value;
      if (FindCommentValue(comment, "provenance", &value) &&
          value == "synthetic") {
        corpus.provenance = Provenance::kSynthetic;
      }
      continue;
    }

    const auto tokens = SplitWhitespace(line);
    if (tokens.size() < 3) {
      throw DataError(LineError(line_no, "expected label, qid and features"));
    }
    long long label = 0;
    if (!ParseNumber(tokens[0], &label)) {
      throw DataError(LineError(line_no, "malformed label '" +
                                             std::string(tokens[0]) + "'"));
    }
    if (label < 0) throw DataError(LineError(line_no, "negative label"));
    if (label > kMaxLabel) {
      label = kMaxLabel;
      ++corpus.clamped_labels;
    }
    if (tokens[1].substr(0, 4) != "qid:") {
      throw DataError(LineError(line_no, "missing qid"));
    }
    QueryId qid = 0;
    if (!ParseNumber(tokens[1].substr(4), &qid)) {
      throw DataError(LineError(line_no, "malformed qid"));
    }

    std::vector<std::pair<std::size_t, double>> entries;
    entries.reserve(tokens.size() - 2);
    std::size_t last_index = 0;
    for (std::size_t t = 2; t < tokens.size(); ++t) {
      const std::size_t colon = tokens[t].find(':');
      std::size_t index = 0;
      double value = 0.0;
      if (colon == std::string_view::npos ||
          !ParseNumber(tokens[t].substr(0, colon), &index) ||
          !ParseNumber(tokens[t].substr(colon + 1), &value)) {
        throw DataError(LineError(line_no, "malformed feature '" +
                                               std::string(tokens[t]) + "'"));
      }
      if (index == 0) {
        throw DataError(LineError(line_no, "feature indices are 1-based"));
      }
      if (index <= last_index) {
        throw DataError(LineError(
            line_no, "feature indices not strictly increasing"));
      }
      if (!std::isfinite(value)) {
        throw DataError(LineError(line_no, "non-finite feature value"));
      }
      last_index = index;
      entries.emplace_back(index, value);
    }
    if (!have_dim) {
      corpus.feature_dim = last_index;
      have_dim = true;
    } else if (last_index != corpus.feature_dim) {
      throw DataError(LineError(
          line_no, "inconsistent feature dimensionality: highest index " +
                       std::to_string(last_index) + ", expected " +
                       std::to_string(corpus.feature_dim)));
    }

    int bucket = -1;
    std::string_view bucket_text;
    if (FindCommentValue(comment, "bucket", &bucket_text)) {
      if (!ParseNumber(bucket_text, &bucket) || bucket < 0 ||
          bucket >= kNumBuckets) {
        throw DataError(LineError(line_no, "bucket must be in [0, 9]"));
      }
    }

    auto [it, inserted] = group_index.try_emplace(qid, corpus.queries.size());
    if (inserted) {
      QueryGroup group;
      group.query_id = qid;
      corpus.queries.push_back(std::move(group));
      bucket_annotated.push_back(false);
    }
    QueryGroup& group = corpus.queries[it->second];
    if (bucket >= 0) {
      if (bucket_annotated[it->second] && group.bucket != bucket) {
        throw DataError(LineError(line_no, "conflicting bucket for qid " +
                                               std::to_string(qid)));
      }
      group.bucket = bucket;
      bucket_annotated[it->second] = true;
    }

    Document doc;
    doc.doc_id = group.documents.size();
    doc.label = static_cast<int>(label);
    doc.features.assign(corpus.feature_dim, 0.0);
    for (const auto& [index, value] : entries) doc.features[index - 1] = value;
    group.documents.push_back(std::move(doc));
  }

  if (corpus.queries.empty()) throw DataError("empty input: no documents");
  return corpus;
}

Corpus ReadLetorFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return ParseLetor(buffer.str());
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::string SerializeLetor(const Corpus& corpus) {
  std::string out;
  out += "# alrank corpus provenance=";
  out += ProvenanceName(corpus.provenance);
  out += '\n';
  for (const auto& q : corpus.queries) {
    for (const auto& d : q.documents) {
      out += std::to_string(d.label);
      out += " qid:";
      out += std::to_string(q.query_id);
      for (std::size_t f = 0; f < d.features.size(); ++f) {
        out += ' ';
        out += std::to_string(f + 1);
        out += ':';
        AppendDouble(&out, d.features[f]);
      }
      out += " #bucket=";
      out += std::to_string(q.bucket);
      out += '\n';
    }
  }
  return out;
}

void WriteLetorFile(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kRuntime, "cannot write " + path);
  out << SerializeLetor(corpus);
  if (!out) throw Error(ErrorKind::kRuntime, "write failed for " + path);
}

LabelProfile DefaultLabelProfile() {
  // Discretized Gaussian over grades; center and width both shrink toward
  // the tail, so frequent buckets have the most spread-out labels.
  constexpr double kCenterHead = 2.5, kCenterTail = -1.0;
  constexpr double kWidthHead = 2.0, kWidthTail = 0.9;
  LabelProfile profile{};
  for (int b = 0; b < kNumBuckets; ++b) {
    const double t = static_cast<double>(b) / (kNumBuckets - 1);
    const double center = kCenterHead + t * (kCenterTail - kCenterHead);
    const double width = kWidthHead + t * (kWidthTail - kWidthHead);
    double z = 0.0;
    for (int l = 0; l < kNumLabels; ++l) {
      const double d = (l - center) / width;
      profile[b][l] = std::exp(-0.5 * d * d);
      z += profile[b][l];
    }
    for (double& p : profile[b]) p /= z;
  }
  return profile;
}

void SynthConfig::Validate() const {
  if (num_queries < 10) throw ConfigError("num_queries must be >= 10");
  if (docs_per_query < 2) throw ConfigError("docs_per_query must be >= 2");
  if (feature_dim < 2) throw ConfigError("feature_dim must be >= 2");
  if (first_query_id > std::numeric_limits<QueryId>::max() - num_queries) {
    throw ConfigError("first_query_id too large");
  }
  if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) {
    throw ConfigError("noise_scale must be finite and >= 0");
  }
  for (int b = 0; b < kNumBuckets; ++b) {
    double sum = 0.0;
    for (double p : bucket_label_profile[b]) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw ConfigError("label profile for bucket " + std::to_string(b) +
                          " has a negative or non-finite entry");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw ConfigError("label profile for bucket " + std::to_string(b) +
                        " does not sum to 1");
    }
  }
}

Corpus GenerateSynthetic(const SynthConfig& config, std::uint64_t seed) {
  config.Validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t dim = config.feature_dim;

  std::vector<double> direction(dim);
  double norm = 0.0;
  for (auto& w : direction) {
    w = std::abs(normal(rng)) + 0.1;
    norm += w * w;
  }
  norm = std::sqrt(norm);
  for (auto& w : direction) w /= norm;

  std::array<std::discrete_distribution<int>, kNumBuckets> label_dists;
  for (int b = 0; b < kNumBuckets; ++b) {
    label_dists[b] = std::discrete_distribution<int>(
        config.bucket_label_profile[b].begin(),
        config.bucket_label_profile[b].end());
  }

  Corpus corpus;
  corpus.feature_dim = dim;
  corpus.provenance = Provenance::kSynthetic;
  corpus.queries.reserve(config.num_queries);
  std::vector<double> nuisance(dim);
  for (std::size_t i = 0; i < config.num_queries; ++i) {
    QueryGroup group;
    group.query_id = config.first_query_id + i;
    group.bucket = static_cast<int>(i % kNumBuckets);
    group.documents.reserve(config.docs_per_query);
    for (std::size_t j = 0; j < config.docs_per_query; ++j) {
      Document doc;
      doc.doc_id = j;
      doc.label = label_dists[group.bucket](rng);
      const double latent = doc.label + config.noise_scale * normal(rng);
      double along = 0.0;
      for (std::size_t f = 0; f < dim; ++f) {
        nuisance[f] = normal(rng);
        along += nuisance[f] * direction[f];
      }
      doc.features.resize(dim);
      for (std::size_t f = 0; f < dim; ++f) {
        doc.features[f] =
            latent * direction[f] + (nuisance[f] - along * direction[f]);
      }
      group.documents.push_back(std::move(doc));
    }
    corpus.queries.push_back(std::move(group));
  }
  return corpus;
}

PoolState SplitPool(const Corpus& corpus, std::size_t base_size,
                    std::uint64_t seed) {
  const std::size_t total = corpus.queries.size();
  if (base_size == 0 || base_size >= total) {
    throw ConfigError("base_size must be in (0, " + std::to_string(total) +
                      ")");
  }
  std::vector<QueryId> ids;
  ids.reserve(total);
  for (const auto& q : corpus.queries) ids.push_back(q.query_id);
  std::mt19937_64 rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);
  PoolState pool;
  pool.labeled.insert(ids.begin(), ids.begin() + base_size);
  pool.unlabeled.insert(ids.begin() + base_size, ids.end());
  return pool;
}

}  // namespace alrank
