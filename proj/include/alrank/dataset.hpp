#ifndef ALRANK_DATASET_HPP_
#define ALRANK_DATASET_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace alrank {

inline constexpr int kMaxLabel = 4;
inline constexpr int kNumLabels = kMaxLabel + 1;
inline constexpr int kNumBuckets = 10;
// Bucket assigned to queries that carry no frequency annotation.
inline constexpr int kDefaultBucket = kNumBuckets - 1;

using QueryId = std::uint64_t;

struct Document {
  std::size_t doc_id = 0;
  std::vector<double> features;
  int label = 0;

  bool operator==(const Document&) const = default;
};

struct QueryGroup {
  QueryId query_id = 0;
  int bucket = kDefaultBucket;
  std::vector<Document> documents;

  std::vector<int> Labels() const;

  bool operator==(const QueryGroup&) const = default;
};

enum class Provenance { kParsed, kSynthetic };

const char* ProvenanceName(Provenance p);

struct Corpus {
  std::size_t feature_dim = 0;
  std::vector<QueryGroup> queries;
  Provenance provenance = Provenance::kParsed;
  // Number of labels above kMaxLabel that the parser clamped. Not part of
  // corpus identity.
  std::size_t clamped_labels = 0;

  std::size_t NumDocuments() const;
  // Returns nullptr when the id is absent.
  const QueryGroup* Find(QueryId id) const;
  // Throws DataError if any structural invariant is violated.
  void Validate() const;

  bool operator==(const Corpus& other) const {
    return feature_dim == other.feature_dim && queries == other.queries &&
           provenance == other.provenance;
  }
};

// Non-owning list of query groups, typically a subset of one corpus.
using QueryRefs = std::vector<const QueryGroup*>;

QueryRefs AllQueries(const Corpus& corpus);
// Groups for the given ids, in corpus order. Throws DataError on unknown ids.
QueryRefs SelectQueries(const Corpus& corpus, const std::set<QueryId>& ids);

// LETOR / SVMlight text: `<label> qid:<id> <idx>:<val> ... [# comment]`.
// A `bucket=<b>` token in the comment sets the query's frequency bucket.
Corpus ParseLetor(std::string_view text);
Corpus ReadLetorFile(const std::string& path);
std::string SerializeLetor(const Corpus& corpus);
void WriteLetorFile(const Corpus& corpus, const std::string& path);

using LabelProfile = std::array<std::array<double, kNumLabels>, kNumBuckets>;

// Linear interpolation between a relevance-rich head bucket and a tail
// bucket where label 0 holds 75% of the mass.
LabelProfile DefaultLabelProfile();

struct SynthConfig {
  std::size_t num_queries = 1000;
  std::size_t docs_per_query = 30;
  std::size_t feature_dim = 8;
  LabelProfile bucket_label_profile = DefaultLabelProfile();
  double noise_scale = 0.5;
  QueryId first_query_id = 1;

  void Validate() const;
};

// Each document's features are t * w + (nuisance orthogonal to w), where w
// is a fixed unit direction with positive components and
// t = label + noise_scale * N(0, 1). With noise_scale = 0 the projection on
// w recovers the label exactly. Query i gets id first_query_id + i and bucket i % 10.
Corpus GenerateSynthetic(const SynthConfig& config, std::uint64_t seed);

struct PoolState {
  std::set<QueryId> labeled;
  std::set<QueryId> unlabeled;

  bool operator==(const PoolState&) const = default;
};

// Picks base_size query ids uniformly at random as the labeled base.
PoolState SplitPool(const Corpus& corpus, std::size_t base_size,
                    std::uint64_t seed);

}  // namespace alrank

#endif  // ALRANK_DATASET_HPP_
