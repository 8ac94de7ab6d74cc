#ifndef ALRANK_METRICS_HPP_
#define ALRANK_METRICS_HPP_

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "alrank/dataset.hpp"

namespace alrank {

enum class GainKind { kExponential, kLinear };

// Maps a (possibly fractional) grade to a gain: 2^g - 1 or g.
struct GainFn {
  GainKind kind = GainKind::kExponential;

  double operator()(double grade) const;
  std::string Name() const;
  static GainFn Parse(const std::string& name);
};

// Sum over the first min(k, N) positions of gain / log2(position + 1).
double DcgAtK(std::span<const int> ranked_labels, int k, const GainFn& gain);
double DcgAtK(std::span<const double> ranked_grades, int k, const GainFn& gain);
// DCG of the labels sorted in descending order.
double BestDcgAtK(std::span<const int> labels, int k, const GainFn& gain);
// Irrelevant (label 0/1) count in the top min(k, N), divided by k.
double R01AtK(std::span<const int> ranked_labels, int k);

// Document positions sorted by descending score; ties keep document order.
std::vector<std::size_t> OrderByScore(std::span<const double> scores);

// Pearson correlation. Throws DataError for mismatched or short inputs and
// for constant inputs, where the coefficient is undefined.
double Pearson(std::span<const double> x, std::span<const double> y);
// Same, but returns nullopt instead of throwing on constant input.
std::optional<double> TryPearson(std::span<const double> x,
                                 std::span<const double> y);

using BucketHistogram = std::array<std::size_t, kNumBuckets>;
using LabelHistogram =
    std::array<std::array<std::size_t, kNumLabels>, kNumBuckets>;

BucketHistogram BucketDistribution(const QueryRefs& selected);
LabelHistogram LabelDistribution(const QueryRefs& selected);

struct EvalReport {
  int k = 4;
  std::size_t num_queries = 0;
  double dcg_k = 0.0;       // mean over queries
  double best_dcg_k = 0.0;  // mean over queries
  double r01 = 0.0;         // mean over queries
};

// Averages per-query metrics given per-query model scores aligned with
// each group's documents.
EvalReport EvaluateRanking(const QueryRefs& queries,
                           const std::vector<std::vector<double>>& scores,
                           int k, const GainFn& gain);

}  // namespace alrank

#endif  // ALRANK_METRICS_HPP_
