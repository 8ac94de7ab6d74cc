#ifndef ALRANK_ACQUISITION_HPP_
#define ALRANK_ACQUISITION_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "alrank/committee.hpp"
#include "alrank/dataset.hpp"
#include "alrank/metrics.hpp"

namespace alrank {

// Probability that a document scored s_u ranks above one scored s_v:
// 1 / (1 + exp(-(s_u - s_v) / T)).
double PairwiseProb(double s_u, double s_v, double temperature);

struct RankDistribution {
  std::vector<double> pmf;  // pmf[r] = P(rank == r), rank 0 is the top
};

// Rank distribution of every document under one committee member. The rank
// of document v counts the other documents that beat it; each comparator u
// is folded in with one step of
//   p'(r) = p(r - 1) * P(u beats v) + p(r) * (1 - P(u beats v)),
// starting from p = delta(0) and growing the support by one rank per
// comparator. The result is the Poisson-binomial law of that count.
std::vector<RankDistribution> RankDistributions(std::span<const double> scores,
                                                double temperature);

// Shannon entropy (bits) of the element-wise mean of the given pmfs.
double DocEntropy(std::span<const RankDistribution> member_pmfs);

// Extremes observed over every pmf produced while computing ranking entropy.
struct DistributionStats {
  std::size_t count = 0;
  double max_sum_error = 0.0;  // max |sum(pmf) - 1|
  double min_entry = 0.0;

  void Merge(const DistributionStats& other);
};

// Mean over documents of DocEntropy, in [0, log2 N].
double RankingEntropy(const ScoreMatrix& scores, double temperature,
                      DistributionStats* stats = nullptr);

// Mean over members of the population standard deviation of that member's
// scores.
double PredictionVariance(const ScoreMatrix& scores);

// Population standard deviation of the labels.
double LabelVariance(std::span<const int> labels);

// Expected-loss-of-DCG baseline: mean member DCG@k ranking by that member's
// scores with pseudo-grades max(score, 0), minus DCG@k ranking by the
// per-document mean score with pseudo-grades max(mean, 0).
double EloDcg(const ScoreMatrix& scores, int k, const GainFn& gain);

inline double AcquisitionScore(double re, double pv, double alpha) {
  return re + alpha * pv;
}

enum class Strategy { kRandom, kRe, kPv, kLv, kRePv, kEloDcg };

std::string StrategyName(Strategy s);
Strategy ParseStrategy(const std::string& name);
std::vector<Strategy> AllStrategies();

struct QueryScore {
  QueryId query_id = 0;
  int bucket = 0;
  double re = 0.0;
  double pv = 0.0;
  double lv = 0.0;
  double elo_dcg = 0.0;
  double f = 0.0;
};

struct AcquisitionParams {
  double alpha = 1.0;
  double temperature = 1.0;
  int k = 4;
  GainFn gain;
};

// Computes every criterion for each group from committee scores. lv reads
// the groups' labels, so it is only meaningful where labels are known.
std::vector<QueryScore> ScorePool(const Committee& committee,
                                  const QueryRefs& groups,
                                  const AcquisitionParams& params,
                                  unsigned threads = 1,
                                  DistributionStats* stats = nullptr);

// Top-bs query ids by the strategy's criterion, descending, ties broken by
// ascending query id. kRandom samples bs ids uniformly without replacement
// using `seed` and ignores the scores. Throws ConfigError if bs exceeds the
// pool size.
std::vector<QueryId> SelectBatch(std::span<const QueryScore> pool,
                                 std::size_t bs, Strategy strategy,
                                 std::uint64_t seed = 0);

// CSV with header query_id,bucket,re,pv,lv,elo_dcg,f.
void WriteScoresCsv(std::ostream& out, std::span<const QueryScore> scores);

}  // namespace alrank

#endif  // ALRANK_ACQUISITION_HPP_
