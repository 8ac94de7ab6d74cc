#ifndef ALRANK_SIMULATOR_HPP_
#define ALRANK_SIMULATOR_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "alrank/acquisition.hpp"
#include "alrank/committee.hpp"
#include "alrank/dataset.hpp"
#include "alrank/gbrank.hpp"
#include "alrank/metrics.hpp"
#include "json.hpp"

namespace alrank {

// Fixed offsets from the run seed for each randomized subsystem.
inline constexpr std::uint64_t kCommitteeSeedOffset = 100;
inline constexpr std::uint64_t kRankerSeedOffset = 200;
inline constexpr std::uint64_t kSelectionSeedOffset = 1000;

struct ALConfig {
  std::size_t base_size = 100;
  std::size_t batch_size = 100;
  std::size_t cycles = 20;
  std::size_t quota = 2000;
  double alpha = 1.0;
  double temperature = 1.0;
  Strategy strategy = Strategy::kRePv;
  CommitteeConfig committee;
  // Production ranker evaluated on validation; its temperature and seed are
  // taken from this config.
  TrainConfig ranker;
  int eval_k = 4;
  GainFn gain;
  std::uint64_t seed = 0;

  void Validate() const;
  TrainConfig RankerConfig() const;
  CommitteeConfig CommitteeSettings() const;
  AcquisitionParams Acquisition() const;
};

// Reveals labels for `qids`, moving them from unlabeled to labeled. Throws
// DataError if any id is not currently unlabeled.
PoolState OracleAnnotate(const PoolState& pool, std::span<const QueryId> qids);

struct EvalPoint {
  std::size_t labeled = 0;
  std::size_t valid_pairs = 0;
  std::size_t neg_pos_pairs = 0;
  double dcg = 0.0;
  double r01 = 0.0;
};

struct CycleReport {
  std::size_t cycle = 0;
  std::size_t selected = 0;
  EvalPoint eval;
  // Pairs contributed by this cycle's batch alone.
  std::size_t batch_valid_pairs = 0;
  std::size_t batch_neg_pos_pairs = 0;
  BucketHistogram buckets{};
  DistributionStats pmf_stats;
};

struct BaselineComparison {
  std::string baseline;  // strategy name of the baseline run
  double mean_dcg = 0.0;
  double baseline_mean_dcg = 0.0;
  double dcg_change_pct = 0.0;
  double mean_r01 = 0.0;
  double baseline_mean_r01 = 0.0;
  double r01_change_pct = 0.0;
  double valid_pairs_change_pct = 0.0;
  double neg_pos_change_pct = 0.0;
};

struct RunReport {
  nlohmann::json config;
  std::string timestamp;  // metadata only, excluded from comparisons
  EvalPoint initial;
  std::vector<CycleReport> cycles;
  std::string stop_reason;
  std::optional<BaselineComparison> baseline;

  double MeanDcg() const;
  double MeanR01() const;
  // Config echo strategy name.
  std::string StrategyLabel() const;

  nlohmann::json ToJson() const;
  static RunReport FromJson(const nlohmann::json& doc);
  // cycle,labeled,valid_pairs,neg_pos_pairs,dcg<k>,r01,bucket_0..bucket_9
  void WriteCsv(std::ostream& out) const;
};

// Relative changes of `run` over `baseline`, in percent: mean DCG and R01
// over cycles, and pairs in the final labeled set.
BaselineComparison CompareRuns(const RunReport& run, const RunReport& baseline);

struct RunOptions {
  unsigned threads = 1;
  // Also train a committee on the final labeled set.
  bool final_committee = false;
};

struct RunResult {
  RunReport report;
  std::optional<Committee> committee;
};

// Pool-based active learning: split a labeled base off `corpus`, then each
// cycle trains the committee on the labeled set, scores the unlabeled pool,
// selects a batch, reveals its labels, retrains the production ranker and
// evaluates it on `validation`. Stops early, with a partial report, when
// the quota or the pool runs out.
RunResult RunActiveLearning(const Corpus& corpus, const Corpus& validation,
                            const ALConfig& config,
                            const RunOptions& options = {});

struct CorrelationRow {
  QueryId query_id = 0;
  int bucket = 0;
  double lv = 0.0;
  double pv = 0.0;
  double best_dcg = 0.0;
};

struct CorrelationStudy {
  int k = 4;
  std::vector<CorrelationRow> rows;
  std::optional<double> lv_pv;
  std::optional<double> best_dcg_lv;
  std::optional<double> best_dcg_pv;

  // query_id,bucket,lv,pv,best_dcg<k>
  void WriteCsv(std::ostream& out) const;
  nlohmann::json PearsonJson() const;
};

// Per-query LV, committee PV and best DCG@k, plus their Pearson pairs. A
// pair is left empty when either column is constant.
CorrelationStudy RunCorrelationStudy(const QueryRefs& queries,
                                     const Committee& committee, int k,
                                     const GainFn& gain, unsigned threads = 1);

struct SelectionResult {
  Strategy strategy = Strategy::kRandom;
  std::vector<QueryId> selected;
  BucketHistogram buckets{};
  LabelHistogram labels{};
  PairCounts pairs;
};

// Selects `count` queries from `candidates` under every strategy and
// tabulates what each picked.
std::vector<SelectionResult> RunSelectionStudy(
    const QueryRefs& candidates, const Committee& committee,
    std::size_t count, const AcquisitionParams& params, std::uint64_t seed,
    unsigned threads = 1);

// strategy,bucket,count
void WriteBucketCsv(std::ostream& out,
                    std::span<const SelectionResult> results);
// strategy,bucket,label,count
void WriteLabelCsv(std::ostream& out, std::span<const SelectionResult> results);

}  // namespace alrank

#endif  // ALRANK_SIMULATOR_HPP_
