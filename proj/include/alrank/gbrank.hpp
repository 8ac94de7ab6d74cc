#ifndef ALRANK_GBRANK_HPP_
#define ALRANK_GBRANK_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "alrank/dataset.hpp"
#include "alrank/tree.hpp"
#include "json.hpp"

namespace alrank {

struct TrainConfig {
  int num_trees = 200;
  int max_depth = 3;
  double shrinkage = 0.1;
  int min_samples_leaf = 5;
  // Shared with the pairwise probability used by the acquisition criteria.
  double temperature = 1.0;
  int max_bins = 64;
  std::uint64_t seed = 0;

  void Validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct RankPair {
  QueryId query_id = 0;
  std::size_t winner = 0;  // doc_id
  std::size_t loser = 0;   // doc_id
};

struct PairSet {
  std::vector<RankPair> pairs;
  std::size_t valid = 0;
  // Pairs where the loser is irrelevant (label 0/1) and the winner is
  // relevant (label 2..4).
  std::size_t neg_pos = 0;
};

inline bool IsIrrelevant(int label) { return label <= 1; }

PairSet BuildPairs(const QueryRefs& queries);

// Counts only; avoids materializing the pair list.
struct PairCounts {
  std::size_t valid = 0;
  std::size_t neg_pos = 0;
};
PairCounts CountPairs(const QueryRefs& queries);
PairCounts CountPairs(std::span<const int> labels);

// Model scores keyed by query id, indexed by doc_id.
using DocScores = std::map<QueryId, std::vector<double>>;

// Mean over pairs of -ln sigmoid((s_winner - s_loser) / temperature); 0 for
// an empty pair set. Throws DataError if a referenced score is missing.
double PairwiseLoss(const DocScores& scores, const PairSet& pairs,
                    double temperature);

class GBRankModel {
 public:
  GBRankModel() = default;
  GBRankModel(std::size_t feature_dim, double base_score, double shrinkage,
              TrainConfig config, std::vector<RegressionTree> trees)
      : feature_dim_(feature_dim),
        base_score_(base_score),
        shrinkage_(shrinkage),
        config_(config),
        trees_(std::move(trees)) {}

  // base_score + shrinkage * sum of tree outputs. Throws DataError on a
  // dimensionality mismatch.
  double Predict(std::span<const double> features) const;
  // Same as Predict but only over the first `num_trees` trees.
  double PredictPrefix(std::span<const double> features,
                       std::size_t num_trees) const;

  // A model made of the first `num_trees` trees.
  GBRankModel Truncated(std::size_t num_trees) const;

  std::size_t feature_dim() const { return feature_dim_; }
  double base_score() const { return base_score_; }
  double shrinkage() const { return shrinkage_; }
  const TrainConfig& config() const { return config_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }

  nlohmann::json ToJson() const;
  static GBRankModel FromJson(const nlohmann::json& doc);

  bool operator==(const GBRankModel&) const = default;

 private:
  std::size_t feature_dim_ = 0;
  double base_score_ = 0.0;
  double shrinkage_ = 0.1;
  TrainConfig config_;
  std::vector<RegressionTree> trees_;
};

// Functional gradient boosting on the pairwise logistic loss. Each round
// fits a least-squares tree to the per-document negative gradient of the
// summed pair loss and adds it scaled by the shrinkage. If loss_trace is
// non-null it receives the mean pair loss before the first round and after
// every round (num_trees + 1 values). Throws DataError when the labeled
// queries contain no valid pair.
GBRankModel Train(const QueryRefs& queries, const TrainConfig& config,
                  std::vector<double>* loss_trace = nullptr);

// Fraction of pairs the model orders correctly (ties count as wrong).
double PairwiseAccuracy(const GBRankModel& model, const QueryRefs& queries);

nlohmann::json TrainConfigToJson(const TrainConfig& config);
TrainConfig TrainConfigFromJson(const nlohmann::json& doc);

}  // namespace alrank

#endif  // ALRANK_GBRANK_HPP_
