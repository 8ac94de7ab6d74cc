#ifndef ALRANK_COMMITTEE_HPP_
#define ALRANK_COMMITTEE_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "alrank/dataset.hpp"
#include "alrank/gbrank.hpp"
#include "json.hpp"

namespace alrank {

struct CommitteeConfig {
  std::vector<int> tree_counts = {100, 300, 500};
  std::vector<int> depths = {1, 3, 5};
  // num_trees and max_depth are overridden per member.
  TrainConfig base;
  std::uint64_t seed = 0;

  std::size_t size() const { return tree_counts.size() * depths.size(); }
  void Validate() const;
  // Member m's training config; members are ordered by (tree_count, depth).
  TrainConfig MemberConfig(std::size_t m) const;

  nlohmann::json ToJson() const;
  static CommitteeConfig FromJson(const nlohmann::json& doc);
};

class ScoreMatrix;

class Committee {
 public:
  Committee() = default;
  Committee(CommitteeConfig config, std::vector<GBRankModel> members);

  std::size_t size() const { return members_.size(); }
  const std::vector<GBRankModel>& members() const { return members_; }
  const CommitteeConfig& config() const { return config_; }

  // Archive: {"manifest": config, "members": [model documents]}.
  nlohmann::json ToJson() const;
  static Committee FromJson(const nlohmann::json& doc);
  void Write(const std::string& path) const;
  static Committee Read(const std::string& path);

 private:
  friend ScoreMatrix ScoreQuery(const Committee&, const QueryGroup&);

  CommitteeConfig config_;
  std::vector<GBRankModel> members_;
  // Members whose trees are a prefix of another member's are scored during
  // that member's tree walk. Each plan entry is a source member plus the
  // (tree count, member) checkpoints read off its running sum.
  struct ScorePlan {
    std::size_t source;
    std::vector<std::pair<std::size_t, std::size_t>> checkpoints;
  };
  std::vector<ScorePlan> plan_;
};

// Trains one member per (tree_count, depth) combination on the same data,
// with member seed = config.seed + m. Members that differ only in tree count
// share their boosting trajectory, so each depth is boosted once up to the
// largest count and the smaller members are its prefixes.
Committee TrainCommittee(const QueryRefs& queries, const CommitteeConfig& config,
                         unsigned threads = 1);

// M x N matrix of member scores; rows are members, columns documents.
class ScoreMatrix {
 public:
  ScoreMatrix() = default;
  ScoreMatrix(QueryId query_id, std::size_t members, std::size_t docs)
      : query_id_(query_id),
        members_(members),
        docs_(docs),
        data_(members * docs, 0.0) {}

  QueryId query_id() const { return query_id_; }
  std::size_t members() const { return members_; }
  std::size_t docs() const { return docs_; }
  double& at(std::size_t m, std::size_t j) { return data_[m * docs_ + j]; }
  double at(std::size_t m, std::size_t j) const { return data_[m * docs_ + j]; }
  std::span<const double> row(std::size_t m) const {
    return {data_.data() + m * docs_, docs_};
  }
  std::span<double> row(std::size_t m) { return {data_.data() + m * docs_, docs_}; }
  // Throws DataError on an empty shape or non-finite entries.
  void Validate() const;

  bool operator==(const ScoreMatrix&) const = default;

 private:
  QueryId query_id_ = 0;
  std::size_t members_ = 0;
  std::size_t docs_ = 0;
  std::vector<double> data_;
};

ScoreMatrix ScoreQuery(const Committee& committee, const QueryGroup& group);

// Scores every group; parallel over groups, identical to sequential calls.
std::vector<ScoreMatrix> ScoreQueries(const Committee& committee,
                                      const QueryRefs& groups,
                                      unsigned threads = 1);

}  // namespace alrank

#endif  // ALRANK_COMMITTEE_HPP_
