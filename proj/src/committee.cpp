#include "alrank/committee.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "alrank/error.hpp"
#include "alrank/json_util.hpp"
#include "alrank/parallel.hpp"

namespace alrank {
namespace {

std::vector<int> Sorted(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  return v;
}

bool IsPrefixOf(const GBRankModel& a, const GBRankModel& b) {
  if (a.trees().size() > b.trees().size()) return false;
  if (a.base_score() != b.base_score() || a.shrinkage() != b.shrinkage() ||
      a.feature_dim() != b.feature_dim()) {
    return false;
  }
  return std::equal(a.trees().begin(), a.trees().end(), b.trees().begin());
}

}  // namespace

void CommitteeConfig::Validate() const {
  if (tree_counts.empty() || depths.empty()) {
    throw ConfigError("committee tree_counts and depths must be non-empty");
  }
  for (int t : tree_counts) {
    if (t < 1) throw ConfigError("committee tree counts must be >= 1");
  }
  for (int d : depths) {
    if (d < 1) throw ConfigError("committee depths must be >= 1");
  }
  if (std::set<int>(tree_counts.begin(), tree_counts.end()).size() !=
          tree_counts.size() ||
      std::set<int>(depths.begin(), depths.end()).size() != depths.size()) {
    throw ConfigError("committee tree_counts and depths must be distinct");
  }
  if (size() < 2) throw ConfigError("committee needs at least 2 members");
  base.Validate();
}

TrainConfig CommitteeConfig::MemberConfig(std::size_t m) const {
  const auto counts = Sorted(tree_counts);
  const auto ds = Sorted(depths);
  if (m >= size()) throw std::out_of_range("committee member index");
  TrainConfig c = base;
  c.num_trees = counts[m / ds.size()];
  c.max_depth = ds[m % ds.size()];
  c.seed = seed + m;
  return c;
}

nlohmann::json CommitteeConfig::ToJson() const {
  return {{"tree_counts", tree_counts},
          {"depths", depths},
          {"shrinkage", base.shrinkage},
          {"min_samples_leaf", base.min_samples_leaf},
          {"temperature", base.temperature},
          {"max_bins", base.max_bins},
          {"seed", seed}};
}

CommitteeConfig CommitteeConfig::FromJson(const nlohmann::json& doc) {
  const std::string where = "committee config";
  json_util::CheckKeys(doc,
                       {"tree_counts", "depths", "shrinkage",
                        "min_samples_leaf", "temperature", "max_bins", "seed"},
                       where);
  CommitteeConfig c;
  json_util::GetOptional(doc, "tree_counts", &c.tree_counts, where);
  json_util::GetOptional(doc, "depths", &c.depths, where);
  json_util::GetOptional(doc, "shrinkage", &c.base.shrinkage, where);
  json_util::GetOptional(doc, "min_samples_leaf", &c.base.min_samples_leaf,
                         where);
  json_util::GetOptional(doc, "temperature", &c.base.temperature, where);
  json_util::GetOptional(doc, "max_bins", &c.base.max_bins, where);
  json_util::GetOptional(doc, "seed", &c.seed, where);
  return c;
}

Committee::Committee(CommitteeConfig config, std::vector<GBRankModel> members)
    : config_(std::move(config)), members_(std::move(members)) {
  const std::size_t m = members_.size();
  std::vector<std::size_t> source(m);
  for (std::size_t i = 0; i < m; ++i) {
    source[i] = i;
    for (std::size_t j = 0; j < m; ++j) {
      if (members_[j].trees().size() > members_[source[i]].trees().size() &&
          IsPrefixOf(members_[i], members_[j])) {
        source[i] = j;
      }
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    auto it = std::find_if(plan_.begin(), plan_.end(), [&](const ScorePlan& p) {
      return p.source == source[i];
    });
    if (it == plan_.end()) {
      plan_.push_back({source[i], {}});
      it = plan_.end() - 1;
    }
    it->checkpoints.emplace_back(members_[i].trees().size(), i);
  }
  for (auto& p : plan_) {
    std::sort(p.checkpoints.begin(), p.checkpoints.end());
  }
}

nlohmann::json Committee::ToJson() const {
  nlohmann::json members = nlohmann::json::array();
  for (const auto& model : members_) members.push_back(model.ToJson());
  return {{"format", "alrank.committee"},
          {"version", 1},
          {"manifest", config_.ToJson()},
          {"members", std::move(members)}};
}

Committee Committee::FromJson(const nlohmann::json& doc) {
  if (!doc.is_object() ||
      doc.value("format", std::string()) != "alrank.committee") {
    throw DataError("not an alrank.committee document");
  }
  CommitteeConfig config;
  try {
    config = CommitteeConfig::FromJson(doc.at("manifest"));
  } catch (const nlohmann::json::exception&) {
    throw DataError("committee: missing manifest");
  } catch (const ConfigError& e) {
    throw DataError(std::string("committee manifest: ") + e.what());
  }
  auto it = doc.find("members");
  if (it == doc.end() || !it->is_array() || it->empty()) {
    throw DataError("committee: missing members");
  }
  std::vector<GBRankModel> members;
  for (const auto& m : *it) members.push_back(GBRankModel::FromJson(m));
  const std::size_t dim = members.front().feature_dim();
  for (const auto& m : members) {
    if (m.feature_dim() != dim) {
      throw DataError("committee: members disagree on feature dimensionality");
    }
  }
  return Committee(std::move(config), std::move(members));
}

void Committee::Write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kRuntime, "cannot write " + path);
  out << ToJson().dump() << '\n';
  if (!out) throw Error(ErrorKind::kRuntime, "write failed for " + path);
}

Committee Committee::Read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open committee file " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": invalid JSON: " + e.what());
  }
  return FromJson(doc);
}

Committee TrainCommittee(const QueryRefs& queries, const CommitteeConfig& config,
                         unsigned threads) {
  config.Validate();
  const auto counts = Sorted(config.tree_counts);
  const auto depths = Sorted(config.depths);
  const std::size_t num_depths = depths.size();
  const std::size_t largest = counts.size() - 1;

  std::vector<GBRankModel> full(num_depths);
  ParallelFor(num_depths, threads, [&](std::size_t d) {
    full[d] = Train(queries, config.MemberConfig(largest * num_depths + d));
  });

  std::vector<GBRankModel> members;
  members.reserve(config.size());
  for (std::size_t m = 0; m < config.size(); ++m) {
    const TrainConfig member_config = config.MemberConfig(m);
    const GBRankModel& source = full[m % num_depths];
    std::vector<RegressionTree> trees(
        source.trees().begin(), source.trees().begin() + member_config.num_trees);
    members.emplace_back(source.feature_dim(), source.base_score(),
                         source.shrinkage(), member_config, std::move(trees));
  }
  return Committee(config, std::move(members));
}

void ScoreMatrix::Validate() const {
  if (members_ == 0 || docs_ == 0) throw DataError("empty score matrix");
  for (double v : data_) {
    if (!std::isfinite(v)) throw DataError("non-finite committee score");
  }
}

ScoreMatrix ScoreQuery(const Committee& committee, const QueryGroup& group) {
  if (committee.size() == 0) throw DataError("empty committee");
  ScoreMatrix matrix(group.query_id, committee.size(), group.documents.size());
  for (std::size_t j = 0; j < group.documents.size(); ++j) {
    const auto& features = group.documents[j].features;
    if (features.size() != committee.members_.front().feature_dim()) {
      throw DataError("query " + std::to_string(group.query_id) +
                      ": feature dimensionality does not match committee");
    }
    for (const auto& plan : committee.plan_) {
      const GBRankModel& source = committee.members_[plan.source];
      const auto& trees = source.trees();
      double sum = 0.0;
      std::size_t t = 0;
      for (const auto& [count, member] : plan.checkpoints) {
        for (; t < count; ++t) sum += trees[t].Predict(features);
        matrix.at(member, j) = source.base_score() + source.shrinkage() * sum;
      }
    }
  }
  return matrix;
}

std::vector<ScoreMatrix> ScoreQueries(const Committee& committee,
                                      const QueryRefs& groups,
                                      unsigned threads) {
  std::vector<ScoreMatrix> out(groups.size());
  ParallelFor(groups.size(), threads, [&](std::size_t i) {
    out[i] = ScoreQuery(committee, *groups[i]);
  });
  return out;
}

}  // namespace alrank
