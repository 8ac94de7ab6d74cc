#include "alrank/gbrank.hpp"

#include <cmath>
#include <numeric>

#include "alrank/error.hpp"
#include "alrank/json_util.hpp"

namespace alrank {
namespace {

// ln(1 + e^x) without overflow.
double Softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

struct IndexPair {
  std::uint32_t winner;
  std::uint32_t loser;
};

// Mean pair loss at `scores`; fills `residual` with the negative gradient of
// the summed loss.
double LossAndResidual(std::span<const double> scores,
                       std::span<const IndexPair> pairs, double temperature,
                       std::vector<double>* residual) {
  std::fill(residual->begin(), residual->end(), 0.0);
  double loss = 0.0;
  for (const IndexPair& p : pairs) {
    const double margin = (scores[p.winner] - scores[p.loser]) / temperature;
    loss += Softplus(-margin);
    const double g = 1.0 / (1.0 + std::exp(margin)) / temperature;
    (*residual)[p.winner] += g;
    (*residual)[p.loser] -= g;
  }
  return loss / static_cast<double>(pairs.size());
}

}  // namespace

void TrainConfig::Validate() const {
  if (num_trees < 1) throw ConfigError("num_trees must be >= 1");
  if (max_depth < 1) throw ConfigError("max_depth must be >= 1");
  if (!(shrinkage > 0.0 && shrinkage <= 1.0)) {
    throw ConfigError("shrinkage must be in (0, 1]");
  }
  if (min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be >= 1");
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ConfigError("temperature must be > 0");
  }
  if (max_bins < 2 || max_bins > 65535) {
    throw ConfigError("max_bins must be in [2, 65535]");
  }
}

PairCounts CountPairs(std::span<const int> labels) {
  std::size_t hist[kNumLabels] = {};
  for (int l : labels) ++hist[std::clamp(l, 0, kMaxLabel)];
  PairCounts counts;
  for (int a = 0; a < kNumLabels; ++a) {
    for (int b = a + 1; b < kNumLabels; ++b) {
      counts.valid += hist[a] * hist[b];
      if (IsIrrelevant(a) && !IsIrrelevant(b)) counts.neg_pos += hist[a] * hist[b];
    }
  }
  return counts;
}

PairCounts CountPairs(const QueryRefs& queries) {
  PairCounts total;
  for (const QueryGroup* q : queries) {
    const PairCounts c = CountPairs(q->Labels());
    total.valid += c.valid;
    total.neg_pos += c.neg_pos;
  }
  return total;
}

PairSet BuildPairs(const QueryRefs& queries) {
  PairSet set;
  for (const QueryGroup* q : queries) {
    const auto& docs = q->documents;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      for (std::size_t j = i + 1; j < docs.size(); ++j) {
        if (docs[i].label == docs[j].label) continue;
        const bool i_wins = docs[i].label > docs[j].label;
        const Document& winner = i_wins ? docs[i] : docs[j];
        const Document& loser = i_wins ? docs[j] : docs[i];
        set.pairs.push_back({q->query_id, winner.doc_id, loser.doc_id});
        if (IsIrrelevant(loser.label) && !IsIrrelevant(winner.label)) {
          ++set.neg_pos;
        }
      }
    }
  }
  set.valid = set.pairs.size();
  return set;
}

double PairwiseLoss(const DocScores& scores, const PairSet& pairs,
                    double temperature) {
  if (!(temperature > 0.0)) throw ConfigError("temperature must be > 0");
  if (pairs.pairs.empty()) return 0.0;
  double loss = 0.0;
  for (const RankPair& p : pairs.pairs) {
    auto it = scores.find(p.query_id);
    if (it == scores.end() || p.winner >= it->second.size() ||
        p.loser >= it->second.size()) {
      throw DataError("missing score for query " + std::to_string(p.query_id));
    }
    const double margin =
        (it->second[p.winner] - it->second[p.loser]) / temperature;
    loss += Softplus(-margin);
  }
  return loss / static_cast<double>(pairs.pairs.size());
}

double GBRankModel::Predict(std::span<const double> features) const {
  return PredictPrefix(features, trees_.size());
}

double GBRankModel::PredictPrefix(std::span<const double> features,
                                  std::size_t num_trees) const {
  if (features.size() != feature_dim_) {
    throw DataError("feature dimensionality " +
                    std::to_string(features.size()) + " != model's " +
                    std::to_string(feature_dim_));
  }
  const std::size_t n = std::min(num_trees, trees_.size());
  double sum = 0.0;
  for (std::size_t t = 0; t < n; ++t) sum += trees_[t].Predict(features);
  return base_score_ + shrinkage_ * sum;
}

GBRankModel GBRankModel::Truncated(std::size_t num_trees) const {
  const std::size_t n = std::min(num_trees, trees_.size());
  TrainConfig config = config_;
  config.num_trees = static_cast<int>(n);
  return GBRankModel(feature_dim_, base_score_, shrinkage_, config,
                     std::vector<RegressionTree>(trees_.begin(),
                                                 trees_.begin() + n));
}

GBRankModel Train(const QueryRefs& queries, const TrainConfig& config,
                  std::vector<double>* loss_trace) {
  config.Validate();
  if (queries.empty()) throw DataError("no labeled queries to train on");
  const std::size_t dim = queries.front()->documents.front().features.size();

  std::vector<double> rows;
  std::vector<IndexPair> pairs;
  std::uint32_t offset = 0;
  for (const QueryGroup* q : queries) {
    const auto& docs = q->documents;
    for (const Document& d : docs) {
      if (d.features.size() != dim) {
        throw DataError("inconsistent feature dimensionality in training data");
      }
      rows.insert(rows.end(), d.features.begin(), d.features.end());
    }
    for (std::uint32_t i = 0; i < docs.size(); ++i) {
      for (std::uint32_t j = i + 1; j < docs.size(); ++j) {
        if (docs[i].label == docs[j].label) continue;
        if (docs[i].label > docs[j].label) {
          pairs.push_back({offset + i, offset + j});
        } else {
          pairs.push_back({offset + j, offset + i});
        }
      }
    }
    offset += static_cast<std::uint32_t>(docs.size());
  }
  if (pairs.empty()) {
    throw DataError("training data has no valid pairs (all labels tied)");
  }

  const std::size_t n = offset;
  const BinnedFeatures binned(rows, dim, static_cast<std::size_t>(config.max_bins));
  std::vector<std::uint32_t> all_rows(n);
  std::iota(all_rows.begin(), all_rows.end(), 0u);
  std::vector<double> scores(n, 0.0);
  std::vector<double> residual(n, 0.0);
  std::vector<int> leaf_of_row;
  const TreeParams params{config.max_depth, config.min_samples_leaf};

  if (loss_trace != nullptr) loss_trace->clear();
  double loss =
      LossAndResidual(scores, pairs, config.temperature, &residual);
  if (loss_trace != nullptr) loss_trace->push_back(loss);

  std::vector<RegressionTree> trees;
  trees.reserve(static_cast<std::size_t>(config.num_trees));
  for (int round = 0; round < config.num_trees; ++round) {
    RegressionTree tree =
        FitTree(binned, residual, all_rows, params, &leaf_of_row);
    const auto& nodes = tree.nodes();
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] += config.shrinkage * nodes[leaf_of_row[i]].value;
    }
    trees.push_back(std::move(tree));
    loss = LossAndResidual(scores, pairs, config.temperature, &residual);
    if (loss_trace != nullptr) loss_trace->push_back(loss);
  }
  return GBRankModel(dim, 0.0, config.shrinkage, config, std::move(trees));
}

double PairwiseAccuracy(const GBRankModel& model, const QueryRefs& queries) {
  std::size_t correct = 0;
  std::size_t total = 0;
  for (const QueryGroup* q : queries) {
    std::vector<double> s;
    s.reserve(q->documents.size());
    for (const Document& d : q->documents) s.push_back(model.Predict(d.features));
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (std::size_t j = i + 1; j < s.size(); ++j) {
        const int li = q->documents[i].label;
        const int lj = q->documents[j].label;
        if (li == lj) continue;
        ++total;
        if ((li > lj && s[i] > s[j]) || (lj > li && s[j] > s[i])) ++correct;
      }
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / total;
}

nlohmann::json TrainConfigToJson(const TrainConfig& c) {
  return {{"num_trees", c.num_trees},
          {"max_depth", c.max_depth},
          {"shrinkage", c.shrinkage},
          {"min_samples_leaf", c.min_samples_leaf},
          {"temperature", c.temperature},
          {"max_bins", c.max_bins},
          {"seed", c.seed}};
}

TrainConfig TrainConfigFromJson(const nlohmann::json& doc) {
  const std::string where = "train config";
  json_util::CheckKeys(doc,
                       {"num_trees", "max_depth", "shrinkage",
                        "min_samples_leaf", "temperature", "max_bins", "seed"},
                       where);
  TrainConfig c;
  json_util::GetOptional(doc, "num_trees", &c.num_trees, where);
  json_util::GetOptional(doc, "max_depth", &c.max_depth, where);
  json_util::GetOptional(doc, "shrinkage", &c.shrinkage, where);
  json_util::GetOptional(doc, "min_samples_leaf", &c.min_samples_leaf, where);
  json_util::GetOptional(doc, "temperature", &c.temperature, where);
  json_util::GetOptional(doc, "max_bins", &c.max_bins, where);
  json_util::GetOptional(doc, "seed", &c.seed, where);
  return c;
}

nlohmann::json GBRankModel::ToJson() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const RegressionTree& tree : trees_) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& node : tree.nodes()) {
      if (node.is_leaf()) {
        nodes.push_back({{"value", node.value}});
      } else {
        nodes.push_back({{"feature", node.feature},
                         {"threshold", node.threshold},
                         {"left", node.left},
                         {"right", node.right},
                         {"value", node.value}});
      }
    }
    trees.push_back({{"nodes", std::move(nodes)}});
  }
  return {{"format", "alrank.gbrank"},
          {"version", 1},
          {"feature_dim", feature_dim_},
          {"base_score", base_score_},
          {"shrinkage", shrinkage_},
          {"config", TrainConfigToJson(config_)},
          {"trees", std::move(trees)}};
}

GBRankModel GBRankModel::FromJson(const nlohmann::json& doc) {
  const std::string where = "gbrank model";
  if (!doc.is_object() ||
      doc.value("format", std::string()) != "alrank.gbrank") {
    throw DataError(where + ": not an alrank.gbrank document");
  }
  const auto dim = json_util::GetRequired<std::size_t>(doc, "feature_dim", where);
  const auto base = json_util::GetRequired<double>(doc, "base_score", where);
  const auto shrinkage = json_util::GetRequired<double>(doc, "shrinkage", where);
  TrainConfig config;
  try {
    config = TrainConfigFromJson(doc.at("config"));
  } catch (const nlohmann::json::exception&) {
    throw DataError(where + ": missing config");
  } catch (const ConfigError& e) {
    throw DataError(e.what());
  }
  std::vector<RegressionTree> trees;
  const auto& tree_docs = doc.find("trees");
  if (tree_docs == doc.end() || !tree_docs->is_array()) {
    throw DataError(where + ": missing trees");
  }
  for (const auto& tree_doc : *tree_docs) {
    std::vector<TreeNode> nodes;
    try {
      for (const auto& n : tree_doc.at("nodes")) {
        TreeNode node;
        node.value = n.at("value").get<double>();
        if (n.contains("feature")) {
          node.feature = n.at("feature").get<int>();
          node.threshold = n.at("threshold").get<double>();
          node.left = n.at("left").get<int>();
          node.right = n.at("right").get<int>();
        }
        nodes.push_back(node);
      }
    } catch (const nlohmann::json::exception&) {
      throw DataError(where + ": malformed tree node");
    }
    const int count = static_cast<int>(nodes.size());
    for (int i = 0; i < count; ++i) {
      const TreeNode& node = nodes[i];
      if (node.is_leaf()) continue;
      if (node.feature >= static_cast<int>(dim) || node.left <= i ||
          node.right <= i || node.left >= count || node.right >= count) {
        throw DataError(where + ": invalid tree structure");
      }
    }
    trees.emplace_back(std::move(nodes));
  }
  return GBRankModel(dim, base, shrinkage, config, std::move(trees));
}

}  // namespace alrank
