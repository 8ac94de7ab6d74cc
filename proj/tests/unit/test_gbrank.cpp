#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "alrank/dataset.hpp"
#include "alrank/error.hpp"
#include "alrank/gbrank.hpp"

namespace alrank {
namespace {

QueryGroup MakeQuery(QueryId id, const std::vector<int>& labels,
                     const std::vector<std::vector<double>>& features) {
  QueryGroup q;
  q.query_id = id;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    q.documents.push_back({i, features[i], labels[i]});
  }
  return q;
}

QueryGroup LabelsOnly(QueryId id, const std::vector<int>& labels) {
  std::vector<std::vector<double>> f(labels.size(), std::vector<double>{0.0});
  return MakeQuery(id, labels, f);
}

// Corpus whose labels are a thresholding of feature 0.
Corpus Separable(std::size_t queries, std::size_t docs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Corpus c;
  c.feature_dim = 3;
  for (std::size_t i = 0; i < queries; ++i) {
    QueryGroup q;
    q.query_id = i + 1;
    for (std::size_t j = 0; j < docs; ++j) {
      std::vector<double> f = {u(rng), u(rng), u(rng)};
      const int label = std::min(4, static_cast<int>(f[0] * 5));
      q.documents.push_back({j, f, label});
    }
    c.queries.push_back(std::move(q));
  }
  return c;
}

TEST(Pairs, DocumentedCounts) {
  const QueryGroup a = LabelsOnly(1, {0, 0, 1});
  const QueryGroup b = LabelsOnly(2, {0, 2});
  const QueryGroup c = LabelsOnly(3, {3, 3, 3});
  PairSet p = BuildPairs({&a});
  EXPECT_EQ(p.valid, 2u);
  EXPECT_EQ(p.neg_pos, 0u);
  p = BuildPairs({&b});
  EXPECT_EQ(p.valid, 1u);
  EXPECT_EQ(p.neg_pos, 1u);
  EXPECT_EQ(p.pairs[0].winner, 1u);
  EXPECT_EQ(p.pairs[0].loser, 0u);
  EXPECT_EQ(BuildPairs({&c}).valid, 0u);
  p = BuildPairs({&a, &b, &c});
  EXPECT_EQ(p.valid, 3u);
  EXPECT_EQ(p.pairs.size(), 3u);
}

TEST(Pairs, CountsAgreeWithEnumeration) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> label(0, 4), len(1, 25);
  for (int t = 0; t < 300; ++t) {
    std::vector<int> labels(len(rng));
    for (int& l : labels) l = label(rng);
    std::size_t valid = 0, neg_pos = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      for (std::size_t j = 0; j < labels.size(); ++j) {
        if (labels[i] > labels[j]) {
          ++valid;
          if (labels[i] >= 2 && labels[j] <= 1) ++neg_pos;
        }
      }
    }
    const PairCounts counts = CountPairs(labels);
    EXPECT_EQ(counts.valid, valid);
    EXPECT_EQ(counts.neg_pos, neg_pos);
    const QueryGroup q = LabelsOnly(1, labels);
    const PairSet set = BuildPairs({&q});
    EXPECT_EQ(set.valid, valid);
    EXPECT_EQ(set.neg_pos, neg_pos);
    EXPECT_EQ(set.pairs.size(), valid);
  }
}

TEST(PairwiseLoss, AnalyticValues) {
  PairSet one;
  one.pairs.push_back({5, 0, 1});
  one.valid = 1;
  DocScores scores;
  scores[5] = {0.3, 0.3};
  EXPECT_NEAR(PairwiseLoss(scores, one, 1.0), std::log(2.0), 1e-15);
  scores[5] = {2.0 * std::log(3.0), 0.0};
  EXPECT_NEAR(PairwiseLoss(scores, one, 2.0), -std::log(0.75), 1e-14);
  EXPECT_NEAR(PairwiseLoss(scores, one, 2.0), 0.2877, 1e-4);
  scores[5] = {800.0, 0.0};
  EXPECT_EQ(PairwiseLoss(scores, one, 1.0), 0.0);
  scores[5] = {0.0, 800.0};
  EXPECT_NEAR(PairwiseLoss(scores, one, 1.0), 800.0, 1e-9);
  EXPECT_EQ(PairwiseLoss(scores, PairSet{}, 1.0), 0.0);
  EXPECT_THROW(PairwiseLoss(DocScores{}, one, 1.0), DataError);
  scores[5] = {1.0};
  EXPECT_THROW(PairwiseLoss(scores, one, 1.0), DataError);
}

TEST(Train, RejectsBadConfigAndData) {
  const Corpus c = Separable(5, 10, 1);
  TrainConfig cfg;
  cfg.num_trees = 0;
  EXPECT_THROW(Train(AllQueries(c), cfg), ConfigError);
  cfg = TrainConfig{};
  cfg.shrinkage = 0.0;
  EXPECT_THROW(Train(AllQueries(c), cfg), ConfigError);
  const QueryGroup tied = LabelsOnly(1, {2, 2, 2});
  EXPECT_THROW(Train({&tied}, TrainConfig{}), DataError);
  EXPECT_THROW(Train({}, TrainConfig{}), DataError);
}

TEST(Train, SinglePairOneStump) {
  const QueryGroup q = MakeQuery(1, {1, 0}, {{2.0, 0.0}, {1.0, 0.0}});
  TrainConfig cfg;
  cfg.num_trees = 1;
  cfg.max_depth = 1;
  cfg.min_samples_leaf = 1;
  const GBRankModel m = Train({&q}, cfg);
  ASSERT_EQ(m.trees().size(), 1u);
  const TreeNode& root = m.trees()[0].nodes()[0];
  EXPECT_EQ(root.feature, 0);
  EXPECT_DOUBLE_EQ(root.threshold, 1.5);
  const double w = m.Predict(q.documents[0].features);
  const double l = m.Predict(q.documents[1].features);
  EXPECT_GT(w, l);
  // Residuals at s = 0 are +-1/2, so the step is shrinkage * 1/2.
  EXPECT_NEAR(w, 0.05, 1e-15);
  EXPECT_NEAR(l, -0.05, 1e-15);
}

TEST(Train, LearnsSeparableCorpusWithMonotoneLoss) {
  const Corpus c = Separable(60, 20, 4);
  TrainConfig cfg;
  cfg.num_trees = 50;
  cfg.max_depth = 3;
  std::vector<double> trace;
  const GBRankModel m = Train(AllQueries(c), cfg, &trace);
  EXPECT_GE(PairwiseAccuracy(m, AllQueries(c)), 0.95);
  ASSERT_EQ(trace.size(), 51u);
  EXPECT_NEAR(trace.front(), std::log(2.0), 1e-12);
  for (std::size_t i = 1; i < trace.size(); ++i) {
    EXPECT_LE(trace[i], trace[i - 1] + 1e-9) << "round " << i;
  }
}

TEST(Train, TraceMatchesRecomputedLoss) {
  const Corpus c = Separable(10, 8, 9);
  TrainConfig cfg;
  cfg.num_trees = 12;
  std::vector<double> trace;
  const GBRankModel m = Train(AllQueries(c), cfg, &trace);
  const PairSet pairs = BuildPairs(AllQueries(c));
  for (std::size_t t = 0; t <= 12; t += 4) {
    const GBRankModel prefix = m.Truncated(t);
    DocScores scores;
    for (const auto& q : c.queries) {
      for (const auto& d : q.documents) {
        scores[q.query_id].push_back(prefix.Predict(d.features));
      }
    }
    EXPECT_NEAR(PairwiseLoss(scores, pairs, 1.0), trace[t], 1e-12);
  }
}

TEST(Train, DeterministicSerialization) {
  SynthConfig sc;
  sc.num_queries = 30;
  sc.docs_per_query = 10;
  const Corpus c = GenerateSynthetic(sc, 2);
  TrainConfig cfg;
  cfg.num_trees = 20;
  const GBRankModel a = Train(AllQueries(c), cfg);
  const GBRankModel b = Train(AllQueries(c), cfg);
  EXPECT_EQ(a.ToJson().dump(), b.ToJson().dump());
  for (const auto& q : c.queries) {
    for (const auto& d : q.documents) {
      EXPECT_TRUE(std::isfinite(a.Predict(d.features)));
      EXPECT_EQ(a.Predict(d.features), a.Predict(d.features));
    }
  }
}

TEST(Model, ZeroTreesPredictsBaseScore) {
  const GBRankModel m(2, 0.7, 0.1, TrainConfig{}, {});
  const std::vector<double> x = {1.0, -3.0};
  EXPECT_EQ(m.Predict(x), 0.7);
  const std::vector<double> wrong = {1.0};
  EXPECT_THROW(m.Predict(wrong), DataError);
}

TEST(Model, PrefixAndJsonRoundTrip) {
  const Corpus c = Separable(20, 10, 6);
  TrainConfig cfg;
  cfg.num_trees = 15;
  const GBRankModel m = Train(AllQueries(c), cfg);
  const GBRankModel back = GBRankModel::FromJson(m.ToJson());
  EXPECT_EQ(back, m);
  for (const auto& d : c.queries[0].documents) {
    EXPECT_EQ(back.Predict(d.features), m.Predict(d.features));
    EXPECT_EQ(m.PredictPrefix(d.features, 15), m.Predict(d.features));
    EXPECT_EQ(m.PredictPrefix(d.features, 7),
              m.Truncated(7).Predict(d.features));
  }
}

TEST(Model, FromJsonRejectsMalformed) {
  EXPECT_THROW(GBRankModel::FromJson(nlohmann::json::object()), DataError);
  const Corpus c = Separable(5, 10, 6);
  TrainConfig cfg;
  cfg.num_trees = 2;
  nlohmann::json doc = Train(AllQueries(c), cfg).ToJson();
  doc["trees"][0]["nodes"][0]["left"] = 0;
  EXPECT_THROW(GBRankModel::FromJson(doc), DataError);
  doc = Train(AllQueries(c), cfg).ToJson();
  doc.erase("feature_dim");
  EXPECT_THROW(GBRankModel::FromJson(doc), DataError);
}

TEST(TrainConfig, JsonRoundTrip) {
  TrainConfig cfg;
  cfg.num_trees = 17;
  cfg.max_depth = 4;
  cfg.temperature = 0.5;
  cfg.seed = 99;
  EXPECT_EQ(TrainConfigFromJson(TrainConfigToJson(cfg)), cfg);
  EXPECT_THROW(TrainConfigFromJson({{"bogus", 1}}), ConfigError);
}

}  // namespace
}  // namespace alrank
