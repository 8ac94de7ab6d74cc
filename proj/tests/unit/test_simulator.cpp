#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "alrank/error.hpp"
#include "alrank/simulator.hpp"

namespace alrank {
namespace {

Corpus Synth(std::size_t queries, std::uint64_t seed, std::size_t docs = 8) {
  SynthConfig cfg;
  cfg.num_queries = queries;
  cfg.docs_per_query = docs;
  cfg.feature_dim = 4;
  return GenerateSynthetic(cfg, seed);
}

// Validation corpus with ids disjoint from a pool of up to 100000 queries.
Corpus Validation(std::size_t queries, std::uint64_t seed) {
  Corpus c = Synth(queries, seed);
  for (auto& q : c.queries) q.query_id += 100000;
  return c;
}

ALConfig FastConfig() {
  ALConfig cfg;
  cfg.base_size = 20;
  cfg.batch_size = 10;
  cfg.cycles = 1;
  cfg.quota = 1000;
  cfg.ranker.num_trees = 10;
  cfg.committee.tree_counts = {4, 8};
  cfg.committee.depths = {1, 2};
  cfg.seed = 5;
  return cfg;
}

nlohmann::json WithoutTimestamp(nlohmann::json doc) {
  doc["metadata"].erase("timestamp");
  return doc;
}

TEST(OracleAnnotate, Bookkeeping) {
  const Corpus c = Synth(300, 1, 2);
  const PoolState pool = SplitPool(c, 50, 3);
  std::vector<QueryId> batch(pool.unlabeled.begin(),
                             std::next(pool.unlabeled.begin(), 100));
  const PoolState next = OracleAnnotate(pool, batch);
  EXPECT_EQ(next.labeled.size(), 150u);
  EXPECT_EQ(next.unlabeled.size(), 150u);
  for (QueryId id : batch) EXPECT_TRUE(next.labeled.count(id));
  EXPECT_EQ(OracleAnnotate(pool, {}), pool);
  const std::vector<QueryId> already = {*pool.labeled.begin()};
  EXPECT_THROW(OracleAnnotate(pool, already), DataError);
  const std::vector<QueryId> unknown = {99999};
  EXPECT_THROW(OracleAnnotate(pool, unknown), DataError);
}

TEST(ALConfig, Validation) {
  ALConfig cfg;
  EXPECT_NO_THROW(cfg.Validate());
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.Validate(), ConfigError);
  cfg = ALConfig{};
  cfg.temperature = 0.0;
  EXPECT_THROW(cfg.Validate(), ConfigError);
  cfg = ALConfig{};
  cfg.ranker.num_trees = 0;
  EXPECT_THROW(cfg.Validate(), ConfigError);
  cfg = ALConfig{};
  cfg.seed = 10;
  EXPECT_EQ(cfg.RankerConfig().seed, 10 + kRankerSeedOffset);
  EXPECT_EQ(cfg.CommitteeSettings().seed, 10 + kCommitteeSeedOffset);
}

TEST(RunActiveLearning, OneCycleBookkeeping) {
  const Corpus pool = Synth(100, 1);
  const Corpus val = Validation(20, 2);
  const RunResult r = RunActiveLearning(pool, val, FastConfig());
  ASSERT_EQ(r.report.cycles.size(), 1u);
  EXPECT_EQ(r.report.initial.labeled, 20u);
  const CycleReport& c = r.report.cycles[0];
  EXPECT_EQ(c.cycle, 1u);
  EXPECT_EQ(c.selected, 10u);
  EXPECT_EQ(c.eval.labeled, 30u);
  std::size_t picked = 0;
  for (std::size_t n : c.buckets) picked += n;
  EXPECT_EQ(picked, 10u);
  EXPECT_EQ(c.eval.valid_pairs, r.report.initial.valid_pairs + c.batch_valid_pairs);
  EXPECT_EQ(c.pmf_stats.count, 80u * 4u * 8u);
  EXPECT_LE(c.pmf_stats.max_sum_error, 1e-9);
  EXPECT_GE(c.pmf_stats.min_entry, 0.0);
  EXPECT_EQ(r.report.stop_reason, "completed");
  EXPECT_FALSE(r.committee.has_value());
  EXPECT_GT(c.eval.dcg, 0.0);
}

TEST(RunActiveLearning, DeterministicAcrossRunsAndThreads) {
  const Corpus pool = Synth(80, 3);
  const Corpus val = Validation(15, 4);
  ALConfig cfg = FastConfig();
  cfg.cycles = 3;
  const RunResult a = RunActiveLearning(pool, val, cfg);
  const RunResult b = RunActiveLearning(pool, val, cfg);
  const RunResult c = RunActiveLearning(pool, val, cfg, {4, true});
  EXPECT_EQ(WithoutTimestamp(a.report.ToJson()).dump(),
            WithoutTimestamp(b.report.ToJson()).dump());
  EXPECT_EQ(WithoutTimestamp(a.report.ToJson()).dump(),
            WithoutTimestamp(c.report.ToJson()).dump());
  ASSERT_TRUE(c.committee.has_value());
  EXPECT_EQ(c.committee->size(), 4u);
}

TEST(RunActiveLearning, StopsOnQuotaAndPool) {
  const Corpus pool = Synth(40, 6);
  const Corpus val = Validation(10, 7);
  ALConfig cfg = FastConfig();
  cfg.strategy = Strategy::kRandom;
  cfg.cycles = 5;
  cfg.quota = 15;
  RunResult r = RunActiveLearning(pool, val, cfg);
  ASSERT_EQ(r.report.cycles.size(), 2u);
  EXPECT_EQ(r.report.cycles[1].selected, 5u);
  EXPECT_EQ(r.report.stop_reason, "quota_exhausted");

  cfg.quota = 1000;
  r = RunActiveLearning(pool, val, cfg);
  ASSERT_EQ(r.report.cycles.size(), 2u);
  EXPECT_EQ(r.report.cycles.back().eval.labeled, 40u);
  EXPECT_EQ(r.report.stop_reason, "pool_exhausted");
  // Random selection computes no rank distributions.
  EXPECT_EQ(r.report.cycles[0].pmf_stats.count, 0u);
}

TEST(RunActiveLearning, RejectsBadInputs) {
  const Corpus pool = Synth(40, 6);
  ALConfig cfg = FastConfig();
  EXPECT_THROW(RunActiveLearning(pool, Synth(10, 8), cfg), DataError);
  Corpus wide = Validation(10, 9);
  for (auto& q : wide.queries) {
    for (auto& d : q.documents) d.features.push_back(0.0);
  }
  wide.feature_dim += 1;
  EXPECT_THROW(RunActiveLearning(pool, wide, cfg), DataError);
  cfg.base_size = 40;
  EXPECT_THROW(RunActiveLearning(pool, Validation(10, 9), cfg), ConfigError);
}

TEST(RunReport, JsonRoundTripAndCsv) {
  const Corpus pool = Synth(60, 10);
  const Corpus val = Validation(10, 11);
  ALConfig cfg = FastConfig();
  cfg.cycles = 2;
  RunResult r = RunActiveLearning(pool, val, cfg);
  r.report.baseline = CompareRuns(r.report, r.report);
  const nlohmann::json doc = r.report.ToJson();
  EXPECT_EQ(RunReport::FromJson(doc).ToJson().dump(), doc.dump());
  EXPECT_EQ(doc["format"], "alrank.run_report");
  EXPECT_EQ(doc["config"]["active_learning"]["strategy"], "re_pv");
  EXPECT_THROW(RunReport::FromJson(nlohmann::json::object()), DataError);

  std::ostringstream csv;
  r.report.WriteCsv(csv);
  std::istringstream lines(csv.str());
  std::string header;
  std::getline(lines, header);
  EXPECT_EQ(header,
            "cycle,labeled,valid_pairs,neg_pos_pairs,dcg4,r01,bucket_0,"
            "bucket_1,bucket_2,bucket_3,bucket_4,bucket_5,bucket_6,bucket_7,"
            "bucket_8,bucket_9");
  std::size_t rows = 0;
  for (std::string line; std::getline(lines, line);) ++rows;
  EXPECT_EQ(rows, 2u);
}

TEST(CompareRuns, RelativeChanges) {
  RunReport base, run;
  base.config = {{"active_learning", {{"strategy", "random"}}}};
  CycleReport c;
  c.eval.dcg = 2.0;
  c.eval.r01 = 0.5;
  c.eval.valid_pairs = 100;
  c.eval.neg_pos_pairs = 40;
  base.cycles = {c};
  c.eval.dcg = 2.2;
  c.eval.r01 = 0.25;
  c.eval.valid_pairs = 143;
  c.eval.neg_pos_pairs = 50;
  run.cycles = {c};
  const BaselineComparison cmp = CompareRuns(run, base);
  EXPECT_EQ(cmp.baseline, "random");
  EXPECT_NEAR(cmp.dcg_change_pct, 10.0, 1e-12);
  EXPECT_NEAR(cmp.r01_change_pct, -50.0, 1e-12);
  EXPECT_NEAR(cmp.valid_pairs_change_pct, 43.0, 1e-12);
  EXPECT_NEAR(cmp.neg_pos_change_pct, 25.0, 1e-12);
}

// Committee whose members all score a document by its first feature.
Committee LabelEchoCommittee(std::size_t dim) {
  std::vector<TreeNode> nodes(9);
  int next = 0;
  for (int t = 0; t < 4; ++t) {
    const int split = next;
    nodes[split].feature = 0;
    nodes[split].threshold = t + 0.5;
    nodes[split].left = split + 1;
    nodes[split].right = split + 2;
    nodes[split + 1].value = t;
    next = split + 2;
  }
  nodes[8].value = 4;
  const GBRankModel echo(dim, 0.0, 1.0, TrainConfig{},
                         {RegressionTree(std::move(nodes))});
  CommitteeConfig cfg;
  cfg.tree_counts = {1};
  cfg.depths = {1, 2};
  return Committee(cfg, {echo, echo});
}

TEST(CorrelationStudy, EchoCommitteeGivesPerfectCorrelation) {
  Corpus c = Synth(50, 12);
  for (auto& q : c.queries) {
    for (auto& d : q.documents) d.features[0] = d.label;
  }
  const Committee com = LabelEchoCommittee(4);
  const CorrelationStudy s =
      RunCorrelationStudy(AllQueries(c), com, 4, GainFn{}, 2);
  ASSERT_EQ(s.rows.size(), 50u);
  for (const auto& r : s.rows) EXPECT_NEAR(r.pv, r.lv, 1e-12);
  ASSERT_TRUE(s.lv_pv.has_value());
  EXPECT_NEAR(*s.lv_pv, 1.0, 1e-12);
}

TEST(CorrelationStudy, ConstantLabelsLeaveCorrelationUndefined) {
  Corpus c = Synth(20, 13);
  for (auto& q : c.queries) {
    for (auto& d : q.documents) d.label = 2;
  }
  const CorrelationStudy s =
      RunCorrelationStudy(AllQueries(c), LabelEchoCommittee(4), 4, GainFn{});
  EXPECT_FALSE(s.lv_pv.has_value());
  EXPECT_FALSE(s.best_dcg_lv.has_value());
  EXPECT_TRUE(s.PearsonJson()["lv_pv"].is_null());
}

TEST(CorrelationStudy, EmittedPearsonMatchesTable) {
  const Corpus train = Synth(60, 14);
  CommitteeConfig cc;
  cc.tree_counts = {5, 10};
  cc.depths = {1, 2};
  const Committee com = TrainCommittee(AllQueries(train), cc);
  const Corpus held = Validation(40, 15);
  const CorrelationStudy s = RunCorrelationStudy(AllQueries(held), com, 4, GainFn{});
  std::ostringstream csv;
  s.WriteCsv(csv);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "query_id,bucket,lv,pv,best_dcg4");
  std::vector<double> lv, pv, best;
  while (std::getline(in, line)) {
    std::istringstream f(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(f, cell, ',')) cells.push_back(cell);
    lv.push_back(std::stod(cells[2]));
    pv.push_back(std::stod(cells[3]));
    best.push_back(std::stod(cells[4]));
  }
  const nlohmann::json p = s.PearsonJson();
  EXPECT_EQ(p["lv_pv"].get<double>(), Pearson(lv, pv));
  EXPECT_EQ(p["best_dcg_lv"].get<double>(), Pearson(best, lv));
  EXPECT_EQ(p["best_dcg_pv"].get<double>(), Pearson(best, pv));
}

TEST(SelectionStudy, EveryStrategyPicksCount) {
  const Corpus c = Synth(60, 16);
  CommitteeConfig cc;
  cc.tree_counts = {5, 10};
  cc.depths = {1, 2};
  const Committee com = TrainCommittee(AllQueries(c), cc);
  const auto results =
      RunSelectionStudy(AllQueries(c), com, 25, AcquisitionParams{}, 3);
  ASSERT_EQ(results.size(), AllStrategies().size());
  for (const auto& r : results) {
    EXPECT_EQ(r.selected.size(), 25u);
    std::size_t n = 0;
    for (std::size_t b : r.buckets) n += b;
    EXPECT_EQ(n, 25u);
    std::size_t docs = 0;
    for (const auto& row : r.labels) {
      for (std::size_t v : row) docs += v;
    }
    EXPECT_EQ(docs, 25u * 8u);
  }
  std::ostringstream buckets, labels;
  WriteBucketCsv(buckets, results);
  WriteLabelCsv(labels, results);
  EXPECT_EQ(buckets.str().substr(0, 21), "strategy,bucket,count");
  EXPECT_EQ(labels.str().substr(0, 27), "strategy,bucket,label,count");
  EXPECT_THROW(RunSelectionStudy(AllQueries(c), com, 61, AcquisitionParams{}, 3),
               ConfigError);
}

}  // namespace
}  // namespace alrank
