#include "alrank/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <ostream>
#include <set>

#include "alrank/config.hpp"
#include "alrank/error.hpp"
#include "alrank/format.hpp"
#include "alrank/json_util.hpp"
#include "alrank/parallel.hpp"

namespace alrank {
namespace {

std::string UtcTimestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

double RelativeChangePct(double value, double baseline) {
  if (baseline == 0.0) return 0.0;
  return 100.0 * (value - baseline) / baseline;
}

EvalPoint Evaluate(const GBRankModel& ranker, const QueryRefs& labeled,
                   const QueryRefs& validation, const ALConfig& config,
                   unsigned threads) {
  std::vector<std::vector<double>> scores(validation.size());
  ParallelFor(validation.size(), threads, [&](std::size_t i) {
    const auto& docs = validation[i]->documents;
    scores[i].reserve(docs.size());
    for (const Document& d : docs) scores[i].push_back(ranker.Predict(d.features));
  });
  const EvalReport eval =
      EvaluateRanking(validation, scores, config.eval_k, config.gain);
  const PairCounts pairs = CountPairs(labeled);
  EvalPoint point;
  point.labeled = labeled.size();
  point.valid_pairs = pairs.valid;
  point.neg_pos_pairs = pairs.neg_pos;
  point.dcg = eval.dcg_k;
  point.r01 = eval.r01;
  return point;
}

nlohmann::json EvalPointToJson(const EvalPoint& p) {
  return {{"labeled", p.labeled},
          {"valid_pairs", p.valid_pairs},
          {"neg_pos_pairs", p.neg_pos_pairs},
          {"dcg", p.dcg},
          {"r01", p.r01}};
}

EvalPoint EvalPointFromJson(const nlohmann::json& doc) {
  const std::string where = "run report";
  EvalPoint p;
  p.labeled = json_util::GetRequired<std::size_t>(doc, "labeled", where);
  p.valid_pairs = json_util::GetRequired<std::size_t>(doc, "valid_pairs", where);
  p.neg_pos_pairs =
      json_util::GetRequired<std::size_t>(doc, "neg_pos_pairs", where);
  p.dcg = json_util::GetRequired<double>(doc, "dcg", where);
  p.r01 = json_util::GetRequired<double>(doc, "r01", where);
  return p;
}

nlohmann::json ComparisonToJson(const BaselineComparison& c) {
  return {{"baseline", c.baseline},
          {"mean_dcg", c.mean_dcg},
          {"baseline_mean_dcg", c.baseline_mean_dcg},
          {"dcg_change_pct", c.dcg_change_pct},
          {"mean_r01", c.mean_r01},
          {"baseline_mean_r01", c.baseline_mean_r01},
          {"r01_change_pct", c.r01_change_pct},
          {"valid_pairs_change_pct", c.valid_pairs_change_pct},
          {"neg_pos_change_pct", c.neg_pos_change_pct}};
}

}  // namespace

void ALConfig::Validate() const {
  if (base_size < 1) throw ConfigError("base_size must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (cycles < 1) throw ConfigError("cycles must be >= 1");
  if (quota < 1) throw ConfigError("quota must be >= 1");
  if (!std::isfinite(alpha)) throw ConfigError("alpha must be finite");
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ConfigError("temperature must be > 0");
  }
  if (eval_k < 1) throw ConfigError("eval_k must be >= 1");
  RankerConfig().Validate();
  CommitteeSettings().Validate();
}

TrainConfig ALConfig::RankerConfig() const {
  TrainConfig c = ranker;
  c.temperature = temperature;
  c.seed = seed + kRankerSeedOffset;
  return c;
}

CommitteeConfig ALConfig::CommitteeSettings() const {
  CommitteeConfig c = committee;
  c.base.temperature = temperature;
  c.seed = seed + kCommitteeSeedOffset;
  return c;
}

AcquisitionParams ALConfig::Acquisition() const {
  AcquisitionParams p;
  p.alpha = alpha;
  p.temperature = temperature;
  p.k = eval_k;
  p.gain = gain;
  return p;
}

PoolState OracleAnnotate(const PoolState& pool, std::span<const QueryId> qids) {
  PoolState next = pool;
  for (QueryId id : qids) {
    if (next.unlabeled.erase(id) == 0) {
      throw DataError("cannot annotate query " + std::to_string(id) +
                      ": not in the unlabeled pool");
    }
    next.labeled.insert(id);
  }
  return next;
}

double RunReport::MeanDcg() const {
  if (cycles.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& c : cycles) sum += c.eval.dcg;
  return sum / static_cast<double>(cycles.size());
}

double RunReport::MeanR01() const {
  if (cycles.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& c : cycles) sum += c.eval.r01;
  return sum / static_cast<double>(cycles.size());
}

std::string RunReport::StrategyLabel() const {
  const auto al = config.find("active_learning");
  if (al != config.end() && al->contains("strategy")) {
    return al->at("strategy").get<std::string>();
  }
  return "unknown";
}

nlohmann::json RunReport::ToJson() const {
  nlohmann::json cycle_docs = nlohmann::json::array();
  for (const auto& c : cycles) {
    cycle_docs.push_back(
        {{"cycle", c.cycle},
         {"selected", c.selected},
         {"eval", EvalPointToJson(c.eval)},
         {"batch_valid_pairs", c.batch_valid_pairs},
         {"batch_neg_pos_pairs", c.batch_neg_pos_pairs},
         {"buckets", c.buckets},
         {"rank_distributions",
          {{"count", c.pmf_stats.count},
           {"max_sum_error", c.pmf_stats.max_sum_error},
           {"min_entry", c.pmf_stats.min_entry}}}});
  }
  nlohmann::json doc = {
      {"format", "alrank.run_report"},
      {"version", 1},
      {"metadata", {{"tool", "alrank"}, {"timestamp", timestamp}}},
      {"config", config},
      {"initial", EvalPointToJson(initial)},
      {"cycles", std::move(cycle_docs)},
      {"stop_reason", stop_reason},
      {"aggregate",
       {{"mean_dcg", MeanDcg()},
        {"mean_r01", MeanR01()},
        {"cycles_completed", cycles.size()}}}};
  if (baseline) doc["baseline_comparison"] = ComparisonToJson(*baseline);
  return doc;
}

RunReport RunReport::FromJson(const nlohmann::json& doc) {
  const std::string where = "run report";
  if (!doc.is_object() ||
      doc.value("format", std::string()) != "alrank.run_report") {
    throw DataError("not an alrank.run_report document");
  }
  RunReport r;
  try {
    r.config = doc.at("config");
    r.timestamp = doc.at("metadata").value("timestamp", std::string());
    r.initial = EvalPointFromJson(doc.at("initial"));
    r.stop_reason = doc.at("stop_reason").get<std::string>();
    for (const auto& c : doc.at("cycles")) {
      CycleReport cr;
      cr.cycle = c.at("cycle").get<std::size_t>();
      cr.selected = c.at("selected").get<std::size_t>();
      cr.eval = EvalPointFromJson(c.at("eval"));
      cr.batch_valid_pairs = c.at("batch_valid_pairs").get<std::size_t>();
      cr.batch_neg_pos_pairs = c.at("batch_neg_pos_pairs").get<std::size_t>();
      cr.buckets = c.at("buckets").get<BucketHistogram>();
      const auto& rd = c.at("rank_distributions");
      cr.pmf_stats.count = rd.at("count").get<std::size_t>();
      cr.pmf_stats.max_sum_error = rd.at("max_sum_error").get<double>();
      cr.pmf_stats.min_entry = rd.at("min_entry").get<double>();
      r.cycles.push_back(cr);
    }
    if (doc.contains("baseline_comparison")) {
      const auto& b = doc.at("baseline_comparison");
      BaselineComparison c;
      c.baseline = b.at("baseline").get<std::string>();
      c.mean_dcg = b.at("mean_dcg").get<double>();
      c.baseline_mean_dcg = b.at("baseline_mean_dcg").get<double>();
      c.dcg_change_pct = b.at("dcg_change_pct").get<double>();
      c.mean_r01 = b.at("mean_r01").get<double>();
      c.baseline_mean_r01 = b.at("baseline_mean_r01").get<double>();
      c.r01_change_pct = b.at("r01_change_pct").get<double>();
      c.valid_pairs_change_pct = b.at("valid_pairs_change_pct").get<double>();
      c.neg_pos_change_pct = b.at("neg_pos_change_pct").get<double>();
      r.baseline = c;
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(where + ": " + e.what());
  }
  return r;
}

void RunReport::WriteCsv(std::ostream& out) const {
  int k = 4;
  const auto al = config.find("active_learning");
  if (al != config.end() && al->contains("eval_k")) {
    k = al->at("eval_k").get<int>();
  }
  out << "cycle,labeled,valid_pairs,neg_pos_pairs,dcg" << k << ",r01";
  for (int b = 0; b < kNumBuckets; ++b) out << ",bucket_" << b;
  out << '\n';
  for (const auto& c : cycles) {
    out << c.cycle << ',' << c.eval.labeled << ',' << c.eval.valid_pairs << ','
        << c.eval.neg_pos_pairs << ',' << FormatDouble(c.eval.dcg) << ','
        << FormatDouble(c.eval.r01);
    for (std::size_t n : c.buckets) out << ',' << n;
    out << '\n';
  }
}

BaselineComparison CompareRuns(const RunReport& run,
                               const RunReport& baseline) {
  BaselineComparison c;
  c.baseline = baseline.StrategyLabel();
  c.mean_dcg = run.MeanDcg();
  c.baseline_mean_dcg = baseline.MeanDcg();
  c.dcg_change_pct = RelativeChangePct(c.mean_dcg, c.baseline_mean_dcg);
  c.mean_r01 = run.MeanR01();
  c.baseline_mean_r01 = baseline.MeanR01();
  c.r01_change_pct = RelativeChangePct(c.mean_r01, c.baseline_mean_r01);
  const EvalPoint& last = run.cycles.empty() ? run.initial : run.cycles.back().eval;
  const EvalPoint& base_last =
      baseline.cycles.empty() ? baseline.initial : baseline.cycles.back().eval;
  c.valid_pairs_change_pct = RelativeChangePct(
      static_cast<double>(last.valid_pairs),
      static_cast<double>(base_last.valid_pairs));
  c.neg_pos_change_pct = RelativeChangePct(
      static_cast<double>(last.neg_pos_pairs),
      static_cast<double>(base_last.neg_pos_pairs));
  return c;
}

RunResult RunActiveLearning(const Corpus& corpus, const Corpus& validation,
                            const ALConfig& config, const RunOptions& options) {
  config.Validate();
  corpus.Validate();
  validation.Validate();
  if (corpus.feature_dim != validation.feature_dim) {
    throw DataError("pool and validation feature dimensionality differ");
  }
  {
    std::set<QueryId> pool_ids;
    for (const auto& q : corpus.queries) pool_ids.insert(q.query_id);
    for (const auto& q : validation.queries) {
      if (pool_ids.count(q.query_id)) {
        throw DataError("validation query " + std::to_string(q.query_id) +
                        " also appears in the pool");
      }
    }
  }

  const unsigned threads = std::max(1u, options.threads);
  const QueryRefs validation_refs = AllQueries(validation);
  const TrainConfig ranker_config = config.RankerConfig();
  const CommitteeConfig committee_config = config.CommitteeSettings();
  const AcquisitionParams acquisition = config.Acquisition();

  RunResult result;
  RunReport& report = result.report;
  report.config = ALConfigToJson(config);
  report.timestamp = UtcTimestamp();

  PoolState pool = SplitPool(corpus, config.base_size, config.seed);
  {
    const QueryRefs labeled = SelectQueries(corpus, pool.labeled);
    const GBRankModel ranker = Train(labeled, ranker_config);
    report.initial =
        Evaluate(ranker, labeled, validation_refs, config, threads);
  }

  std::size_t annotated = 0;
  report.stop_reason = "completed";
  for (std::size_t cycle = 1; cycle <= config.cycles; ++cycle) {
    const std::size_t remaining_quota =
        config.quota > annotated ? config.quota - annotated : 0;
    const std::size_t batch = std::min(
        {config.batch_size, remaining_quota, pool.unlabeled.size()});
    if (batch == 0) {
      report.stop_reason =
          remaining_quota == 0 ? "quota_exhausted" : "pool_exhausted";
      break;
    }

    CycleReport cr;
    cr.cycle = cycle;
    const QueryRefs unlabeled = SelectQueries(corpus, pool.unlabeled);
    std::vector<QueryScore> scores;
    if (config.strategy == Strategy::kRandom) {
      scores.resize(unlabeled.size());
      for (std::size_t i = 0; i < unlabeled.size(); ++i) {
        scores[i].query_id = unlabeled[i]->query_id;
        scores[i].bucket = unlabeled[i]->bucket;
      }
    } else {
      const QueryRefs labeled = SelectQueries(corpus, pool.labeled);
      const Committee committee =
          TrainCommittee(labeled, committee_config, threads);
      scores = ScorePool(committee, unlabeled, acquisition, threads,
                         &cr.pmf_stats);
    }
    const std::vector<QueryId> selected = SelectBatch(
        scores, batch, config.strategy,
        config.seed + kSelectionSeedOffset + cycle);
    pool = OracleAnnotate(pool, selected);
    annotated += selected.size();

    const QueryRefs batch_refs = SelectQueries(
        corpus, std::set<QueryId>(selected.begin(), selected.end()));
    const PairCounts batch_pairs = CountPairs(batch_refs);
    cr.selected = selected.size();
    cr.batch_valid_pairs = batch_pairs.valid;
    cr.batch_neg_pos_pairs = batch_pairs.neg_pos;
    cr.buckets = BucketDistribution(batch_refs);

    const QueryRefs labeled = SelectQueries(corpus, pool.labeled);
    const GBRankModel ranker = Train(labeled, ranker_config);
    cr.eval = Evaluate(ranker, labeled, validation_refs, config, threads);
    report.cycles.push_back(cr);
  }

  if (options.final_committee) {
    result.committee = TrainCommittee(SelectQueries(corpus, pool.labeled),
                                      committee_config, threads);
  }
  return result;
}

void CorrelationStudy::WriteCsv(std::ostream& out) const {
  out << "query_id,bucket,lv,pv,best_dcg" << k << '\n';
  for (const auto& r : rows) {
    out << r.query_id << ',' << r.bucket << ',' << FormatDouble(r.lv) << ','
        << FormatDouble(r.pv) << ',' << FormatDouble(r.best_dcg) << '\n';
  }
}

nlohmann::json CorrelationStudy::PearsonJson() const {
  auto value = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  return {{"num_queries", rows.size()},
          {"k", k},
          {"lv_pv", value(lv_pv)},
          {"best_dcg_lv", value(best_dcg_lv)},
          {"best_dcg_pv", value(best_dcg_pv)}};
}

CorrelationStudy RunCorrelationStudy(const QueryRefs& queries,
                                     const Committee& committee, int k,
                                     const GainFn& gain, unsigned threads) {
  CorrelationStudy study;
  study.k = k;
  study.rows.resize(queries.size());
  ParallelFor(queries.size(), threads, [&](std::size_t i) {
    const QueryGroup& g = *queries[i];
    const auto labels = g.Labels();
    CorrelationRow& row = study.rows[i];
    row.query_id = g.query_id;
    row.bucket = g.bucket;
    row.lv = LabelVariance(labels);
    row.pv = PredictionVariance(ScoreQuery(committee, g));
    row.best_dcg = BestDcgAtK(labels, k, gain);
  });
  if (study.rows.size() >= 2) {
    std::vector<double> lv, pv, best;
    for (const auto& r : study.rows) {
      lv.push_back(r.lv);
      pv.push_back(r.pv);
      best.push_back(r.best_dcg);
    }
    study.lv_pv = TryPearson(lv, pv);
    study.best_dcg_lv = TryPearson(best, lv);
    study.best_dcg_pv = TryPearson(best, pv);
  }
  return study;
}

std::vector<SelectionResult> RunSelectionStudy(
    const QueryRefs& candidates, const Committee& committee,
    std::size_t count, const AcquisitionParams& params, std::uint64_t seed,
    unsigned threads) {
  const std::vector<QueryScore> scores =
      ScorePool(committee, candidates, params, threads);
  std::vector<SelectionResult> results;
  for (Strategy s : AllStrategies()) {
    SelectionResult r;
    r.strategy = s;
    r.selected = SelectBatch(scores, count, s, seed);
    const std::set<QueryId> ids(r.selected.begin(), r.selected.end());
    QueryRefs picked;
    for (const QueryGroup* g : candidates) {
      if (ids.count(g->query_id)) picked.push_back(g);
    }
    r.buckets = BucketDistribution(picked);
    r.labels = LabelDistribution(picked);
    r.pairs = CountPairs(picked);
    results.push_back(std::move(r));
  }
  return results;
}

void WriteBucketCsv(std::ostream& out,
                    std::span<const SelectionResult> results) {
  out << "strategy,bucket,count\n";
  for (const auto& r : results) {
    for (int b = 0; b < kNumBuckets; ++b) {
      out << StrategyName(r.strategy) << ',' << b << ',' << r.buckets[b]
          << '\n';
    }
  }
}

void WriteLabelCsv(std::ostream& out,
                   std::span<const SelectionResult> results) {
  out << "strategy,bucket,label,count\n";
  for (const auto& r : results) {
    for (int b = 0; b < kNumBuckets; ++b) {
      for (int l = 0; l < kNumLabels; ++l) {
        out << StrategyName(r.strategy) << ',' << b << ',' << l << ','
            << r.labels[b][l] << '\n';
      }
    }
  }
}

}  // namespace alrank
