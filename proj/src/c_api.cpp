#include "alrank/alrank.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <new>
#include <sstream>
#include <string>
#include <utility>

#include "alrank/acquisition.hpp"
#include "alrank/committee.hpp"
#include "alrank/config.hpp"
#include "alrank/dataset.hpp"
#include "alrank/error.hpp"
#include "alrank/gbrank.hpp"
#include "alrank/metrics.hpp"
#include "alrank/simulator.hpp"
#include "json.hpp"

struct alrank_corpus {
  alrank::Corpus corpus;
};

struct alrank_model {
  alrank::GBRankModel model;
};

struct alrank_committee {
  alrank::Committee committee;
};

struct alrank_run {
  alrank::RunResult result;
};

namespace {

using nlohmann::json;

thread_local std::string g_last_error;

template <typename Fn>
alrank_status Guard(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return ALRANK_OK;
  } catch (const alrank::Error& e) {
    g_last_error = e.what();
    return static_cast<alrank_status>(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return ALRANK_E_RUNTIME;
}

void Require(const void* p, const char* what) {
  if (p == nullptr) throw alrank::ConfigError(std::string(what) + " is NULL");
}

char* CopyString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

json ParseOptional(const char* text) {
  if (text == nullptr || *text == '\0') return json::object();
  return alrank::ParseConfigText(text);
}

alrank::RunConfig LoadConfig(const char* text) {
  return alrank::RunConfigFromJson(ParseOptional(text));
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw alrank::Error(alrank::ErrorKind::kRuntime, "cannot write " + path);
  out << text;
  if (!out) {
    throw alrank::Error(alrank::ErrorKind::kRuntime, "write failed for " + path);
  }
}

json ReadJsonFile(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw alrank::DataError(std::string("cannot open ") + what + " " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw alrank::DataError(path + ": invalid JSON: " + e.what());
  }
}

json HistogramJson(const alrank::BucketHistogram& h) {
  return json(std::vector<std::size_t>(h.begin(), h.end()));
}

}  // namespace

extern "C" {

const char* alrank_version(void) { return "1.0.0"; }

const char* alrank_last_error(void) { return g_last_error.c_str(); }

void alrank_string_free(char* s) { std::free(s); }

alrank_status alrank_config_default(char** out_json) {
  return Guard([&] {
    Require(out_json, "out_json");
    *out_json = CopyString(alrank::RunConfigToJson(alrank::RunConfig{}).dump(2));
  });
}

alrank_status alrank_config_resolve(const char* base_json,
                                    const char* overrides_json,
                                    char** out_json) {
  return Guard([&] {
    Require(out_json, "out_json");
    const json resolved = alrank::ResolveConfig(ParseOptional(base_json),
                                                ParseOptional(overrides_json));
    *out_json = CopyString(resolved.dump(2));
  });
}

alrank_status alrank_corpus_parse(const char* text, size_t length,
                                  alrank_corpus** out) {
  return Guard([&] {
    Require(out, "out");
    if (text == nullptr && length > 0) Require(text, "text");
    auto c = std::make_unique<alrank_corpus>();
    c->corpus = alrank::ParseLetor(std::string_view(text, length));
    *out = c.release();
  });
}

alrank_status alrank_corpus_read(const char* path, alrank_corpus** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    auto c = std::make_unique<alrank_corpus>();
    c->corpus = alrank::ReadLetorFile(path);
    *out = c.release();
  });
}

alrank_status alrank_corpus_generate(const char* config_json,
                                     alrank_corpus** out) {
  return Guard([&] {
    Require(out, "out");
    const alrank::RunConfig config = LoadConfig(config_json);
    auto c = std::make_unique<alrank_corpus>();
    c->corpus = alrank::GenerateSynthetic(config.synth, config.al.seed);
    *out = c.release();
  });
}

alrank_status alrank_corpus_write(const alrank_corpus* corpus,
                                  const char* path) {
  return Guard([&] {
    Require(corpus, "corpus");
    Require(path, "path");
    alrank::WriteLetorFile(corpus->corpus, path);
  });
}

alrank_status alrank_corpus_serialize(const alrank_corpus* corpus,
                                      char** out_text) {
  return Guard([&] {
    Require(corpus, "corpus");
    Require(out_text, "out_text");
    *out_text = CopyString(alrank::SerializeLetor(corpus->corpus));
  });
}

size_t alrank_corpus_num_queries(const alrank_corpus* corpus) {
  return corpus == nullptr ? 0 : corpus->corpus.queries.size();
}

size_t alrank_corpus_num_documents(const alrank_corpus* corpus) {
  return corpus == nullptr ? 0 : corpus->corpus.NumDocuments();
}

size_t alrank_corpus_feature_dim(const alrank_corpus* corpus) {
  return corpus == nullptr ? 0 : corpus->corpus.feature_dim;
}

alrank_status alrank_corpus_summary(const alrank_corpus* corpus,
                                    char** out_json) {
  return Guard([&] {
    Require(corpus, "corpus");
    Require(out_json, "out_json");
    const alrank::Corpus& c = corpus->corpus;
    const alrank::QueryRefs all = alrank::AllQueries(c);
    std::vector<std::size_t> labels(alrank::kNumLabels, 0);
    for (const auto& q : c.queries) {
      for (const auto& d : q.documents) ++labels[d.label];
    }
    const alrank::PairCounts pairs = alrank::CountPairs(all);
    const json doc = {
        {"provenance", alrank::ProvenanceName(c.provenance)},
        {"num_queries", c.queries.size()},
        {"num_documents", c.NumDocuments()},
        {"feature_dim", c.feature_dim},
        {"clamped_labels", c.clamped_labels},
        {"label_histogram", labels},
        {"bucket_histogram", HistogramJson(alrank::BucketDistribution(all))},
        {"valid_pairs", pairs.valid},
        {"neg_pos_pairs", pairs.neg_pos}};
    *out_json = CopyString(doc.dump(2));
  });
}

void alrank_corpus_free(alrank_corpus* corpus) { delete corpus; }

alrank_status alrank_model_train(const alrank_corpus* corpus,
                                 const char* config_json, alrank_model** out) {
  return Guard([&] {
    Require(corpus, "corpus");
    Require(out, "out");
    const alrank::RunConfig config = LoadConfig(config_json);
    auto m = std::make_unique<alrank_model>();
    m->model = alrank::Train(alrank::AllQueries(corpus->corpus),
                             config.al.RankerConfig());
    *out = m.release();
  });
}

alrank_status alrank_model_read(const char* path, alrank_model** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    auto m = std::make_unique<alrank_model>();
    m->model = alrank::GBRankModel::FromJson(ReadJsonFile(path, "model file"));
    *out = m.release();
  });
}

alrank_status alrank_model_write(const alrank_model* model, const char* path) {
  return Guard([&] {
    Require(model, "model");
    Require(path, "path");
    WriteText(path, model->model.ToJson().dump() + "\n");
  });
}

alrank_status alrank_model_predict(const alrank_model* model,
                                   const double* features, size_t dim,
                                   double* out_score) {
  return Guard([&] {
    Require(model, "model");
    Require(out_score, "out_score");
    if (dim > 0) Require(features, "features");
    *out_score = model->model.Predict(std::span<const double>(features, dim));
  });
}

alrank_status alrank_model_evaluate(const alrank_model* model,
                                    const alrank_corpus* corpus,
                                    const char* config_json, char** out_json) {
  return Guard([&] {
    Require(model, "model");
    Require(corpus, "corpus");
    Require(out_json, "out_json");
    const alrank::RunConfig config = LoadConfig(config_json);
    const alrank::QueryRefs all = alrank::AllQueries(corpus->corpus);
    std::vector<std::vector<double>> scores;
    scores.reserve(all.size());
    for (const alrank::QueryGroup* q : all) {
      std::vector<double>& s = scores.emplace_back();
      for (const auto& d : q->documents) s.push_back(model->model.Predict(d.features));
    }
    const alrank::EvalReport r =
        alrank::EvaluateRanking(all, scores, config.al.eval_k, config.al.gain);
    const json doc = {{"k", r.k},
                      {"gain", config.al.gain.Name()},
                      {"num_queries", r.num_queries},
                      {"dcg", r.dcg_k},
                      {"best_dcg", r.best_dcg_k},
                      {"r01", r.r01},
                      {"pairwise_accuracy",
                       alrank::PairwiseAccuracy(model->model, all)}};
    *out_json = CopyString(doc.dump(2));
  });
}

void alrank_model_free(alrank_model* model) { delete model; }

alrank_status alrank_committee_train(const alrank_corpus* corpus,
                                     const char* config_json, unsigned threads,
                                     alrank_committee** out) {
  return Guard([&] {
    Require(corpus, "corpus");
    Require(out, "out");
    const alrank::RunConfig config = LoadConfig(config_json);
    auto c = std::make_unique<alrank_committee>();
    c->committee = alrank::TrainCommittee(alrank::AllQueries(corpus->corpus),
                                          config.al.CommitteeSettings(),
                                          threads);
    *out = c.release();
  });
}

alrank_status alrank_committee_read(const char* path, alrank_committee** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    auto c = std::make_unique<alrank_committee>();
    c->committee = alrank::Committee::Read(path);
    *out = c.release();
  });
}

alrank_status alrank_committee_write(const alrank_committee* committee,
                                     const char* path) {
  return Guard([&] {
    Require(committee, "committee");
    Require(path, "path");
    committee->committee.Write(path);
  });
}

size_t alrank_committee_size(const alrank_committee* committee) {
  return committee == nullptr ? 0 : committee->committee.size();
}

alrank_status alrank_committee_score_query(const alrank_committee* committee,
                                           const alrank_corpus* corpus,
                                           unsigned long long query_id,
                                           double* out_scores,
                                           size_t* out_docs) {
  return Guard([&] {
    Require(committee, "committee");
    Require(corpus, "corpus");
    const alrank::QueryGroup* q = corpus->corpus.Find(query_id);
    if (q == nullptr) {
      throw alrank::DataError("unknown query id " + std::to_string(query_id));
    }
    if (out_docs != nullptr) *out_docs = q->documents.size();
    if (out_scores == nullptr) return;
    const alrank::ScoreMatrix m = alrank::ScoreQuery(committee->committee, *q);
    for (std::size_t i = 0; i < m.members(); ++i) {
      const auto row = m.row(i);
      std::copy(row.begin(), row.end(), out_scores + i * m.docs());
    }
  });
}

void alrank_committee_free(alrank_committee* committee) { delete committee; }

alrank_status alrank_rank_distribution(const double* scores, size_t n,
                                       double temperature, double* out_pmf) {
  return Guard([&] {
    Require(scores, "scores");
    Require(out_pmf, "out_pmf");
    const auto dists =
        alrank::RankDistributions(std::span<const double>(scores, n), temperature);
    for (std::size_t v = 0; v < n; ++v) {
      std::copy(dists[v].pmf.begin(), dists[v].pmf.end(), out_pmf + v * n);
    }
  });
}

alrank_status alrank_query_criteria(const double* scores, size_t members,
                                    size_t docs, double temperature,
                                    double* out_re, double* out_pv) {
  return Guard([&] {
    Require(scores, "scores");
    alrank::ScoreMatrix m(0, members, docs);
    for (std::size_t i = 0; i < members; ++i) {
      for (std::size_t j = 0; j < docs; ++j) m.at(i, j) = scores[i * docs + j];
    }
    const double re = alrank::RankingEntropy(m, temperature);
    const double pv = alrank::PredictionVariance(m);
    if (out_re != nullptr) *out_re = re;
    if (out_pv != nullptr) *out_pv = pv;
  });
}

alrank_status alrank_acquisition_scores_csv(const alrank_committee* committee,
                                            const alrank_corpus* corpus,
                                            const char* config_json,
                                            unsigned threads, char** out_csv) {
  return Guard([&] {
    Require(committee, "committee");
    Require(corpus, "corpus");
    Require(out_csv, "out_csv");
    const alrank::RunConfig config = LoadConfig(config_json);
    const auto scores =
        alrank::ScorePool(committee->committee, alrank::AllQueries(corpus->corpus),
                          config.al.Acquisition(), threads);
    std::ostringstream out;
    alrank::WriteScoresCsv(out, scores);
    *out_csv = CopyString(out.str());
  });
}

alrank_status alrank_run_active_learning(const alrank_corpus* pool,
                                         const alrank_corpus* validation,
                                         const char* config_json,
                                         unsigned threads,
                                         int train_final_committee,
                                         alrank_run** out) {
  return Guard([&] {
    Require(pool, "pool");
    Require(validation, "validation");
    Require(out, "out");
    const alrank::RunConfig config = LoadConfig(config_json);
    alrank::RunOptions options;
    options.threads = threads;
    options.final_committee = train_final_committee != 0;
    auto r = std::make_unique<alrank_run>();
    r->result = alrank::RunActiveLearning(pool->corpus, validation->corpus,
                                          config.al, options);
    *out = r.release();
  });
}

alrank_status alrank_run_read(const char* path, alrank_run** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    auto r = std::make_unique<alrank_run>();
    r->result.report = alrank::RunReport::FromJson(ReadJsonFile(path, "report"));
    *out = r.release();
  });
}

alrank_status alrank_run_compare(alrank_run* run, const alrank_run* baseline) {
  return Guard([&] {
    Require(run, "run");
    Require(baseline, "baseline");
    run->result.report.baseline =
        alrank::CompareRuns(run->result.report, baseline->result.report);
  });
}

alrank_status alrank_run_report_json(const alrank_run* run, char** out_json) {
  return Guard([&] {
    Require(run, "run");
    Require(out_json, "out_json");
    *out_json = CopyString(run->result.report.ToJson().dump(2) + "\n");
  });
}

alrank_status alrank_run_report_csv(const alrank_run* run, char** out_csv) {
  return Guard([&] {
    Require(run, "run");
    Require(out_csv, "out_csv");
    std::ostringstream out;
    run->result.report.WriteCsv(out);
    *out_csv = CopyString(out.str());
  });
}

alrank_status alrank_run_write_committee(const alrank_run* run,
                                         const char* path) {
  return Guard([&] {
    Require(run, "run");
    Require(path, "path");
    if (!run->result.committee) {
      throw alrank::ConfigError("run was not asked to keep a committee");
    }
    run->result.committee->Write(path);
  });
}

void alrank_run_free(alrank_run* run) { delete run; }

alrank_status alrank_analyze(const alrank_corpus* corpus,
                             const alrank_committee* committee,
                             const char* config_json, size_t select,
                             unsigned threads, const char* out_dir,
                             char** out_summary_json) {
  return Guard([&] {
    Require(corpus, "corpus");
    Require(committee, "committee");
    Require(out_dir, "out_dir");
    const alrank::RunConfig config = LoadConfig(config_json);
    const std::filesystem::path dir(out_dir);
    if (!std::filesystem::is_directory(dir)) {
      throw alrank::Error(alrank::ErrorKind::kRuntime,
                          std::string("not a directory: ") + out_dir);
    }
    const alrank::QueryRefs all = alrank::AllQueries(corpus->corpus);
    const alrank::AcquisitionParams params = config.al.Acquisition();
    const alrank::Committee& com = committee->committee;

    const alrank::CorrelationStudy study = alrank::RunCorrelationStudy(
        all, com, config.al.eval_k, config.al.gain, threads);
    std::ostringstream corr;
    study.WriteCsv(corr);
    WriteText((dir / "correlation.csv").string(), corr.str());
    const json pearson = study.PearsonJson();
    WriteText((dir / "pearson.json").string(), pearson.dump(2) + "\n");

    const std::size_t count = select == 0 ? all.size() : select;
    const auto results = alrank::RunSelectionStudy(
        all, com, count, params, config.al.seed + alrank::kSelectionSeedOffset,
        threads);
    std::ostringstream buckets;
    alrank::WriteBucketCsv(buckets, results);
    WriteText((dir / "bucket_distribution.csv").string(), buckets.str());
    std::ostringstream labels;
    alrank::WriteLabelCsv(labels, results);
    WriteText((dir / "label_distribution.csv").string(), labels.str());

    const auto scores = alrank::ScorePool(com, all, params, threads);
    std::ostringstream score_csv;
    alrank::WriteScoresCsv(score_csv, scores);
    WriteText((dir / "acquisition_scores.csv").string(), score_csv.str());

    if (out_summary_json != nullptr) {
      json pairs = json::object();
      for (const auto& r : results) {
        pairs[alrank::StrategyName(r.strategy)] = {
            {"valid_pairs", r.pairs.valid}, {"neg_pos_pairs", r.pairs.neg_pos}};
      }
      const json summary = {{"queries", all.size()},
                            {"selected", count},
                            {"pearson", pearson},
                            {"selection_pairs", pairs},
                            {"files",
                             {"correlation.csv", "pearson.json",
                              "bucket_distribution.csv",
                              "label_distribution.csv",
                              "acquisition_scores.csv"}}};
      *out_summary_json = CopyString(summary.dump(2));
    }
  });
}

}  // extern "C"
