// alrank command line front end. Talks to the toolkit only through the C API.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "alrank/alrank.h"
#include "json.hpp"

namespace {

using nlohmann::json;

constexpr const char* kPrecedence =
    "Settings precedence: command-line flags override values from --config,\n"
    "which override the built-in defaults. --config takes a JSON document\n"
    "shaped like the output of `run --print-config`.";

// Failure carrying an alrank_status so main can map it to an exit code.
struct Failure {
  alrank_status status;
  std::string message;
};

void Check(alrank_status s) {
  if (s != ALRANK_OK) throw Failure{s, alrank_last_error()};
}

std::string TakeString(char* s) {
  std::string out(s == nullptr ? "" : s);
  alrank_string_free(s);
  return out;
}

std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{ALRANK_E_USAGE, "cannot open config file " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Failure{ALRANK_E_RUNTIME, "cannot write " + path};
  out << text;
  if (!out) throw Failure{ALRANK_E_RUNTIME, "write failed for " + path};
}

// Owning wrappers for the C handles.
template <typename T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() {
    if (p != nullptr) Free(p);
  }
  T** out() { return &p; }
};
using Corpus = Handle<alrank_corpus, alrank_corpus_free>;
using Model = Handle<alrank_model, alrank_model_free>;
using CommitteeHandle = Handle<alrank_committee, alrank_committee_free>;
using Run = Handle<alrank_run, alrank_run_free>;

// Flag values collected before the config is resolved.
struct Overrides {
  json doc = json::object();

  template <typename T>
  void Set(const std::optional<T>& v, const char* section, const char* key) {
    if (!v) return;
    if (section == nullptr) {
      doc[key] = *v;
    } else {
      doc[section][key] = *v;
    }
  }
};

std::string ResolveConfig(const std::string& config_path,
                          const Overrides& overrides) {
  const std::string base =
      config_path.empty() ? std::string() : ReadTextFile(config_path);
  const std::string over = overrides.doc.dump();
  char* out = nullptr;
  Check(alrank_config_resolve(base.c_str(), over.c_str(), &out));
  return TakeString(out);
}

struct GenArgs {
  std::optional<long long> queries, docs, dim, first_qid;
  std::optional<double> noise;
  std::optional<unsigned long long> seed;
  std::string output;
  std::string config;
};

int CmdGen(const GenArgs& a) {
  Overrides o;
  o.Set(a.queries, "synth", "num_queries");
  o.Set(a.docs, "synth", "docs_per_query");
  o.Set(a.dim, "synth", "feature_dim");
  o.Set(a.noise, "synth", "noise_scale");
  o.Set(a.first_qid, "synth", "first_query_id");
  o.Set(a.seed, nullptr, "seed");
  const std::string config = ResolveConfig(a.config, o);
  Corpus corpus;
  Check(alrank_corpus_generate(config.c_str(), corpus.out()));
  Check(alrank_corpus_write(corpus.p, a.output.c_str()));
  char* summary = nullptr;
  Check(alrank_corpus_summary(corpus.p, &summary));
  std::cout << "wrote " << a.output << "\n" << TakeString(summary) << "\n";
  return 0;
}

struct RunArgs {
  std::string pool, val, config, output = "run_report.json", csv,
                                 committee_out, baseline;
  std::optional<std::string> strategy;
  std::optional<double> alpha, temperature;
  std::optional<long long> bs, base, cycles, quota;
  std::optional<unsigned long long> seed;
  unsigned threads = 1;
  bool print_config = false;
};

int CmdRun(const RunArgs& a) {
  Overrides o;
  o.Set(a.strategy, "active_learning", "strategy");
  o.Set(a.alpha, "active_learning", "alpha");
  o.Set(a.temperature, "active_learning", "temperature");
  o.Set(a.bs, "active_learning", "batch_size");
  o.Set(a.base, "active_learning", "base_size");
  o.Set(a.cycles, "active_learning", "cycles");
  o.Set(a.quota, "active_learning", "quota");
  o.Set(a.seed, nullptr, "seed");
  const std::string config = ResolveConfig(a.config, o);
  if (a.print_config) {
    std::cout << config << "\n";
    return 0;
  }
  if (a.pool.empty() || a.val.empty()) {
    throw Failure{ALRANK_E_USAGE, "run requires --pool and --val"};
  }
  Corpus pool, val;
  Check(alrank_corpus_read(a.pool.c_str(), pool.out()));
  Check(alrank_corpus_read(a.val.c_str(), val.out()));
  Run run;
  Check(alrank_run_active_learning(pool.p, val.p, config.c_str(), a.threads,
                                   a.committee_out.empty() ? 0 : 1, run.out()));
  if (!a.baseline.empty()) {
    Run base;
    Check(alrank_run_read(a.baseline.c_str(), base.out()));
    Check(alrank_run_compare(run.p, base.p));
  }
  char* text = nullptr;
  Check(alrank_run_report_json(run.p, &text));
  WriteTextFile(a.output, TakeString(text));
  std::cout << "report: " << a.output << "\n";
  if (!a.csv.empty()) {
    Check(alrank_run_report_csv(run.p, &text));
    WriteTextFile(a.csv, TakeString(text));
    std::cout << "csv: " << a.csv << "\n";
  }
  if (!a.committee_out.empty()) {
    Check(alrank_run_write_committee(run.p, a.committee_out.c_str()));
    std::cout << "committee: " << a.committee_out << "\n";
  }
  return 0;
}

struct AnalyzeArgs {
  std::string corpus, committee, out_dir = ".", config;
  std::optional<unsigned long long> seed;
  long long select = 0;
  unsigned threads = 1;
};

int CmdAnalyze(const AnalyzeArgs& a) {
  Overrides o;
  o.Set(a.seed, nullptr, "seed");
  const std::string config = ResolveConfig(a.config, o);
  if (a.select < 0) throw Failure{ALRANK_E_USAGE, "--select must be >= 0"};
  if (!std::filesystem::exists(a.committee)) {
    throw Failure{ALRANK_E_DATA, "committee file not found: " + a.committee};
  }
  Corpus corpus;
  Check(alrank_corpus_read(a.corpus.c_str(), corpus.out()));
  CommitteeHandle committee;
  Check(alrank_committee_read(a.committee.c_str(), committee.out()));
  std::error_code ec;
  std::filesystem::create_directories(a.out_dir, ec);
  char* summary = nullptr;
  Check(alrank_analyze(corpus.p, committee.p, config.c_str(),
                       static_cast<size_t>(a.select), a.threads,
                       a.out_dir.c_str(), &summary));
  std::cout << TakeString(summary) << "\n";
  return 0;
}

struct EvalArgs {
  std::string train, model, val, save_model, config;
  std::optional<unsigned long long> seed;
};

int CmdEval(const EvalArgs& a) {
  if (a.train.empty() == a.model.empty()) {
    throw Failure{ALRANK_E_USAGE, "eval needs exactly one of --train or --model"};
  }
  Overrides o;
  o.Set(a.seed, nullptr, "seed");
  const std::string config = ResolveConfig(a.config, o);
  Model model;
  if (!a.train.empty()) {
    Corpus train;
    Check(alrank_corpus_read(a.train.c_str(), train.out()));
    Check(alrank_model_train(train.p, config.c_str(), model.out()));
  } else {
    Check(alrank_model_read(a.model.c_str(), model.out()));
  }
  if (!a.save_model.empty()) {
    Check(alrank_model_write(model.p, a.save_model.c_str()));
  }
  Corpus val;
  Check(alrank_corpus_read(a.val.c_str(), val.out()));
  char* out = nullptr;
  Check(alrank_model_evaluate(model.p, val.p, config.c_str(), &out));
  std::cout << TakeString(out) << "\n";
  return 0;
}

struct ReportArgs {
  std::string run, baseline, csv, output;
};

int CmdReport(const ReportArgs& a) {
  Run run;
  Check(alrank_run_read(a.run.c_str(), run.out()));
  if (!a.baseline.empty()) {
    Run base;
    Check(alrank_run_read(a.baseline.c_str(), base.out()));
    Check(alrank_run_compare(run.p, base.p));
  }
  char* text = nullptr;
  if (!a.csv.empty()) {
    Check(alrank_run_report_csv(run.p, &text));
    WriteTextFile(a.csv, TakeString(text));
  }
  Check(alrank_run_report_json(run.p, &text));
  const std::string report = TakeString(text);
  if (!a.output.empty()) WriteTextFile(a.output, report);
  const json doc = json::parse(report);
  json summary = {{"strategy", doc["config"]["active_learning"]["strategy"]},
                  {"cycles", doc["cycles"].size()},
                  {"stop_reason", doc["stop_reason"]},
                  {"aggregate", doc["aggregate"]}};
  if (doc.contains("baseline_comparison")) {
    summary["baseline_comparison"] = doc["baseline_comparison"];
  }
  std::cout << summary.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"alrank: active learning to rank toolkit"};
  app.footer(kPrecedence);
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(alrank_version()));

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic corpus");
  gen_cmd->add_option("--queries", gen.queries, "Number of queries (>= 10)");
  gen_cmd->add_option("--docs", gen.docs, "Documents per query");
  gen_cmd->add_option("--dim", gen.dim, "Feature dimensionality");
  gen_cmd->add_option("--noise", gen.noise, "Label noise scale");
  gen_cmd->add_option("--first-qid", gen.first_qid, "Id of the first query");
  gen_cmd->add_option("--seed", gen.seed, "Random seed");
  gen_cmd->add_option("-o,--output", gen.output, "Output LETOR file")->required();
  gen_cmd->add_option("--config", gen.config, "JSON config file");

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Simulate an active learning run");
  run_cmd->add_option("--pool", run.pool, "Unlabeled pool corpus");
  run_cmd->add_option("--val", run.val, "Validation corpus");
  run_cmd->add_option("--config", run.config, "JSON config file");
  run_cmd->add_option("--strategy", run.strategy,
                      "random|re|pv|lv|re_pv|elo_dcg");
  run_cmd->add_option("--alpha", run.alpha, "PV weight in RE + alpha*PV");
  run_cmd->add_option("--temperature", run.temperature,
                      "Pairwise probability temperature");
  run_cmd->add_option("--bs", run.bs, "Batch size per cycle");
  run_cmd->add_option("--base", run.base, "Initial labeled base size");
  run_cmd->add_option("--cycles", run.cycles, "Number of cycles");
  run_cmd->add_option("--quota", run.quota, "Annotation quota");
  run_cmd->add_option("--seed", run.seed, "Random seed");
  run_cmd->add_option("--threads", run.threads, "Worker threads")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("-o,--output", run.output, "Report JSON path");
  run_cmd->add_option("--csv", run.csv, "Per-cycle CSV path");
  run_cmd->add_option("--committee-out", run.committee_out,
                      "Save a committee trained on the final labeled set");
  run_cmd->add_option("--baseline", run.baseline,
                      "Baseline report to compare against");
  run_cmd->add_flag("--print-config", run.print_config,
                    "Print the resolved config and exit");

  AnalyzeArgs analyze;
  auto* analyze_cmd =
      app.add_subcommand("analyze", "Correlation and selection tables");
  analyze_cmd->add_option("--corpus", analyze.corpus, "Corpus file")->required();
  analyze_cmd->add_option("--committee", analyze.committee, "Committee file")
      ->required();
  analyze_cmd->add_option("--select", analyze.select,
                          "Queries selected per strategy (0 = all)");
  analyze_cmd->add_option("--out-dir", analyze.out_dir, "Output directory");
  analyze_cmd->add_option("--config", analyze.config, "JSON config file");
  analyze_cmd->add_option("--seed", analyze.seed, "Random seed");
  analyze_cmd->add_option("--threads", analyze.threads, "Worker threads")
      ->check(CLI::PositiveNumber);

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Train or load a ranker and evaluate it");
  eval_cmd->add_option("--train", eval.train, "Training corpus");
  eval_cmd->add_option("--model", eval.model, "Saved model file");
  eval_cmd->add_option("--val", eval.val, "Evaluation corpus")->required();
  eval_cmd->add_option("--save-model", eval.save_model, "Write the model here");
  eval_cmd->add_option("--config", eval.config, "JSON config file");
  eval_cmd->add_option("--seed", eval.seed, "Random seed");

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Summarize a run report");
  report_cmd->add_option("--run", report.run, "Report JSON")->required();
  report_cmd->add_option("--baseline", report.baseline, "Baseline report JSON");
  report_cmd->add_option("--csv", report.csv, "Write per-cycle CSV");
  report_cmd->add_option("-o,--output", report.output,
                         "Write the (compared) report JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ALRANK_E_USAGE;
  }

  try {
    if (*gen_cmd) return CmdGen(gen);
    if (*run_cmd) return CmdRun(run);
    if (*analyze_cmd) return CmdAnalyze(analyze);
    if (*eval_cmd) return CmdEval(eval);
    if (*report_cmd) return CmdReport(report);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.status;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ALRANK_E_RUNTIME;
  }
  return ALRANK_E_USAGE;
}
