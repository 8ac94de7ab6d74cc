/*
 * C interface to the alrank active learning-to-rank toolkit.
 *
 * All objects are opaque handles released with their *_free function.
 * Functions return an alrank_status; on failure a description of the last
 * error on the calling thread is available from alrank_last_error().
 * Strings returned through char** out-parameters are heap allocated and
 * must be released with alrank_string_free().
 *
 * Configuration is passed as JSON text in the layout printed by
 * alrank_config_default(); NULL or "" means "all defaults".
 */
#ifndef ALRANK_ALRANK_H_
#define ALRANK_ALRANK_H_

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define ALRANK_API __declspec(dllexport)
#else
#define ALRANK_API __attribute__((visibility("default")))
#endif

/* Values double as CLI exit codes. */
typedef enum {
  ALRANK_OK = 0,
  ALRANK_E_USAGE = 1,   /* invalid argument or configuration */
  ALRANK_E_DATA = 2,    /* malformed or inconsistent input data */
  ALRANK_E_RUNTIME = 3  /* I/O failure or internal error */
} alrank_status;

typedef struct alrank_corpus alrank_corpus;
typedef struct alrank_model alrank_model;
typedef struct alrank_committee alrank_committee;
typedef struct alrank_run alrank_run;

ALRANK_API const char* alrank_version(void);
ALRANK_API const char* alrank_last_error(void);
ALRANK_API void alrank_string_free(char* s);

/* ---- configuration ---- */
ALRANK_API alrank_status alrank_config_default(char** out_json);
/* Merges overrides_json over base_json, fills defaults, rejects unknown
 * keys and invalid values. Either input may be NULL. */
ALRANK_API alrank_status alrank_config_resolve(const char* base_json,
                                               const char* overrides_json,
                                               char** out_json);

/* ---- corpora ---- */
ALRANK_API alrank_status alrank_corpus_parse(const char* text, size_t length,
                                             alrank_corpus** out);
ALRANK_API alrank_status alrank_corpus_read(const char* path,
                                            alrank_corpus** out);
/* Uses the "synth" section and "seed" of config_json. */
ALRANK_API alrank_status alrank_corpus_generate(const char* config_json,
                                                alrank_corpus** out);
ALRANK_API alrank_status alrank_corpus_write(const alrank_corpus* corpus,
                                             const char* path);
ALRANK_API alrank_status alrank_corpus_serialize(const alrank_corpus* corpus,
                                                 char** out_text);
ALRANK_API size_t alrank_corpus_num_queries(const alrank_corpus* corpus);
ALRANK_API size_t alrank_corpus_num_documents(const alrank_corpus* corpus);
ALRANK_API size_t alrank_corpus_feature_dim(const alrank_corpus* corpus);
/* JSON: query/document counts, label and bucket histograms, pair counts. */
ALRANK_API alrank_status alrank_corpus_summary(const alrank_corpus* corpus,
                                               char** out_json);
ALRANK_API void alrank_corpus_free(alrank_corpus* corpus);

/* ---- single ranker ---- */
/* Trains the production ranker ("ranker" section) on every query. */
ALRANK_API alrank_status alrank_model_train(const alrank_corpus* corpus,
                                            const char* config_json,
                                            alrank_model** out);
ALRANK_API alrank_status alrank_model_read(const char* path,
                                           alrank_model** out);
ALRANK_API alrank_status alrank_model_write(const alrank_model* model,
                                            const char* path);
ALRANK_API alrank_status alrank_model_predict(const alrank_model* model,
                                              const double* features,
                                              size_t dim, double* out_score);
/* JSON: DCG@k, best DCG@k and R01@k averaged over the corpus queries. */
ALRANK_API alrank_status alrank_model_evaluate(const alrank_model* model,
                                               const alrank_corpus* corpus,
                                               const char* config_json,
                                               char** out_json);
ALRANK_API void alrank_model_free(alrank_model* model);

/* ---- committee ---- */
ALRANK_API alrank_status alrank_committee_train(const alrank_corpus* corpus,
                                                const char* config_json,
                                                unsigned threads,
                                                alrank_committee** out);
ALRANK_API alrank_status alrank_committee_read(const char* path,
                                               alrank_committee** out);
ALRANK_API alrank_status alrank_committee_write(
    const alrank_committee* committee, const char* path);
ALRANK_API size_t alrank_committee_size(const alrank_committee* committee);
/* Row-major members x documents score matrix for query `query_id`;
 * out_scores must hold size * N doubles where N is the query's document
 * count (returned through out_docs when out_scores is NULL). */
ALRANK_API alrank_status alrank_committee_score_query(
    const alrank_committee* committee, const alrank_corpus* corpus,
    unsigned long long query_id, double* out_scores, size_t* out_docs);
ALRANK_API void alrank_committee_free(alrank_committee* committee);

/* ---- acquisition primitives ---- */
/* out_pmf receives n rows of n entries: row v is document v's rank pmf. */
ALRANK_API alrank_status alrank_rank_distribution(const double* scores,
                                                  size_t n,
                                                  double temperature,
                                                  double* out_pmf);
/* Ranking entropy (bits) and prediction variance of a row-major
 * members x docs score matrix. */
ALRANK_API alrank_status alrank_query_criteria(const double* scores,
                                               size_t members, size_t docs,
                                               double temperature,
                                               double* out_re,
                                               double* out_pv);
/* CSV query_id,bucket,re,pv,lv,elo_dcg,f for every query of the corpus. */
ALRANK_API alrank_status alrank_acquisition_scores_csv(
    const alrank_committee* committee, const alrank_corpus* corpus,
    const char* config_json, unsigned threads, char** out_csv);

/* ---- active learning runs ---- */
ALRANK_API alrank_status alrank_run_active_learning(
    const alrank_corpus* pool, const alrank_corpus* validation,
    const char* config_json, unsigned threads, int train_final_committee,
    alrank_run** out);
ALRANK_API alrank_status alrank_run_read(const char* path, alrank_run** out);
/* Attaches the relative change of `run` over `baseline`. */
ALRANK_API alrank_status alrank_run_compare(alrank_run* run,
                                            const alrank_run* baseline);
ALRANK_API alrank_status alrank_run_report_json(const alrank_run* run,
                                                char** out_json);
ALRANK_API alrank_status alrank_run_report_csv(const alrank_run* run,
                                               char** out_csv);
/* Fails with ALRANK_E_USAGE when the run kept no committee. */
ALRANK_API alrank_status alrank_run_write_committee(const alrank_run* run,
                                                    const char* path);
ALRANK_API void alrank_run_free(alrank_run* run);

/* ---- analysis ---- */
/* Writes correlation.csv, bucket_distribution.csv,
 * label_distribution.csv, acquisition_scores.csv and pearson.json into
 * out_dir (which must exist). `select` queries are picked per strategy. */
ALRANK_API alrank_status alrank_analyze(const alrank_corpus* corpus,
                                        const alrank_committee* committee,
                                        const char* config_json,
                                        size_t select, unsigned threads,
                                        const char* out_dir,
                                        char** out_summary_json);

#ifdef __cplusplus
}
#endif

#endif /* ALRANK_ALRANK_H_ */
