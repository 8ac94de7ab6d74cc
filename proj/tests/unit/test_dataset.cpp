#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <string>

#include "alrank/dataset.hpp"
#include "alrank/error.hpp"

namespace alrank {
namespace {

TEST(ParseLetor, GroupsByQidAndZeroFills) {
  const std::string text =
      "2 qid:7 1:0.5 3:1.5 # bucket=3\n"
      "0 qid:7 1:0.1 2:0.2 3:0.3\n"
      "# a comment line\n"
      "\n"
      "4 qid:2 3:9\n";
  const Corpus c = ParseLetor(text);
  ASSERT_EQ(c.feature_dim, 3u);
  ASSERT_EQ(c.queries.size(), 2u);
  EXPECT_EQ(c.queries[0].query_id, 7u);
  EXPECT_EQ(c.queries[0].bucket, 3);
  EXPECT_EQ(c.queries[1].query_id, 2u);
  EXPECT_EQ(c.queries[1].bucket, kDefaultBucket);
  const auto& d0 = c.queries[0].documents[0];
  EXPECT_EQ(d0.label, 2);
  EXPECT_EQ(d0.features, (std::vector<double>{0.5, 0.0, 1.5}));
  EXPECT_EQ(c.queries[1].documents[0].features,
            (std::vector<double>{0.0, 0.0, 9.0}));
  EXPECT_EQ(c.queries[0].documents[1].doc_id, 1u);
  EXPECT_EQ(c.provenance, Provenance::kParsed);
}

TEST(ParseLetor, HandlesCrlf) {
  const Corpus c = ParseLetor("1 qid:1 1:1 2:2\r\n0 qid:1 1:3 2:4\r\n");
  EXPECT_EQ(c.NumDocuments(), 2u);
  EXPECT_EQ(c.queries[0].documents[1].features[1], 4.0);
}

TEST(ParseLetor, ClampsLabelsAboveMax) {
  const Corpus c = ParseLetor("7 qid:1 1:1\n3 qid:1 1:2\n9 qid:1 1:3\n");
  EXPECT_EQ(c.queries[0].documents[0].label, kMaxLabel);
  EXPECT_EQ(c.queries[0].documents[2].label, kMaxLabel);
  EXPECT_EQ(c.clamped_labels, 2u);
}

TEST(ParseLetor, RejectsMalformedInput) {
  EXPECT_THROW(ParseLetor(""), DataError);
  EXPECT_THROW(ParseLetor("# only comments\n"), DataError);
  EXPECT_THROW(ParseLetor("-1 qid:1 1:1\n"), DataError);
  EXPECT_THROW(ParseLetor("1 1:1 2:2\n"), DataError);
  EXPECT_THROW(ParseLetor("1 qid:1\n"), DataError);
  EXPECT_THROW(ParseLetor("x qid:1 1:1\n"), DataError);
  EXPECT_THROW(ParseLetor("1 qid:1 2:1 1:1\n"), DataError);
  EXPECT_THROW(ParseLetor("1 qid:1 0:1\n"), DataError);
  EXPECT_THROW(ParseLetor("1 qid:1 1:nan\n"), DataError);
  EXPECT_THROW(ParseLetor("1 qid:1 1:1 #bucket=12\n"), DataError);
  EXPECT_THROW(ParseLetor("1 qid:1 1:1 #bucket=2\n0 qid:1 1:1 #bucket=3\n"),
               DataError);
}

TEST(ParseLetor, InconsistentDimensionalityNamesTheLine) {
  try {
    ParseLetor("1 qid:1 1:1 2:1\n0 qid:1 1:1 2:1\n2 qid:2 1:1 2:2 3:3\n");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("line 3"), std::string::npos) << what;
    EXPECT_NE(what.find("inconsistent feature dimensionality"),
              std::string::npos)
        << what;
  }
}

TEST(Letor, RoundTripsSyntheticCorpus) {
  SynthConfig cfg;
  cfg.num_queries = 20;
  cfg.docs_per_query = 5;
  cfg.feature_dim = 4;
  const Corpus c = GenerateSynthetic(cfg, 11);
  const std::string text = SerializeLetor(c);
  const Corpus back = ParseLetor(text);
  EXPECT_EQ(back, c);
  EXPECT_EQ(back.provenance, Provenance::kSynthetic);
  EXPECT_EQ(SerializeLetor(back), text);
}

TEST(Letor, FileRoundTrip) {
  SynthConfig cfg;
  cfg.num_queries = 10;
  cfg.docs_per_query = 3;
  cfg.feature_dim = 2;
  const Corpus c = GenerateSynthetic(cfg, 2);
  const auto path =
      (std::filesystem::temp_directory_path() / "alrank_dataset_rt.txt")
          .string();
  WriteLetorFile(c, path);
  EXPECT_EQ(ReadLetorFile(path), c);
  std::remove(path.c_str());
  EXPECT_THROW(ReadLetorFile(path), DataError);
}

TEST(Synthetic, ShapeIdsAndBuckets) {
  SynthConfig cfg;
  cfg.num_queries = 30;
  cfg.docs_per_query = 7;
  cfg.feature_dim = 5;
  const Corpus c = GenerateSynthetic(cfg, 5);
  ASSERT_EQ(c.queries.size(), 30u);
  EXPECT_EQ(c.feature_dim, 5u);
  for (std::size_t i = 0; i < c.queries.size(); ++i) {
    EXPECT_EQ(c.queries[i].query_id, i + 1);
    EXPECT_EQ(c.queries[i].bucket, static_cast<int>(i % 10));
    ASSERT_EQ(c.queries[i].documents.size(), 7u);
    for (const auto& d : c.queries[i].documents) {
      EXPECT_EQ(d.features.size(), 5u);
      EXPECT_GE(d.label, 0);
      EXPECT_LE(d.label, kMaxLabel);
    }
  }
  EXPECT_NO_THROW(c.Validate());
}

TEST(Synthetic, DeterministicPerSeed) {
  SynthConfig cfg;
  cfg.num_queries = 15;
  cfg.docs_per_query = 4;
  EXPECT_EQ(GenerateSynthetic(cfg, 9), GenerateSynthetic(cfg, 9));
  EXPECT_FALSE(GenerateSynthetic(cfg, 9) == GenerateSynthetic(cfg, 10));
}

TEST(Synthetic, LabelFrequenciesFollowProfile) {
  SynthConfig cfg;
  cfg.num_queries = 2000;
  cfg.docs_per_query = 20;
  cfg.feature_dim = 2;
  const Corpus c = GenerateSynthetic(cfg, 3);
  std::array<std::array<double, kNumLabels>, kNumBuckets> freq{};
  std::array<double, kNumBuckets> total{};
  for (const auto& q : c.queries) {
    for (const auto& d : q.documents) {
      freq[q.bucket][d.label] += 1;
      total[q.bucket] += 1;
    }
  }
  const LabelProfile& p = cfg.bucket_label_profile;
  for (int b = 0; b < kNumBuckets; ++b) {
    for (int l = 0; l < kNumLabels; ++l) {
      // 4000 draws per bucket: a 5 sigma band is about 0.04.
      EXPECT_NEAR(freq[b][l] / total[b], p[b][l], 0.04) << b << "," << l;
    }
  }
}

double LabelStd(const std::array<double, kNumLabels>& p) {
  double mean = 0.0, sq = 0.0;
  for (int l = 0; l < kNumLabels; ++l) {
    mean += l * p[l];
    sq += l * l * p[l];
  }
  return std::sqrt(sq - mean * mean);
}

TEST(Synthetic, DefaultProfileShape) {
  const LabelProfile p = DefaultLabelProfile();
  // Bucket 0 by hand: exp(-(l - 2.5)^2 / 8), normalized.
  std::array<double, kNumLabels> head{};
  double z = 0.0;
  for (int l = 0; l < kNumLabels; ++l) {
    head[l] = std::exp(-(l - 2.5) * (l - 2.5) / 8.0);
    z += head[l];
  }
  for (int l = 0; l < kNumLabels; ++l) EXPECT_NEAR(p[0][l], head[l] / z, 1e-12);
  EXPECT_GT(p[0][2] + p[0][3] + p[0][4], 0.6);
  EXPECT_GE(p[9][0], 0.7);
  for (const auto& row : p) {
    EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-12);
  }
  // Label-0 mass grows and label spread shrinks toward the tail.
  for (int b = 1; b < kNumBuckets; ++b) {
    EXPECT_GT(p[b][0], p[b - 1][0]);
    EXPECT_LT(LabelStd(p[b]), LabelStd(p[b - 1]));
  }
}

TEST(Synthetic, ConfigValidation) {
  SynthConfig cfg;
  cfg.num_queries = 5;
  EXPECT_THROW(cfg.Validate(), ConfigError);
  cfg = SynthConfig{};
  cfg.docs_per_query = 1;
  EXPECT_THROW(cfg.Validate(), ConfigError);
  cfg = SynthConfig{};
  cfg.noise_scale = -1;
  EXPECT_THROW(cfg.Validate(), ConfigError);
  cfg = SynthConfig{};
  cfg.bucket_label_profile[4][0] += 0.1;
  EXPECT_THROW(cfg.Validate(), ConfigError);
}

TEST(ParseLetor, DocumentedExamples) {
  const Corpus one = ParseLetor("2 qid:7 1:0.5 2:1.0");
  ASSERT_EQ(one.queries.size(), 1u);
  EXPECT_EQ(one.queries[0].query_id, 7u);
  EXPECT_EQ(one.queries[0].documents[0].label, 2);
  EXPECT_EQ(one.queries[0].documents[0].features,
            (std::vector<double>{0.5, 1.0}));

  const Corpus two = ParseLetor("0 qid:1 1:0.0\n4 qid:1 1:1.0");
  ASSERT_EQ(two.queries.size(), 1u);
  EXPECT_EQ(two.queries[0].Labels(), (std::vector<int>{0, 4}));

  EXPECT_THROW(ParseLetor("3 qid:2 2:1.0 1:0.5"), DataError);
}

TEST(Synthetic, TenQueriesOnePerBucket) {
  SynthConfig cfg;
  cfg.num_queries = 10;
  cfg.docs_per_query = 5;
  cfg.feature_dim = 4;
  const Corpus c = GenerateSynthetic(cfg, 1);
  EXPECT_EQ(c.NumDocuments(), 50u);
  std::set<int> buckets;
  for (const auto& q : c.queries) buckets.insert(q.bucket);
  EXPECT_EQ(buckets.size(), 10u);
  EXPECT_EQ(SerializeLetor(c), SerializeLetor(GenerateSynthetic(cfg, 1)));
}

TEST(Synthetic, TailBucketIsMostlyIrrelevant) {
  SynthConfig cfg;
  cfg.num_queries = 1000;
  const Corpus c = GenerateSynthetic(cfg, 1);
  double zeros = 0.0, total = 0.0;
  for (const auto& q : c.queries) {
    if (q.bucket != 9) continue;
    for (const auto& d : q.documents) {
      zeros += d.label == 0;
      total += 1;
    }
  }
  EXPECT_GE(zeros / total, 0.7);
}

TEST(SplitPool, DocumentedExamples) {
  SynthConfig cfg;
  cfg.num_queries = 100;
  cfg.docs_per_query = 2;
  EXPECT_THROW(SplitPool(GenerateSynthetic(cfg, 1), 100, 7), ConfigError);
  cfg.num_queries = 1000;
  const Corpus c = GenerateSynthetic(cfg, 1);
  const PoolState p = SplitPool(c, 100, 7);
  EXPECT_EQ(p.labeled.size(), 100u);
  EXPECT_EQ(p.unlabeled.size(), 900u);
  EXPECT_EQ(SplitPool(c, 100, 7), p);
}

TEST(SplitPool, PartitionsIdsDeterministically) {
  SynthConfig cfg;
  cfg.num_queries = 50;
  cfg.docs_per_query = 2;
  const Corpus c = GenerateSynthetic(cfg, 1);
  const PoolState a = SplitPool(c, 12, 77);
  EXPECT_EQ(a.labeled.size(), 12u);
  EXPECT_EQ(a.unlabeled.size(), 38u);
  std::set<QueryId> all = a.labeled;
  all.insert(a.unlabeled.begin(), a.unlabeled.end());
  EXPECT_EQ(all.size(), 50u);
  EXPECT_EQ(SplitPool(c, 12, 77), a);
  EXPECT_FALSE(SplitPool(c, 12, 78) == a);
  EXPECT_THROW(SplitPool(c, 0, 1), ConfigError);
  EXPECT_THROW(SplitPool(c, 50, 1), ConfigError);
}

TEST(SelectQueries, CorpusOrderAndUnknownIds) {
  SynthConfig cfg;
  cfg.num_queries = 10;
  cfg.docs_per_query = 2;
  const Corpus c = GenerateSynthetic(cfg, 1);
  const QueryRefs refs = SelectQueries(c, {9, 2, 5});
  ASSERT_EQ(refs.size(), 3u);
  EXPECT_EQ(refs[0]->query_id, 2u);
  EXPECT_EQ(refs[2]->query_id, 9u);
  EXPECT_THROW(SelectQueries(c, {99}), DataError);
}

}  // namespace
}  // namespace alrank
