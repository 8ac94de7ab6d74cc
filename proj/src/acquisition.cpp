#include "alrank/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "alrank/error.hpp"
#include "alrank/format.hpp"
#include "alrank/parallel.hpp"

namespace alrank {
namespace {

void CheckTemperature(double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ConfigError("temperature must be > 0");
  }
}

double EntropyBits(std::span<const double> p) {
  double e = 0.0;
  for (double x : p) {
    if (x > 0.0) e -= x * std::log2(x);
  }
  return e;
}

double Criterion(const QueryScore& s, Strategy strategy) {
  switch (strategy) {
    case Strategy::kRe:
      return s.re;
    case Strategy::kPv:
      return s.pv;
    case Strategy::kLv:
      return s.lv;
    case Strategy::kRePv:
      return s.f;
    case Strategy::kEloDcg:
      return s.elo_dcg;
    case Strategy::kRandom:
      break;
  }
  return 0.0;
}

}  // namespace

double PairwiseProb(double s_u, double s_v, double temperature) {
  CheckTemperature(temperature);
  return 1.0 / (1.0 + std::exp(-(s_u - s_v) / temperature));
}

std::vector<RankDistribution> RankDistributions(std::span<const double> scores,
                                                double temperature) {
  CheckTemperature(temperature);
  const std::size_t n = scores.size();
  if (n == 0) throw DataError("rank distribution of an empty score vector");
  std::vector<RankDistribution> out(n);
  for (std::size_t v = 0; v < n; ++v) {
    std::vector<double>& p = out[v].pmf;
    p.assign(n, 0.0);
    p[0] = 1.0;
    std::size_t support = 0;  // highest rank reachable so far
    for (std::size_t u = 0; u < n; ++u) {
      if (u == v) continue;
      const double beats = PairwiseProb(scores[u], scores[v], temperature);
      ++support;
      for (std::size_t r = support; r > 0; --r) {
        p[r] = p[r] * (1.0 - beats) + p[r - 1] * beats;
      }
      p[0] *= 1.0 - beats;
    }
  }
  return out;
}

double DocEntropy(std::span<const RankDistribution> member_pmfs) {
  if (member_pmfs.empty()) throw DataError("entropy of zero distributions");
  const std::size_t n = member_pmfs.front().pmf.size();
  std::vector<double> mean(n, 0.0);
  for (const auto& d : member_pmfs) {
    if (d.pmf.size() != n) {
      throw DataError("rank distributions differ in length");
    }
    for (std::size_t r = 0; r < n; ++r) mean[r] += d.pmf[r];
  }
  const double m = static_cast<double>(member_pmfs.size());
  for (double& x : mean) x /= m;
  return EntropyBits(mean);
}

void DistributionStats::Merge(const DistributionStats& other) {
  if (other.count == 0) return;
  if (count == 0) {
    *this = other;
    return;
  }
  count += other.count;
  max_sum_error = std::max(max_sum_error, other.max_sum_error);
  min_entry = std::min(min_entry, other.min_entry);
}

double RankingEntropy(const ScoreMatrix& scores, double temperature,
                      DistributionStats* stats) {
  scores.Validate();
  const std::size_t m = scores.members();
  const std::size_t n = scores.docs();
  std::vector<std::vector<RankDistribution>> per_member(m);
  for (std::size_t i = 0; i < m; ++i) {
    per_member[i] = RankDistributions(scores.row(i), temperature);
  }
  if (stats != nullptr) {
    DistributionStats local;
    for (const auto& dists : per_member) {
      for (const auto& d : dists) {
        const double sum = std::accumulate(d.pmf.begin(), d.pmf.end(), 0.0);
        const double lowest = *std::min_element(d.pmf.begin(), d.pmf.end());
        if (local.count == 0) {
          local.max_sum_error = std::abs(sum - 1.0);
          local.min_entry = lowest;
        } else {
          local.max_sum_error =
              std::max(local.max_sum_error, std::abs(sum - 1.0));
          local.min_entry = std::min(local.min_entry, lowest);
        }
        ++local.count;
      }
    }
    stats->Merge(local);
  }
  double total = 0.0;
  std::vector<RankDistribution> doc_pmfs(m);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < m; ++i) doc_pmfs[i] = per_member[i][j];
    total += DocEntropy(doc_pmfs);
  }
  return total / static_cast<double>(n);
}

double PredictionVariance(const ScoreMatrix& scores) {
  scores.Validate();
  const double n = static_cast<double>(scores.docs());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.members(); ++i) {
    const auto row = scores.row(i);
    // Centered on the first entry so a constant row gives exactly 0.
    const double pivot = row[0];
    double shifted_mean = 0.0;
    for (double s : row) shifted_mean += s - pivot;
    shifted_mean /= n;
    double ss = 0.0;
    for (double s : row) {
      const double d = (s - pivot) - shifted_mean;
      ss += d * d;
    }
    total += std::sqrt(ss / n);
  }
  return total / static_cast<double>(scores.members());
}

double LabelVariance(std::span<const int> labels) {
  if (labels.empty()) throw DataError("label variance of an empty list");
  const double n = static_cast<double>(labels.size());
  double mean = 0.0;
  for (int l : labels) mean += l;
  mean /= n;
  double ss = 0.0;
  for (int l : labels) ss += (l - mean) * (l - mean);
  return std::sqrt(ss / n);
}

double EloDcg(const ScoreMatrix& scores, int k, const GainFn& gain) {
  scores.Validate();
  const std::size_t m = scores.members();
  const std::size_t n = scores.docs();
  std::vector<double> grades(n);
  auto dcg_of = [&](std::span<const double> s) {
    const auto order = OrderByScore(s);
    for (std::size_t pos = 0; pos < n; ++pos) {
      grades[pos] = std::max(s[order[pos]], 0.0);
    }
    return DcgAtK(std::span<const double>(grades), k, gain);
  };
  double member_mean = 0.0;
  for (std::size_t i = 0; i < m; ++i) member_mean += dcg_of(scores.row(i));
  member_mean /= static_cast<double>(m);

  std::vector<double> column_mean(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) column_mean[j] += scores.at(i, j);
  }
  for (double& x : column_mean) x /= static_cast<double>(m);
  return member_mean - dcg_of(column_mean);
}

std::string StrategyName(Strategy s) {
  switch (s) {
    case Strategy::kRandom:
      return "random";
    case Strategy::kRe:
      return "re";
    case Strategy::kPv:
      return "pv";
    case Strategy::kLv:
      return "lv";
    case Strategy::kRePv:
      return "re_pv";
    case Strategy::kEloDcg:
      return "elo_dcg";
  }
  return "unknown";
}

Strategy ParseStrategy(const std::string& name) {
  for (Strategy s : AllStrategies()) {
    if (StrategyName(s) == name) return s;
  }
  throw ConfigError("unknown strategy '" + name +
                    "' (random|re|pv|lv|re_pv|elo_dcg)");
}

std::vector<Strategy> AllStrategies() {
  return {Strategy::kRandom, Strategy::kRe,   Strategy::kPv,
          Strategy::kLv,     Strategy::kRePv, Strategy::kEloDcg};
}

std::vector<QueryScore> ScorePool(const Committee& committee,
                                  const QueryRefs& groups,
                                  const AcquisitionParams& params,
                                  unsigned threads, DistributionStats* stats) {
  CheckTemperature(params.temperature);
  std::vector<QueryScore> out(groups.size());
  std::vector<DistributionStats> per_query(groups.size());
  ParallelFor(groups.size(), threads, [&](std::size_t i) {
    const QueryGroup& g = *groups[i];
    const ScoreMatrix matrix = ScoreQuery(committee, g);
    QueryScore& s = out[i];
    s.query_id = g.query_id;
    s.bucket = g.bucket;
    s.re = RankingEntropy(matrix, params.temperature,
                          stats != nullptr ? &per_query[i] : nullptr);
    s.pv = PredictionVariance(matrix);
    s.lv = LabelVariance(g.Labels());
    s.elo_dcg = EloDcg(matrix, params.k, params.gain);
    s.f = AcquisitionScore(s.re, s.pv, params.alpha);
  });
  if (stats != nullptr) {
    for (const auto& s : per_query) stats->Merge(s);
  }
  return out;
}

std::vector<QueryId> SelectBatch(std::span<const QueryScore> pool,
                                 std::size_t bs, Strategy strategy,
                                 std::uint64_t seed) {
  if (bs > pool.size()) {
    throw ConfigError("batch size " + std::to_string(bs) +
                      " exceeds pool size " + std::to_string(pool.size()));
  }
  std::vector<QueryId> selected;
  selected.reserve(bs);
  if (strategy == Strategy::kRandom) {
    std::vector<QueryId> ids;
    ids.reserve(pool.size());
    for (const auto& s : pool) ids.push_back(s.query_id);
    std::sort(ids.begin(), ids.end());
    std::mt19937_64 rng(seed);
    std::shuffle(ids.begin(), ids.end(), rng);
    selected.assign(ids.begin(), ids.begin() + bs);
    return selected;
  }
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ca = Criterion(pool[a], strategy);
    const double cb = Criterion(pool[b], strategy);
    if (ca != cb) return ca > cb;
    return pool[a].query_id < pool[b].query_id;
  });
  for (std::size_t i = 0; i < bs; ++i) selected.push_back(pool[order[i]].query_id);
  return selected;
}

void WriteScoresCsv(std::ostream& out, std::span<const QueryScore> scores) {
  out << "query_id,bucket,re,pv,lv,elo_dcg,f\n";
  for (const auto& s : scores) {
    out << s.query_id << ',' << s.bucket << ',' << FormatDouble(s.re) << ','
        << FormatDouble(s.pv) << ',' << FormatDouble(s.lv) << ','
        << FormatDouble(s.elo_dcg) << ',' << FormatDouble(s.f) << '\n';
  }
}

}  // namespace alrank
