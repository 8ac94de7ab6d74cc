#include "alrank/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "alrank/error.hpp"

namespace alrank {
namespace {

void CheckK(int k) {
  if (k < 1) throw ConfigError("k must be >= 1");
}

template <typename Grade>
double Dcg(std::span<const Grade> ranked, int k, const GainFn& gain) {
  CheckK(k);
  const std::size_t n = std::min<std::size_t>(k, ranked.size());
  double dcg = 0.0;
  for (std::size_t pos = 0; pos < n; ++pos) {
    dcg += gain(static_cast<double>(ranked[pos])) /
           std::log2(static_cast<double>(pos) + 2.0);
  }
  return dcg;
}

}  // namespace

double GainFn::operator()(double grade) const {
  if (kind == GainKind::kLinear) return grade;
  return std::exp2(grade) - 1.0;
}

std::string GainFn::Name() const {
  return kind == GainKind::kLinear ? "linear" : "exponential";
}

GainFn GainFn::Parse(const std::string& name) {
  if (name == "exponential") return {GainKind::kExponential};
  if (name == "linear") return {GainKind::kLinear};
  throw ConfigError("unknown gain '" + name + "' (exponential|linear)");
}

double DcgAtK(std::span<const int> ranked_labels, int k, const GainFn& gain) {
  return Dcg(ranked_labels, k, gain);
}

double DcgAtK(std::span<const double> ranked_grades, int k,
              const GainFn& gain) {
  return Dcg(ranked_grades, k, gain);
}

double BestDcgAtK(std::span<const int> labels, int k, const GainFn& gain) {
  std::vector<int> sorted(labels.begin(), labels.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<int>());
  return DcgAtK(sorted, k, gain);
}

double R01AtK(std::span<const int> ranked_labels, int k) {
  CheckK(k);
  const std::size_t n = std::min<std::size_t>(k, ranked_labels.size());
  std::size_t irrelevant = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (ranked_labels[i] <= 1) ++irrelevant;
  }
  return static_cast<double>(irrelevant) / k;
}

std::vector<std::size_t> OrderByScore(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return scores[a] > scores[b];
                   });
  return order;
}

std::optional<double> TryPearson(std::span<const double> x,
                                 std::span<const double> y) {
  if (x.size() != y.size()) {
    throw DataError("pearson: inputs differ in length");
  }
  if (x.size() < 2) throw DataError("pearson: need at least two points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return std::nullopt;
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

double Pearson(std::span<const double> x, std::span<const double> y) {
  const auto r = TryPearson(x, y);
  if (!r) throw DataError("pearson: constant input, correlation undefined");
  return *r;
}

BucketHistogram BucketDistribution(const QueryRefs& selected) {
  BucketHistogram hist{};
  for (const QueryGroup* q : selected) ++hist[q->bucket];
  return hist;
}

LabelHistogram LabelDistribution(const QueryRefs& selected) {
  LabelHistogram hist{};
  for (const QueryGroup* q : selected) {
    for (const Document& d : q->documents) ++hist[q->bucket][d.label];
  }
  return hist;
}

EvalReport EvaluateRanking(const QueryRefs& queries,
                           const std::vector<std::vector<double>>& scores,
                           int k, const GainFn& gain) {
  CheckK(k);
  if (scores.size() != queries.size()) {
    throw DataError("evaluation: score list does not match queries");
  }
  EvalReport report;
  report.k = k;
  report.num_queries = queries.size();
  if (queries.empty()) return report;
  std::vector<int> ranked;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto labels = queries[i]->Labels();
    if (scores[i].size() != labels.size()) {
      throw DataError("evaluation: score count does not match documents");
    }
    ranked.clear();
    for (std::size_t pos : OrderByScore(scores[i])) ranked.push_back(labels[pos]);
    report.dcg_k += DcgAtK(ranked, k, gain);
    report.best_dcg_k += BestDcgAtK(labels, k, gain);
    report.r01 += R01AtK(ranked, k);
  }
  const double n = static_cast<double>(queries.size());
  report.dcg_k /= n;
  report.best_dcg_k /= n;
  report.r01 /= n;
  return report;
}

}  // namespace alrank
