#include "alrank/config.hpp"

#include "alrank/error.hpp"
#include "alrank/json_util.hpp"

namespace alrank {
namespace {

using nlohmann::json;
using json_util::CheckKeys;
using json_util::GetOptional;

// Signed reads so that negative sizes are reported rather than wrapped.
void GetSize(const json& doc, const char* key, std::size_t* out,
             const std::string& where) {
  long long v = static_cast<long long>(*out);
  GetOptional(doc, key, &v, where);
  if (v < 0) throw ConfigError(where + ": " + key + " must be >= 0");
  *out = static_cast<std::size_t>(v);
}

json SynthToJson(const SynthConfig& s) {
  json profile = json::array();
  for (const auto& row : s.bucket_label_profile) profile.push_back(row);
  return {{"num_queries", s.num_queries},
          {"docs_per_query", s.docs_per_query},
          {"feature_dim", s.feature_dim},
          {"noise_scale", s.noise_scale},
          {"first_query_id", s.first_query_id},
          {"bucket_label_profile", std::move(profile)}};
}

SynthConfig SynthFromJson(const json& doc) {
  const std::string where = "synth";
  CheckKeys(doc,
            {"num_queries", "docs_per_query", "feature_dim", "noise_scale",
             "first_query_id", "bucket_label_profile"},
            where);
  SynthConfig s;
  GetSize(doc, "num_queries", &s.num_queries, where);
  GetSize(doc, "docs_per_query", &s.docs_per_query, where);
  GetSize(doc, "feature_dim", &s.feature_dim, where);
  GetOptional(doc, "noise_scale", &s.noise_scale, where);
  std::size_t first = s.first_query_id;
  GetSize(doc, "first_query_id", &first, where);
  s.first_query_id = first;
  if (auto it = doc.find("bucket_label_profile"); it != doc.end()) {
    if (!it->is_array() || it->size() != kNumBuckets) {
      throw ConfigError("synth: bucket_label_profile must hold 10 rows");
    }
    for (int b = 0; b < kNumBuckets; ++b) {
      const json& row = (*it)[b];
      if (!row.is_array() || row.size() != kNumLabels) {
        throw ConfigError("synth: each profile row must hold 5 probabilities");
      }
      for (int l = 0; l < kNumLabels; ++l) {
        if (!row[l].is_number()) {
          throw ConfigError("synth: profile entries must be numbers");
        }
        s.bucket_label_profile[b][l] = row[l].get<double>();
      }
    }
  }
  return s;
}

json RankerToJson(const TrainConfig& c) {
  return {{"num_trees", c.num_trees},
          {"max_depth", c.max_depth},
          {"shrinkage", c.shrinkage},
          {"min_samples_leaf", c.min_samples_leaf},
          {"max_bins", c.max_bins}};
}

TrainConfig RankerFromJson(const json& doc) {
  const std::string where = "ranker";
  CheckKeys(doc,
            {"num_trees", "max_depth", "shrinkage", "min_samples_leaf",
             "max_bins"},
            where);
  TrainConfig c;
  GetOptional(doc, "num_trees", &c.num_trees, where);
  GetOptional(doc, "max_depth", &c.max_depth, where);
  GetOptional(doc, "shrinkage", &c.shrinkage, where);
  GetOptional(doc, "min_samples_leaf", &c.min_samples_leaf, where);
  GetOptional(doc, "max_bins", &c.max_bins, where);
  return c;
}

json CommitteeToJson(const CommitteeConfig& c) {
  return {{"tree_counts", c.tree_counts},
          {"depths", c.depths},
          {"shrinkage", c.base.shrinkage},
          {"min_samples_leaf", c.base.min_samples_leaf},
          {"max_bins", c.base.max_bins}};
}

CommitteeConfig CommitteeFromJson(const json& doc) {
  const std::string where = "committee";
  CheckKeys(doc,
            {"tree_counts", "depths", "shrinkage", "min_samples_leaf",
             "max_bins"},
            where);
  CommitteeConfig c;
  GetOptional(doc, "tree_counts", &c.tree_counts, where);
  GetOptional(doc, "depths", &c.depths, where);
  GetOptional(doc, "shrinkage", &c.base.shrinkage, where);
  GetOptional(doc, "min_samples_leaf", &c.base.min_samples_leaf, where);
  GetOptional(doc, "max_bins", &c.base.max_bins, where);
  return c;
}

json LoopToJson(const ALConfig& c) {
  return {{"base_size", c.base_size},
          {"batch_size", c.batch_size},
          {"cycles", c.cycles},
          {"quota", c.quota},
          {"alpha", c.alpha},
          {"temperature", c.temperature},
          {"strategy", StrategyName(c.strategy)},
          {"eval_k", c.eval_k},
          {"gain", c.gain.Name()}};
}

void LoopFromJson(const json& doc, ALConfig* c) {
  const std::string where = "active_learning";
  CheckKeys(doc,
            {"base_size", "batch_size", "cycles", "quota", "alpha",
             "temperature", "strategy", "eval_k", "gain"},
            where);
  GetSize(doc, "base_size", &c->base_size, where);
  GetSize(doc, "batch_size", &c->batch_size, where);
  GetSize(doc, "cycles", &c->cycles, where);
  GetSize(doc, "quota", &c->quota, where);
  GetOptional(doc, "alpha", &c->alpha, where);
  GetOptional(doc, "temperature", &c->temperature, where);
  GetOptional(doc, "eval_k", &c->eval_k, where);
  std::string strategy = StrategyName(c->strategy);
  GetOptional(doc, "strategy", &strategy, where);
  c->strategy = ParseStrategy(strategy);
  std::string gain = c->gain.Name();
  GetOptional(doc, "gain", &gain, where);
  c->gain = GainFn::Parse(gain);
}

void MergeInto(json* base, const json& overrides) {
  if (!overrides.is_object() || !base->is_object()) {
    *base = overrides;
    return;
  }
  for (auto it = overrides.begin(); it != overrides.end(); ++it) {
    if (it->is_object() && base->contains(it.key()) &&
        (*base)[it.key()].is_object()) {
      MergeInto(&(*base)[it.key()], *it);
    } else {
      (*base)[it.key()] = *it;
    }
  }
}

}  // namespace

void RunConfig::Validate() const {
  synth.Validate();
  al.Validate();
}

json ALConfigToJson(const ALConfig& c) {
  return {{"seed", c.seed},
          {"ranker", RankerToJson(c.ranker)},
          {"committee", CommitteeToJson(c.committee)},
          {"active_learning", LoopToJson(c)}};
}

json RunConfigToJson(const RunConfig& config) {
  json doc = ALConfigToJson(config.al);
  doc["synth"] = SynthToJson(config.synth);
  return doc;
}

RunConfig RunConfigFromJson(const json& doc) {
  CheckKeys(doc, {"seed", "synth", "ranker", "committee", "active_learning"},
            "config");
  RunConfig c;
  GetOptional(doc, "seed", &c.al.seed, "config");
  if (auto it = doc.find("synth"); it != doc.end()) c.synth = SynthFromJson(*it);
  if (auto it = doc.find("ranker"); it != doc.end()) {
    c.al.ranker = RankerFromJson(*it);
  }
  if (auto it = doc.find("committee"); it != doc.end()) {
    c.al.committee = CommitteeFromJson(*it);
  }
  if (auto it = doc.find("active_learning"); it != doc.end()) {
    LoopFromJson(*it, &c.al);
  }
  c.Validate();
  return c;
}

json ResolveConfig(const json& base, const json& overrides) {
  json merged = base.is_null() ? json::object() : base;
  if (!overrides.is_null()) MergeInto(&merged, overrides);
  return RunConfigToJson(RunConfigFromJson(merged));
}

json ParseConfigText(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

}  // namespace alrank
