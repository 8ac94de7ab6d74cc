#ifndef ALRANK_CONFIG_HPP_
#define ALRANK_CONFIG_HPP_

#include <string>

#include "alrank/dataset.hpp"
#include "alrank/simulator.hpp"
#include "json.hpp"

namespace alrank {

// Every tunable of the toolkit in one document:
//   {"seed": ..., "synth": {...}, "ranker": {...}, "committee": {...},
//    "active_learning": {...}}
// Missing keys take their defaults; unknown keys are rejected. The
// active_learning temperature also drives the ranker and committee losses.
struct RunConfig {
  SynthConfig synth;
  ALConfig al;

  void Validate() const;
};

nlohmann::json RunConfigToJson(const RunConfig& config);
RunConfig RunConfigFromJson(const nlohmann::json& doc);

// The run-relevant sections (everything except "synth").
nlohmann::json ALConfigToJson(const ALConfig& config);

// Applies `overrides` on top of `base` (recursive object merge) and
// returns the fully resolved, validated document.
nlohmann::json ResolveConfig(const nlohmann::json& base,
                             const nlohmann::json& overrides);

// Parses JSON text, reporting syntax errors as ConfigError.
nlohmann::json ParseConfigText(const std::string& text);

}  // namespace alrank

#endif  // ALRANK_CONFIG_HPP_
