// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "der/experience.hpp"
#include "der/reputation.hpp"
#include "der/sim.hpp"

namespace der {

inline constexpr int kConfigSchemaVersion = 1;

// Engine-wide parameter bundle backing every CLI command. Files are JSON with
// a required schema_version; unknown keys are rejected, missing keys fall
// back to the built-in presets.
struct EngineConfig {
  ExperienceParams experience;
  ReputationParams reputation;  // includes the trust weights w1/w2
  double theta = 0.5;           // positive/negative split threshold
  std::uint64_t decay_epoch = 100;

  void validate() const;
};

EngineConfig parse_config_json(const std::string& text);
EngineConfig load_config(const std::string& path);
std::string config_to_json(const EngineConfig& config);
void save_config(const EngineConfig& config, std::ostream& out);

// Scenario files share the config schema for the embedded "engine" object.
Scenario parse_scenario_json(const std::string& text);
Scenario load_scenario(const std::string& path);
std::string scenario_to_json(const Scenario& scenario);

}  // namespace der
