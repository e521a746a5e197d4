#pragma once

// Simulation configuration, named experiment presets, and the flat
// `key = value` text format used by `vch run --config`.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "vch/agent.hpp"
#include "vch/ltv.hpp"
#include "vch/motion.hpp"

namespace vch {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownPreset : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

struct SimConfig {
  std::size_t agents = 3;
  std::size_t anchors = 1;
  Region region;
  double radius = 2.0;
  double d_max = 5.0;
  NoiseConfig noise;
  UpdateWeights weights;
  double epsilon = 0.05;
  bool modifications = false;
  bool mobile_anchors = false;
  bool three_anchor_reset = false;
  geometry::ResidualPolicy residual = geometry::ResidualPolicy::Smallest;
  std::uint64_t seed = 1;
  std::size_t max_steps = 5000;
  double tolerance = 0.01;
  bool early_stop = false;
  std::size_t trials = 1;
  // Growth-bound exponents used in slice reports.
  double gamma1 = 0.0;
  double gamma2 = 0.1;

  // Throws ConfigError naming the offending key.
  void validate() const;

  [[nodiscard]] SearchOptions search_options() const;
  [[nodiscard]] ltv::GrowthBoundParams growth_params() const;

  friend bool operator==(const SimConfig&, const SimConfig&);
};

std::vector<std::string> preset_names();

// Throws UnknownPreset.
SimConfig preset(const std::string& name);

// Ordered (key, value) pairs with full round-trip precision.
std::vector<std::pair<std::string, std::string>> to_key_values(const SimConfig& cfg);

// Applies one key; throws ConfigError for unknown keys or bad values.
void apply_key(SimConfig& cfg, const std::string& key, const std::string& value);

// `key = value` lines; '#' starts a comment. Keys not mentioned keep the
// values already in `base`.
SimConfig parse_config_text(const std::string& text, SimConfig base = {});
std::string to_config_text(const SimConfig& cfg);

// Documentation of every key and its unit.
const std::map<std::string, std::string>& config_key_docs();

}  // namespace vch
