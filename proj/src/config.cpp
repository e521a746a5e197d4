#include "vch/config.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

namespace vch {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
  }
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ConfigError("config key '" + key + "': expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "': expected on/off, got '" + v + "'");
}

}  // namespace

bool operator==(const SimConfig& a, const SimConfig& b) {
  return to_key_values(a) == to_key_values(b);
}

void SimConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& why) {
    throw ConfigError("config key '" + key + "': " + why);
  };
  if (agents < 1) fail("agents", "need at least one agent");
  if (!(region.x_max > region.x_min)) fail("x_max", "must exceed x_min");
  if (!(region.y_max > region.y_min)) fail("y_max", "must exceed y_min");
  if (!(radius >= 0.0)) fail("radius", "must be non-negative");
  if (!(d_max >= 0.0)) fail("d_max", "must be non-negative");
  if (!(noise.motion_frac >= 0.0)) fail("noise_motion", "must be non-negative");
  if (!(noise.range_frac >= 0.0)) fail("noise_range", "must be non-negative");
  if (!(weights.self_floor > 0.0 && weights.self_floor < 1.0)) fail("self_floor", "must lie in (0, 1)");
  if (!(weights.self_weight >= weights.self_floor && weights.self_weight < 1.0)) {
    fail("self_weight", "must lie in [self_floor, 1)");
  }
  if (!(weights.anchor_min > 0.0 && weights.anchor_min < 1.0)) fail("anchor_min", "must lie in (0, 1)");
  if (!(weights.agent_min >= 0.0 && weights.agent_min < 1.0 / 3.0)) {
    fail("agent_min", "must lie in [0, 1/3)");
  }
  if (!(epsilon >= 0.0)) fail("epsilon", "must be non-negative");
  if (!(tolerance >= 0.0)) fail("tolerance", "must be non-negative");
  if (trials < 1) fail("trials", "need at least one trial");
  if (agents > 256) fail("agents", "at most 256 agents are supported by the analysis layer");
  if (!(gamma1 >= 0.0 && gamma1 <= 1.0)) fail("gamma1", "must lie in [0, 1]");
  if (!(gamma2 > 0.0)) fail("gamma2", "must be positive");
}

SearchOptions SimConfig::search_options() const {
  SearchOptions o;
  o.modifications = modifications;
  o.epsilon = epsilon;
  o.three_anchor_reset = three_anchor_reset;
  o.residual = residual;
  return o;
}

ltv::GrowthBoundParams SimConfig::growth_params() const {
  ltv::GrowthBoundParams p;
  p.beta1 = weights.self_floor;
  p.beta2 = 1.0 - weights.anchor_min;
  p.gamma1 = gamma1;
  p.gamma2 = gamma2;
  return p;
}

std::vector<std::string> preset_names() {
  return {"fig7_n3", "fig8_n10", "fig8_n100", "fig9_noanchor", "fig11_noise", "fig12_mc"};
}

SimConfig preset(const std::string& name) {
  SimConfig c;  // region [-5, 15]^2, r = 2, d ~ U[0, 5], alpha_k = 0.2, alpha = 0.1
  if (name == "fig7_n3") {
    c.agents = 3;
    c.anchors = 1;
    c.max_steps = 5000;
  } else if (name == "fig8_n10") {
    c.agents = 10;
    c.anchors = 1;
    c.mobile_anchors = true;
    c.max_steps = 20000;
  } else if (name == "fig8_n100") {
    c.agents = 100;
    c.anchors = 1;
    c.mobile_anchors = true;
    c.max_steps = 2000;
  } else if (name == "fig9_noanchor") {
    c.agents = 4;
    c.anchors = 0;
    c.max_steps = 5000;
  } else if (name == "fig11_noise" || name == "fig12_mc") {
    c.agents = 10;
    c.anchors = 1;
    c.noise.range_frac = 0.10;
    c.noise.motion_frac = 0.01;
    c.modifications = true;
    c.mobile_anchors = true;
    c.max_steps = 20000;
    if (name == "fig12_mc") c.trials = 20;
  } else {
    throw UnknownPreset("unknown preset '" + name + "'");
  }
  return c;
}

std::vector<std::pair<std::string, std::string>> to_key_values(const SimConfig& c) {
  auto on = [](bool b) { return std::string(b ? "on" : "off"); };
  return {
      {"agents", std::to_string(c.agents)},
      {"anchors", std::to_string(c.anchors)},
      {"x_min", fmt_double(c.region.x_min)},
      {"x_max", fmt_double(c.region.x_max)},
      {"y_min", fmt_double(c.region.y_min)},
      {"y_max", fmt_double(c.region.y_max)},
      {"radius", fmt_double(c.radius)},
      {"d_max", fmt_double(c.d_max)},
      {"noise_motion", fmt_double(c.noise.motion_frac)},
      {"noise_range", fmt_double(c.noise.range_frac)},
      {"noise_distribution", to_string(c.noise.distribution)},
      {"self_weight", fmt_double(c.weights.self_weight)},
      {"anchor_min", fmt_double(c.weights.anchor_min)},
      {"agent_min", fmt_double(c.weights.agent_min)},
      {"self_floor", fmt_double(c.weights.self_floor)},
      {"epsilon", fmt_double(c.epsilon)},
      {"modifications", on(c.modifications)},
      {"mobile_anchors", on(c.mobile_anchors)},
      {"three_anchor_reset", on(c.three_anchor_reset)},
      {"residual_vertex", geometry::to_string(c.residual)},
      {"seed", std::to_string(c.seed)},
      {"max_steps", std::to_string(c.max_steps)},
      {"tolerance", fmt_double(c.tolerance)},
      {"early_stop", on(c.early_stop)},
      {"trials", std::to_string(c.trials)},
      {"gamma1", fmt_double(c.gamma1)},
      {"gamma2", fmt_double(c.gamma2)},
  };
}

void apply_key(SimConfig& c, const std::string& key, const std::string& v) {
  if (key == "agents") c.agents = parse_uint(key, v);
  else if (key == "anchors") c.anchors = parse_uint(key, v);
  else if (key == "x_min") c.region.x_min = parse_double(key, v);
  else if (key == "x_max") c.region.x_max = parse_double(key, v);
  else if (key == "y_min") c.region.y_min = parse_double(key, v);
  else if (key == "y_max") c.region.y_max = parse_double(key, v);
  else if (key == "radius") c.radius = parse_double(key, v);
  else if (key == "d_max") c.d_max = parse_double(key, v);
  else if (key == "noise_motion") c.noise.motion_frac = parse_double(key, v);
  else if (key == "noise_range") c.noise.range_frac = parse_double(key, v);
  else if (key == "noise_distribution") {
    try {
      c.noise.distribution = noise_distribution_from_string(v);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("config key 'noise_distribution': " + std::string(e.what()));
    }
  } else if (key == "self_weight") c.weights.self_weight = parse_double(key, v);
  else if (key == "anchor_min") c.weights.anchor_min = parse_double(key, v);
  else if (key == "agent_min") c.weights.agent_min = parse_double(key, v);
  else if (key == "self_floor") c.weights.self_floor = parse_double(key, v);
  else if (key == "epsilon") c.epsilon = parse_double(key, v);
  else if (key == "modifications") c.modifications = parse_bool(key, v);
  else if (key == "mobile_anchors") c.mobile_anchors = parse_bool(key, v);
  else if (key == "three_anchor_reset") c.three_anchor_reset = parse_bool(key, v);
  else if (key == "residual_vertex") {
    try {
      c.residual = geometry::residual_policy_from_string(v);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("config key 'residual_vertex': " + std::string(e.what()));
    }
  } else if (key == "seed") c.seed = parse_uint(key, v);
  else if (key == "max_steps") c.max_steps = parse_uint(key, v);
  else if (key == "tolerance") c.tolerance = parse_double(key, v);
  else if (key == "early_stop") c.early_stop = parse_bool(key, v);
  else if (key == "trials") c.trials = parse_uint(key, v);
  else if (key == "gamma1") c.gamma1 = parse_double(key, v);
  else if (key == "gamma2") c.gamma2 = parse_double(key, v);
  else throw ConfigError("unknown config key '" + key + "'");
}

SimConfig parse_config_text(const std::string& text, SimConfig base) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    apply_key(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  base.validate();
  return base;
}

std::string to_config_text(const SimConfig& cfg) {
  const auto& docs = config_key_docs();
  std::string out;
  for (const auto& [k, v] : to_key_values(cfg)) {
    out += "# " + docs.at(k) + "\n" + k + " = " + v + "\n";
  }
  return out;
}

const std::map<std::string, std::string>& config_key_docs() {
  static const std::map<std::string, std::string> docs{
      {"agents", "number of mobile agents with unknown location (count)"},
      {"anchors", "number of anchors with known location (count)"},
      {"x_min", "region lower x bound (region units)"},
      {"x_max", "region upper x bound (region units)"},
      {"y_min", "region lower y bound (region units)"},
      {"y_max", "region upper y bound (region units)"},
      {"radius", "communication radius (region units)"},
      {"d_max", "maximum step length per iteration (region units)"},
      {"noise_motion", "odometry noise bound, fraction of the motion-vector magnitude"},
      {"noise_range", "ranging noise bound, fraction of the true distance"},
      {"noise_distribution", "uniform | gaussian (gaussian matches the uniform variance)"},
      {"self_weight", "self-weight used by an updating agent (dimensionless)"},
      {"anchor_min", "minimum matrix entry for an anchor vertex (dimensionless)"},
      {"agent_min", "minimum matrix entry for an agent vertex when modifications are on"},
      {"self_floor", "lower bound on the self-weight (dimensionless)"},
      {"epsilon", "bound on the inclusion-test relative error when modifications are on"},
      {"modifications", "on | off: noise modifications (agent floor, relative-error gate)"},
      {"mobile_anchors", "on | off: anchors follow the mobility model with known positions"},
      {"three_anchor_reset", "on | off: drop the self-weight inside an all-anchor hull"},
      {"residual_vertex", "smallest | uniform: which hull vertex takes the one-minus-sum weight"},
      {"seed", "master random seed (integer)"},
      {"max_steps", "number of global steps (count)"},
      {"tolerance", "normalized error threshold for convergence reporting"},
      {"early_stop", "on | off: stop after 50 consecutive steps below tolerance"},
      {"trials", "Monte Carlo trials, seeds seed .. seed + trials - 1 (count)"},
      {"gamma1", "growth-bound exponent gamma1 in [0, 1]"},
      {"gamma2", "growth-bound scale gamma2 > 0"},
  };
  return docs;
}

}  // namespace vch
