#pragma once

#include <cstdint>
#include <json.hpp>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "uavdep/simulator.hpp"

namespace uavdep {

using nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  Scenario scenario;
  std::string preset;  // empty for fully explicit configs
  std::string output_dir;
  int verbosity = 1;
  std::vector<std::uint64_t> seeds;  // empty: use scenario.seed
};

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {
      "fig3-urban-static",   "fig4-altitude-ablation", "fig5-environments",
      "fig6-theta-sweep",    "fig8-centered-start",    "fig9-sensor-ratio",
      "fig10-dynamic-hotspots"};
  return names;
}

/// Reference hotspot layout shared by all presets: three ellipses placed
/// away from the initial lattice points, intensity 10 * mu inside.
inline std::vector<Hotspot> reference_hotspots(bool moving) {
  std::vector<Hotspot> h = {
      {{1200.0, 3600.0}, 700.0, 450.0, 10.0, 0.0, 0.0},
      {{3600.0, 3200.0}, 550.0, 700.0, 10.0, 0.0, 0.0},
      {{2200.0, 1200.0}, 800.0, 500.0, 10.0, 0.0, 0.0},
  };
  if (moving) {
    h[0].vel_x = 600.0;
    h[1].vel_y = -600.0;
    h[2].vel_x = -400.0;
    h[2].vel_y = 350.0;
  }
  return h;
}

inline Scenario preset_scenario(const std::string& name) {
  Scenario sc;  // defaults already carry the reference parameter table
  sc.environment = "urban";
  sc.env = channel_preset("urban");
  // The experiments run in the interference-limited regime: with unit
  // transmit power the normalized thermal noise is negligible against
  // co-channel interference at these ranges.
  sc.env.sigma = 1e-11;
  sc.hotspots = reference_hotspots(false);
  sc.use_true_intensity = true;
  sc.steps_per_period = 60;
  sc.num_periods = 1;
  sc.move_cap = 800.0;

  if (name == "fig3-urban-static") {
    // base settings above
  } else if (name == "fig4-altitude-ablation") {
    sc.freeze_altitude = true;
  } else if (name == "fig5-environments") {
    // environment is the sweep axis; urban is the default point
  } else if (name == "fig6-theta-sweep") {
    // theta_db is the sweep axis; 0 dB is the default point
  } else if (name == "fig8-centered-start") {
    sc.layout = InitialLayout::Centered;
    sc.steps_per_period = 100;
  } else if (name == "fig9-sensor-ratio") {
    sc.use_true_intensity = false;
    sc.sensor_ratio = 0.03;
    sc.steps_per_period = 30;
  } else if (name == "fig10-dynamic-hotspots") {
    sc.hotspots = reference_hotspots(true);
    sc.use_true_intensity = false;
    sc.sensor_ratio = 1.0;
    sc.steps_per_period = 30;
    sc.num_periods = 4;
  } else {
    throw ConfigError("unknown preset: " + name);
  }
  return sc;
}

namespace detail {

inline void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                                const std::string& where) {
  for (const auto& [key, value] : obj.items())
    if (!allowed.contains(key))
      throw ConfigError("unknown key '" + key + "' in " + where);
}

inline double require_number(const json& obj, const std::string& key,
                             const std::string& where) {
  if (!obj.contains(key))
    throw ConfigError("missing required field '" + key + "' in " + where);
  if (!obj[key].is_number())
    throw ConfigError("field '" + key + "' in " + where + " must be a number");
  return obj[key].get<double>();
}

}  // namespace detail

inline ChannelEnvironment environment_from_json(const json& obj) {
  detail::reject_unknown_keys(
      obj,
      {"preset", "b0", "b1", "alpha_los", "alpha_nlos", "beta_los",
       "beta_nlos", "epsilon0", "m_los", "m_nlos", "sigma", "theta_db",
       "theta_linear"},
      "environment");
  ChannelEnvironment env = obj.contains("preset")
                               ? channel_preset(obj["preset"].get<std::string>())
                               : ChannelEnvironment{};
  if (obj.contains("b0")) env.b0 = obj["b0"].get<double>();
  if (obj.contains("b1")) env.b1 = obj["b1"].get<double>();
  if (obj.contains("alpha_los")) env.alpha_los = obj["alpha_los"].get<double>();
  if (obj.contains("alpha_nlos")) env.alpha_nlos = obj["alpha_nlos"].get<double>();
  if (obj.contains("beta_los")) env.beta_los = obj["beta_los"].get<double>();
  if (obj.contains("beta_nlos")) env.beta_nlos = obj["beta_nlos"].get<double>();
  if (obj.contains("epsilon0")) env.epsilon0 = obj["epsilon0"].get<double>();
  if (obj.contains("m_los")) env.m_los = obj["m_los"].get<int>();
  if (obj.contains("m_nlos")) env.m_nlos = obj["m_nlos"].get<int>();
  if (obj.contains("sigma")) env.sigma = obj["sigma"].get<double>();
  if (obj.contains("theta_db") && obj.contains("theta_linear"))
    throw ConfigError("environment: give theta_db or theta_linear, not both");
  if (obj.contains("theta_db"))
    env.theta_threshold = db_to_linear(obj["theta_db"].get<double>());
  if (obj.contains("theta_linear"))
    env.theta_threshold = obj["theta_linear"].get<double>();
  return env;
}

inline void apply_scenario_json(Scenario& sc, const json& obj,
                                bool preset_backed) {
  detail::reject_unknown_keys(
      obj,
      {"environment", "area_length", "grid_n", "gp", "num_uavs", "layout",
       "explicit_positions", "default_altitude", "h_min", "h_max", "hotspots",
       "use_true_intensity", "sensor_ratio", "sensor_positions",
       "steps_per_period", "num_periods", "step_a0", "step_nu", "move_cap",
       "perturbation", "push_gain", "freeze_altitude", "seed"},
      "scenario");
  if (!preset_backed)
    (void)detail::require_number(obj, "num_uavs", "scenario");

  if (obj.contains("environment")) {
    if (obj["environment"].is_string()) {
      sc.environment = obj["environment"].get<std::string>();
      sc.env = channel_preset(sc.environment);
    } else {
      sc.environment = "custom";
      sc.env = environment_from_json(obj["environment"]);
    }
  }
  if (obj.contains("area_length")) sc.area_length = obj["area_length"].get<double>();
  if (obj.contains("grid_n")) sc.grid_n = obj["grid_n"].get<int>();
  if (obj.contains("gp")) {
    const json& g = obj["gp"];
    detail::reject_unknown_keys(g, {"mu", "a0", "a1", "jitter"}, "gp");
    if (g.contains("mu")) sc.gp.mu = g["mu"].get<double>();
    if (g.contains("a0")) sc.gp.a0 = g["a0"].get<double>();
    if (g.contains("a1")) sc.gp.a1 = g["a1"].get<double>();
    if (g.contains("jitter")) sc.gp.jitter = g["jitter"].get<double>();
  }
  if (obj.contains("num_uavs")) sc.num_uavs = obj["num_uavs"].get<int>();
  if (obj.contains("layout")) {
    const std::string layout = obj["layout"].get<std::string>();
    if (layout == "uniform-lattice") sc.layout = InitialLayout::UniformLattice;
    else if (layout == "centered") sc.layout = InitialLayout::Centered;
    else if (layout == "explicit") sc.layout = InitialLayout::Explicit;
    else throw ConfigError("scenario: unknown layout '" + layout + "'");
  }
  if (obj.contains("explicit_positions")) {
    sc.explicit_positions.clear();
    for (const json& p : obj["explicit_positions"])
      sc.explicit_positions.push_back(
          {p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
  }
  if (obj.contains("default_altitude"))
    sc.default_altitude = obj["default_altitude"].get<double>();
  if (obj.contains("h_min")) sc.h_min = obj["h_min"].get<double>();
  if (obj.contains("h_max")) sc.h_max = obj["h_max"].get<double>();
  if (obj.contains("hotspots")) {
    sc.hotspots.clear();
    for (const json& h : obj["hotspots"]) {
      detail::reject_unknown_keys(
          h, {"center", "semi_axes", "multiplier", "velocity"}, "hotspot");
      Hotspot spot;
      spot.center = {h.at("center").at(0).get<double>(),
                     h.at("center").at(1).get<double>()};
      spot.semi_x = h.at("semi_axes").at(0).get<double>();
      spot.semi_y = h.at("semi_axes").at(1).get<double>();
      if (h.contains("multiplier")) spot.multiplier = h["multiplier"].get<double>();
      if (h.contains("velocity")) {
        spot.vel_x = h["velocity"].at(0).get<double>();
        spot.vel_y = h["velocity"].at(1).get<double>();
      }
      sc.hotspots.push_back(spot);
    }
  }
  if (obj.contains("use_true_intensity"))
    sc.use_true_intensity = obj["use_true_intensity"].get<bool>();
  if (obj.contains("sensor_ratio")) sc.sensor_ratio = obj["sensor_ratio"].get<double>();
  if (obj.contains("sensor_positions")) {
    sc.sensor_positions.clear();
    for (const json& p : obj["sensor_positions"])
      sc.sensor_positions.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  }
  if (obj.contains("steps_per_period"))
    sc.steps_per_period = obj["steps_per_period"].get<int>();
  if (obj.contains("num_periods")) sc.num_periods = obj["num_periods"].get<int>();
  if (obj.contains("step_a0")) sc.step_a0 = obj["step_a0"].get<double>();
  if (obj.contains("step_nu")) sc.step_nu = obj["step_nu"].get<double>();
  if (obj.contains("move_cap")) sc.move_cap = obj["move_cap"].get<double>();
  if (obj.contains("perturbation")) {
    const json& p = obj["perturbation"];
    detail::reject_unknown_keys(p, {"enabled", "scale", "anneal"}, "perturbation");
    if (p.contains("enabled")) sc.perturbation.enabled = p["enabled"].get<bool>();
    if (p.contains("scale")) sc.perturbation.scale = p["scale"].get<double>();
    if (p.contains("anneal")) sc.perturbation.anneal = p["anneal"].get<bool>();
  }
  if (obj.contains("push_gain")) sc.push_gain = obj["push_gain"].get<double>();
  if (obj.contains("freeze_altitude"))
    sc.freeze_altitude = obj["freeze_altitude"].get<bool>();
  if (obj.contains("seed")) sc.seed = obj["seed"].get<std::uint64_t>();
}

inline RunConfig parse_run_config(const json& root) {
  detail::reject_unknown_keys(
      root, {"preset", "scenario", "output_dir", "verbosity", "seeds"},
      "config");
  RunConfig cfg;
  if (root.contains("preset")) {
    cfg.preset = root["preset"].get<std::string>();
    cfg.scenario = preset_scenario(cfg.preset);
  }
  if (root.contains("scenario"))
    apply_scenario_json(cfg.scenario, root["scenario"], !cfg.preset.empty());
  else if (cfg.preset.empty())
    throw ConfigError("config needs a 'preset' or a 'scenario' section");
  if (root.contains("output_dir"))
    cfg.output_dir = root["output_dir"].get<std::string>();
  if (root.contains("verbosity")) cfg.verbosity = root["verbosity"].get<int>();
  if (root.contains("seeds"))
    for (const json& s : root["seeds"]) cfg.seeds.push_back(s.get<std::uint64_t>());
  cfg.scenario.validate();
  return cfg;
}

inline json environment_to_json(const ChannelEnvironment& env) {
  return json{{"b0", env.b0},
              {"b1", env.b1},
              {"alpha_los", env.alpha_los},
              {"alpha_nlos", env.alpha_nlos},
              {"beta_los", env.beta_los},
              {"beta_nlos", env.beta_nlos},
              {"epsilon0", env.epsilon0},
              {"m_los", env.m_los},
              {"m_nlos", env.m_nlos},
              {"sigma", env.sigma},
              {"theta_linear", env.theta_threshold}};
}

inline json scenario_to_json(const Scenario& sc) {
  json obj;
  obj["environment"] = environment_to_json(sc.env);
  obj["area_length"] = sc.area_length;
  obj["grid_n"] = sc.grid_n;
  obj["gp"] = {{"mu", sc.gp.mu}, {"a0", sc.gp.a0}, {"a1", sc.gp.a1},
               {"jitter", sc.gp.jitter}};
  obj["num_uavs"] = sc.num_uavs;
  obj["layout"] = sc.layout == InitialLayout::UniformLattice ? "uniform-lattice"
                  : sc.layout == InitialLayout::Centered     ? "centered"
                                                             : "explicit";
  if (!sc.explicit_positions.empty()) {
    json list = json::array();
    for (const UavPosition& p : sc.explicit_positions)
      list.push_back({p.x, p.y, p.altitude});
    obj["explicit_positions"] = list;
  }
  obj["default_altitude"] = sc.default_altitude;
  obj["h_min"] = sc.h_min;
  obj["h_max"] = sc.h_max;
  json hotspots = json::array();
  for (const Hotspot& h : sc.hotspots)
    hotspots.push_back({{"center", {h.center.x, h.center.y}},
                        {"semi_axes", {h.semi_x, h.semi_y}},
                        {"multiplier", h.multiplier},
                        {"velocity", {h.vel_x, h.vel_y}}});
  obj["hotspots"] = hotspots;
  obj["use_true_intensity"] = sc.use_true_intensity;
  obj["sensor_ratio"] = sc.sensor_ratio;
  if (!sc.sensor_positions.empty()) {
    json list = json::array();
    for (const GroundPoint& g : sc.sensor_positions) list.push_back({g.x, g.y});
    obj["sensor_positions"] = list;
  }
  obj["steps_per_period"] = sc.steps_per_period;
  obj["num_periods"] = sc.num_periods;
  obj["step_a0"] = sc.step_a0;
  obj["step_nu"] = sc.step_nu;
  obj["move_cap"] = sc.move_cap;
  obj["perturbation"] = {{"enabled", sc.perturbation.enabled},
                         {"scale", sc.perturbation.scale},
                         {"anneal", sc.perturbation.anneal}};
  obj["push_gain"] = sc.push_gain;
  obj["freeze_altitude"] = sc.freeze_altitude;
  obj["seed"] = sc.seed;
  return obj;
}

inline json run_config_to_json(const RunConfig& cfg) {
  json root;
  if (!cfg.preset.empty()) root["preset"] = cfg.preset;
  root["scenario"] = scenario_to_json(cfg.scenario);
  if (!cfg.output_dir.empty()) root["output_dir"] = cfg.output_dir;
  root["verbosity"] = cfg.verbosity;
  if (!cfg.seeds.empty()) root["seeds"] = cfg.seeds;
  return root;
}

/// Applies a dotted-path override like "scenario.num_uavs=12" to a config
/// document. The value is parsed as JSON when possible, else as a string.
inline void apply_override(json& root, const std::string& spec) {
  const std::size_t eq = spec.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override must look like key.path=value: " + spec);
  const std::string path = spec.substr(0, eq);
  const std::string raw = spec.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &root;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (key.empty()) throw ConfigError("bad override path: " + path);
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

}  // namespace uavdep
