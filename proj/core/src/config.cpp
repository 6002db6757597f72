#include "altstand/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <system_error>
#include <vector>

#include "altstand/errors.hpp"
#include "altstand/timeseries.hpp"

namespace altstand::harness {

std::string to_string(ControllerKind k) { return k == ControllerKind::kAdrc ? "adrc" : "pid"; }

ControllerKind controller_from_string(const std::string& s) {
  if (s == "adrc") return ControllerKind::kAdrc;
  if (s == "pid") return ControllerKind::kPid;
  throw ConfigError("unknown controller '" + s + "' (expected adrc or pid)");
}

void SimConfig::validate() const {
  plant.validate();
  boundary.validate();
  scenario.validate();
  penalty.validate();
  offline.problem.validate();
  if (!(rate_max > 0.0)) throw ConfigError("rate_max must be > 0");
  if (!(adrc.omega1 > 0.0 && adrc.omega2 > 0.0)) throw ConfigError("observer bandwidths must be > 0");
  const double dt = scenario.dt;
  if (dt * adrc.omega1 > 0.2 || dt * adrc.omega2 > 0.2) {
    throw ConfigError("dt * observer bandwidth must be <= 0.2");
  }
  if (!(adrc.td_speed > 0.0 && adrc.td_step_factor > 0.0)) {
    throw ConfigError("tracking differentiator speed and step factor must be > 0");
  }
  if (!(adrc.nominal_p1_kpa > 0.0 && adrc.nominal_p2_kpa > 0.0)) {
    throw ConfigError("nominal pressures must be > 0");
  }
  control::AdrcGains g = adrc.gains;
  if (!adrc.b_eff_override) g.b_eff1 = g.b_eff2 = 1.0;
  g.validate();
  for (const auto& l : pid.loops) l.validate();
  if (schedule.n_grow == 0 || schedule.m_reset == 0) {
    throw ConfigError("penalty schedule tick counts must be >= 1");
  }
  if (!(schedule.gamma_max >= penalty.gamma)) throw ConfigError("online gamma_max must be >= gamma0");
  if (!(window.end > window.start)) throw ConfigError("metrics window end must exceed its start");
  if (!(window.settle_band_kpa > 0.0)) throw ConfigError("settle band must be > 0");
  if (output_dir.empty()) throw ConfigError("output directory must not be empty");
}

SimConfig default_config() {
  SimConfig c;
  c.scenario = scenario::paper_scenario();
  auto& g = c.adrc.gains;
  g.k11 = 2.25;
  g.k12 = 3.0;
  g.k13 = 0.1;
  g.k21 = 2.25;
  g.k22 = 3.0;
  g.k23 = 0.1;
  g.rho = 0.5;
  g.pd_sign = control::PdSign::kConventional;
  c.adrc.b_eff_override = true;
  g.b_eff1 = -58.0;
  g.b_eff2 = 57.9;

  // Relay autotune on the physical preset (tools: altstand tune-pid).
  c.pid.loops[0] = {0.0194932, 0.0108597, 0.00874758, 0.5, 0.1, -1.0};
  c.pid.loops[1] = {0.00347877, 0.00109784, 0.00275584, 0.5, 0.1, 1.0};
  c.pid.loops[2] = {0.00898023, 0.00259638, 0.00776509, 0.5, 0.1, 1.0};

  auto& off = c.offline.problem;
  off.p1_set = 65.0;
  off.c1 = 70.0;
  off.eps1 = 2.0;
  off.p2_set = 130.0;
  off.c2 = 130.0;
  off.eps2 = 3.0;
  off.gamma = 1.0;
  off.mu = 1.0;
  off.sigma = 1.0;
  off.lr = 0.005;
  off.omega = 10.0;
  off.xi = 1e-6;
  off.gamma_max = 1e6;
  c.offline.start = {69.0, 130.0};
  return c;
}

namespace {

namespace pt = boost::property_tree;

double parse_double(const std::string& text, const std::string& where) {
  double v = 0.0;
  const char* b = text.data();
  const char* e = text.data() + text.size();
  const auto r = std::from_chars(b, e, v);
  if (r.ec != std::errc{} || r.ptr != e) throw ConfigError(where + ": not a number: '" + text + "'");
  return v;
}

std::uint64_t parse_uint(const std::string& text, const std::string& where) {
  std::uint64_t v = 0;
  const char* b = text.data();
  const char* e = text.data() + text.size();
  const auto r = std::from_chars(b, e, v);
  if (r.ec != std::errc{} || r.ptr != e) {
    throw ConfigError(where + ": not a non-negative integer: '" + text + "'");
  }
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

// "t:value, t:value, ..."
scenario::PiecewiseLinearProfile parse_profile(const std::string& text, const std::string& where) {
  std::vector<scenario::Breakpoint> pts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw ConfigError(where + ": breakpoint '" + item + "' is not of the form t:value");
    }
    pts.push_back({parse_double(trim(item.substr(0, colon)), where),
                   parse_double(trim(item.substr(colon + 1)), where)});
  }
  if (pts.empty()) throw ConfigError(where + ": empty profile");
  return scenario::PiecewiseLinearProfile(std::move(pts));
}

std::string format_profile(const scenario::PiecewiseLinearProfile& p) {
  std::string out;
  for (const auto& b : p.points()) {
    if (!out.empty()) out += ", ";
    out += format_double(b.t) + ":" + format_double(b.value);
  }
  return out;
}

struct NumberKey {
  const char* section;
  const char* key;
  std::function<double&(SimConfig&)> ref;
};

struct IntegerKey {
  const char* section;
  const char* key;
  std::function<std::uint64_t(const SimConfig&)> get;
  std::function<void(SimConfig&, std::uint64_t)> set;
};

struct ScaledKey {
  const char* section;
  const char* key;
  double scale;  // file value * scale = stored value
  std::function<double&(SimConfig&)> ref;
};

const std::vector<NumberKey>& number_keys() {
  static const std::vector<NumberKey> keys = [] {
    std::vector<NumberKey> k;
    auto add = [&](const char* s, const char* n, std::function<double&(SimConfig&)> f) {
      k.push_back({s, n, std::move(f)});
    };
    add("plant", "gas_r_j_per_kg_k", [](SimConfig& c) -> double& { return c.plant.gas.R; });
    add("plant", "gas_cp_j_per_kg_k", [](SimConfig& c) -> double& { return c.plant.gas.cp; });
    add("plant", "v1_volume_m3", [](SimConfig& c) -> double& { return c.plant.v1.volume; });
    add("plant", "v2_volume_m3", [](SimConfig& c) -> double& { return c.plant.v2.volume; });
    add("plant", "supply_area_m2", [](SimConfig& c) -> double& { return c.plant.supply_area; });
    const char* names[3] = {"valve_air", "valve1", "valve2"};
    static std::vector<std::string> storage;
    for (std::size_t i = 0; i < 3; ++i) {
      for (const char* suffix : {"_diameter_m", "_tau_s", "_delay_s"}) {
        storage.push_back(std::string(names[i]) + suffix);
      }
    }
    for (std::size_t i = 0; i < 3; ++i) {
      add("plant", storage[3 * i].c_str(),
          [i](SimConfig& c) -> double& { return c.plant.valves[i].diameter; });
      add("plant", storage[3 * i + 1].c_str(),
          [i](SimConfig& c) -> double& { return c.plant.valves[i].tau; });
      add("plant", storage[3 * i + 2].c_str(),
          [i](SimConfig& c) -> double& { return c.plant.valves[i].delay; });
    }
    add("boundary", "supply_temperature_k", [](SimConfig& c) -> double& { return c.boundary.T_in; });
    add("boundary", "ambient_temperature_k", [](SimConfig& c) -> double& { return c.boundary.T_amb; });
    add("boundary", "q1_w", [](SimConfig& c) -> double& { return c.boundary.Q1; });
    add("boundary", "q2_w", [](SimConfig& c) -> double& { return c.boundary.Q2; });

    add("controller", "rate_max_per_s", [](SimConfig& c) -> double& { return c.rate_max; });

    add("adrc", "k11", [](SimConfig& c) -> double& { return c.adrc.gains.k11; });
    add("adrc", "k12", [](SimConfig& c) -> double& { return c.adrc.gains.k12; });
    add("adrc", "k13", [](SimConfig& c) -> double& { return c.adrc.gains.k13; });
    add("adrc", "k21", [](SimConfig& c) -> double& { return c.adrc.gains.k21; });
    add("adrc", "k22", [](SimConfig& c) -> double& { return c.adrc.gains.k22; });
    add("adrc", "k23", [](SimConfig& c) -> double& { return c.adrc.gains.k23; });
    add("adrc", "rho", [](SimConfig& c) -> double& { return c.adrc.gains.rho; });
    add("adrc", "omega1_rad_s", [](SimConfig& c) -> double& { return c.adrc.omega1; });
    add("adrc", "omega2_rad_s", [](SimConfig& c) -> double& { return c.adrc.omega2; });
    add("adrc", "td_speed", [](SimConfig& c) -> double& { return c.adrc.td_speed; });
    add("adrc", "td_step_factor", [](SimConfig& c) -> double& { return c.adrc.td_step_factor; });
    add("adrc", "nominal_p1_kpa", [](SimConfig& c) -> double& { return c.adrc.nominal_p1_kpa; });
    add("adrc", "nominal_p2_kpa", [](SimConfig& c) -> double& { return c.adrc.nominal_p2_kpa; });

    add("penalty", "gamma0", [](SimConfig& c) -> double& { return c.penalty.gamma; });
    add("penalty", "mu", [](SimConfig& c) -> double& { return c.penalty.mu; });
    add("penalty", "sigma", [](SimConfig& c) -> double& { return c.penalty.sigma; });
    add("penalty", "growth_factor", [](SimConfig& c) -> double& { return c.penalty.omega; });
    add("penalty", "gamma_max", [](SimConfig& c) -> double& { return c.schedule.gamma_max; });

    add("offline", "start_p1_kpa", [](SimConfig& c) -> double& { return c.offline.start[0]; });
    add("offline", "start_p2_kpa", [](SimConfig& c) -> double& { return c.offline.start[1]; });
    add("offline", "p1_set_kpa", [](SimConfig& c) -> double& { return c.offline.problem.p1_set; });
    add("offline", "p2_set_kpa", [](SimConfig& c) -> double& { return c.offline.problem.p2_set; });
    add("offline", "c1_kpa", [](SimConfig& c) -> double& { return c.offline.problem.c1; });
    add("offline", "c2_kpa", [](SimConfig& c) -> double& { return c.offline.problem.c2; });
    add("offline", "eps1_kpa", [](SimConfig& c) -> double& { return c.offline.problem.eps1; });
    add("offline", "eps2_kpa", [](SimConfig& c) -> double& { return c.offline.problem.eps2; });
    add("offline", "gamma0", [](SimConfig& c) -> double& { return c.offline.problem.gamma; });
    add("offline", "mu", [](SimConfig& c) -> double& { return c.offline.problem.mu; });
    add("offline", "sigma", [](SimConfig& c) -> double& { return c.offline.problem.sigma; });
    add("offline", "learning_rate", [](SimConfig& c) -> double& { return c.offline.problem.lr; });
    add("offline", "growth_factor", [](SimConfig& c) -> double& { return c.offline.problem.omega; });
    add("offline", "xi", [](SimConfig& c) -> double& { return c.offline.problem.xi; });
    add("offline", "gamma_max", [](SimConfig& c) -> double& { return c.offline.problem.gamma_max; });
    add("offline", "tol", [](SimConfig& c) -> double& { return c.offline.problem.tol; });

    static std::vector<std::string> pid_storage;
    const char* loops[3] = {"air", "valve1", "valve2"};
    for (std::size_t i = 0; i < 3; ++i) {
      for (const char* suffix :
           {"_kp", "_ki_per_s", "_kd_s", "_integral_limit", "_derivative_filter_s", "_direction"}) {
        pid_storage.push_back(std::string(loops[i]) + suffix);
      }
    }
    for (std::size_t i = 0; i < 3; ++i) {
      const std::string* n = &pid_storage[6 * i];
      add("pid", n[0].c_str(), [i](SimConfig& c) -> double& { return c.pid.loops[i].kp; });
      add("pid", n[1].c_str(), [i](SimConfig& c) -> double& { return c.pid.loops[i].ki; });
      add("pid", n[2].c_str(), [i](SimConfig& c) -> double& { return c.pid.loops[i].kd; });
      add("pid", n[3].c_str(),
          [i](SimConfig& c) -> double& { return c.pid.loops[i].integral_limit; });
      add("pid", n[4].c_str(),
          [i](SimConfig& c) -> double& { return c.pid.loops[i].derivative_filter; });
      add("pid", n[5].c_str(), [i](SimConfig& c) -> double& { return c.pid.loops[i].direction; });
    }

    add("metrics", "window_start_s", [](SimConfig& c) -> double& { return c.window.start; });
    add("metrics", "window_end_s", [](SimConfig& c) -> double& { return c.window.end; });
    add("metrics", "settle_band_kpa", [](SimConfig& c) -> double& { return c.window.settle_band_kpa; });
    return k;
  }();
  return keys;
}

const std::vector<ScaledKey>& kpa_keys() {
  static const std::vector<ScaledKey> keys{
      {"boundary", "supply_pressure_kpa", 1000.0,
       [](SimConfig& c) -> double& { return c.boundary.P_in; }},
      {"boundary", "ambient_pressure_kpa", 1000.0,
       [](SimConfig& c) -> double& { return c.boundary.P_amb; }},
      {"boundary", "engine_pressure_kpa", 1000.0,
       [](SimConfig& c) -> double& { return c.boundary.P_engine; }},
  };
  return keys;
}

const std::vector<IntegerKey>& integer_keys() {
  static const std::vector<IntegerKey> keys{
      {"penalty", "grow_after_ticks", [](const SimConfig& c) { return std::uint64_t(c.schedule.n_grow); },
       [](SimConfig& c, std::uint64_t v) { c.schedule.n_grow = v; }},
      {"penalty", "reset_after_ticks",
       [](const SimConfig& c) { return std::uint64_t(c.schedule.m_reset); },
       [](SimConfig& c, std::uint64_t v) { c.schedule.m_reset = v; }},
      {"offline", "max_iters",
       [](const SimConfig& c) { return std::uint64_t(c.offline.problem.max_iters); },
       [](SimConfig& c, std::uint64_t v) { c.offline.problem.max_iters = v; }},
      {"noise", "seed", [](const SimConfig& c) { return c.scenario.noise.seed; },
       [](SimConfig& c, std::uint64_t v) { c.scenario.noise.seed = v; }},
  };
  return keys;
}

// Keys handled outside the tables.
const std::map<std::string, std::set<std::string>>& special_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"scenario",
       {"preset", "duration_s", "dt_s", "p1_set_kpa", "p2_set_kpa", "mdot_out_kg_s", "eps1_kpa",
        "eps2_kpa"}},
      {"noise", {"pressure_bound_kpa", "temperature_bound_k", "model"}},
      {"controller", {"type"}},
      {"adrc", {"pd_sign_convention", "b_eff1_kpa_s2", "b_eff2_kpa_s2"}},
      {"output", {"dir"}},
  };
  return keys;
}

std::map<std::string, std::set<std::string>> known_keys() {
  auto keys = special_keys();
  for (const auto& k : number_keys()) keys[k.section].insert(k.key);
  for (const auto& k : kpa_keys()) keys[k.section].insert(k.key);
  for (const auto& k : integer_keys()) keys[k.section].insert(k.key);
  return keys;
}

std::string where(const std::string& section, const std::string& key) {
  return "[" + section + "] " + key;
}

}  // namespace

SimConfig parse_config(std::string_view text) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }

  const auto known = known_keys();
  for (const auto& [section, body] : tree) {
    const auto it = known.find(section);
    if (it == known.end()) throw ConfigError("unknown config section [" + section + "]");
    if (!body.data().empty() && body.empty()) {
      throw ConfigError("config key '" + section + "' must live inside a section");
    }
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) throw ConfigError("unknown config key " + where(section, key));
    }
  }

  auto get = [&](const std::string& section, const std::string& key) -> std::optional<std::string> {
    const auto sec = tree.get_child_optional(pt::ptree::path_type(section, '\0'));
    if (!sec) return std::nullopt;
    const auto v = sec->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return trim(*v);
  };

  SimConfig cfg = default_config();

  if (auto v = get("scenario", "preset")) cfg.scenario = scenario::scenario_preset(*v);
  if (auto v = get("scenario", "duration_s")) cfg.scenario.duration = parse_double(*v, where("scenario", "duration_s"));
  if (auto v = get("scenario", "dt_s")) cfg.scenario.dt = parse_double(*v, where("scenario", "dt_s"));
  if (auto v = get("scenario", "eps1_kpa")) cfg.scenario.eps1 = parse_double(*v, where("scenario", "eps1_kpa"));
  if (auto v = get("scenario", "eps2_kpa")) cfg.scenario.eps2 = parse_double(*v, where("scenario", "eps2_kpa"));
  if (auto v = get("scenario", "p1_set_kpa")) cfg.scenario.p1_set = parse_profile(*v, where("scenario", "p1_set_kpa"));
  if (auto v = get("scenario", "p2_set_kpa")) cfg.scenario.p2_set = parse_profile(*v, where("scenario", "p2_set_kpa"));
  if (auto v = get("scenario", "mdot_out_kg_s")) cfg.scenario.mdot_out = parse_profile(*v, where("scenario", "mdot_out_kg_s"));
  if (auto v = get("noise", "pressure_bound_kpa")) cfg.scenario.noise.press_bound = parse_double(*v, where("noise", "pressure_bound_kpa"));
  if (auto v = get("noise", "temperature_bound_k")) cfg.scenario.noise.temp_bound = parse_double(*v, where("noise", "temperature_bound_k"));
  if (auto v = get("noise", "model")) cfg.scenario.noise.model = scenario::noise_model_from_string(*v);
  if (auto v = get("controller", "type")) cfg.controller = controller_from_string(*v);
  if (auto v = get("adrc", "pd_sign_convention")) {
    if (*v == "conventional") {
      cfg.adrc.gains.pd_sign = control::PdSign::kConventional;
    } else if (*v == "as-printed") {
      cfg.adrc.gains.pd_sign = control::PdSign::kAsPrinted;
    } else {
      throw ConfigError(where("adrc", "pd_sign_convention") + ": expected conventional or as-printed");
    }
  }
  const auto b1 = get("adrc", "b_eff1_kpa_s2");
  const auto b2 = get("adrc", "b_eff2_kpa_s2");
  if (b1.has_value() != b2.has_value()) {
    throw ConfigError("[adrc] b_eff1_kpa_s2 and b_eff2_kpa_s2 must be given together");
  }
  if (b1) {
    if ((*b1 == "derived") != (*b2 == "derived")) {
      throw ConfigError("[adrc] b_eff1_kpa_s2 and b_eff2_kpa_s2 must both be numbers or both 'derived'");
    }
    cfg.adrc.b_eff_override = *b1 != "derived";
    if (cfg.adrc.b_eff_override) {
      cfg.adrc.gains.b_eff1 = parse_double(*b1, where("adrc", "b_eff1_kpa_s2"));
      cfg.adrc.gains.b_eff2 = parse_double(*b2, where("adrc", "b_eff2_kpa_s2"));
    }
  }
  if (auto v = get("output", "dir")) cfg.output_dir = *v;

  for (const auto& k : number_keys()) {
    if (auto v = get(k.section, k.key)) k.ref(cfg) = parse_double(*v, where(k.section, k.key));
  }
  for (const auto& k : kpa_keys()) {
    if (auto v = get(k.section, k.key)) k.ref(cfg) = k.scale * parse_double(*v, where(k.section, k.key));
  }
  for (const auto& k : integer_keys()) {
    if (auto v = get(k.section, k.key)) k.set(cfg, parse_uint(*v, where(k.section, k.key)));
  }

  cfg.validate();
  return cfg;
}

SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string to_config_text(const SimConfig& cfg_in) {
  SimConfig cfg = cfg_in;
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> out;
  for (const auto& k : number_keys()) out[k.section].emplace_back(k.key, format_double(k.ref(cfg)));
  for (const auto& k : kpa_keys()) {
    out[k.section].emplace_back(k.key, format_double(k.ref(cfg) / k.scale));
  }
  for (const auto& k : integer_keys()) out[k.section].emplace_back(k.key, std::to_string(k.get(cfg)));

  auto& sc = out["scenario"];
  sc.emplace_back("preset", cfg.scenario.name);
  sc.emplace_back("duration_s", format_double(cfg.scenario.duration));
  sc.emplace_back("dt_s", format_double(cfg.scenario.dt));
  sc.emplace_back("eps1_kpa", format_double(cfg.scenario.eps1));
  sc.emplace_back("eps2_kpa", format_double(cfg.scenario.eps2));
  sc.emplace_back("p1_set_kpa", format_profile(cfg.scenario.p1_set));
  sc.emplace_back("p2_set_kpa", format_profile(cfg.scenario.p2_set));
  sc.emplace_back("mdot_out_kg_s", format_profile(cfg.scenario.mdot_out));
  auto& nz = out["noise"];
  nz.emplace_back("pressure_bound_kpa", format_double(cfg.scenario.noise.press_bound));
  nz.emplace_back("temperature_bound_k", format_double(cfg.scenario.noise.temp_bound));
  nz.emplace_back("model", scenario::to_string(cfg.scenario.noise.model));
  out["controller"].emplace_back("type", to_string(cfg.controller));
  auto& ad = out["adrc"];
  ad.emplace_back("pd_sign_convention",
                  cfg.adrc.gains.pd_sign == control::PdSign::kAsPrinted ? "as-printed" : "conventional");
  const bool ov = cfg.adrc.b_eff_override;
  ad.emplace_back("b_eff1_kpa_s2", ov ? format_double(cfg.adrc.gains.b_eff1) : "derived");
  ad.emplace_back("b_eff2_kpa_s2", ov ? format_double(cfg.adrc.gains.b_eff2) : "derived");
  out["output"].emplace_back("dir", cfg.output_dir);

  std::string text;
  for (const auto& [section, entries] : out) {
    text += "[" + section + "]\n";
    for (const auto& [k, v] : entries) text += k + " = " + v + "\n";
    text += "\n";
  }
  return text;
}

}  // namespace altstand::harness
