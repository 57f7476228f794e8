#include "thermoflux/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "thermoflux/errors.hpp"

namespace thermoflux {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& section,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : allowed)
      if (it.key() == key) {
        known = true;
        break;
      }
    if (!known)
      throw ConfigError("unknown config key '" +
                        (section.empty() ? it.key() : section + "." + it.key()) +
                        "'");
  }
}

double as_number(const json& v, const std::string& key) {
  if (!v.is_number())
    throw ConfigError("config key '" + key + "' must be a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& key) {
  if (!v.is_number_integer())
    throw ConfigError("config key '" + key + "' must be an integer");
  return v.get<int>();
}

bool as_bool(const json& v, const std::string& key) {
  if (!v.is_boolean())
    throw ConfigError("config key '" + key + "' must be a boolean");
  return v.get<bool>();
}

std::vector<double> as_number_list(const json& v, const std::string& key) {
  if (!v.is_array())
    throw ConfigError("config key '" + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(as_number(e, key));
  return out;
}

}  // namespace

MaterialModel pmma_material() { return MaterialModel::pmma_default(); }

std::vector<SpectralBand> pmma_bands() {
  // Shape follows the usual PMMA picture (near-transparent below ~2.2 um,
  // absorbing in the infrared); magnitudes are representative placeholders,
  // not measured data.
  return {make_band(0.5e-6, 2.2e-6, 2.0, 0.05),
          make_band(2.2e-6, 6e-6, 40.0, 0.05),
          make_band(6e-6, 12e-6, 60.0, 0.02),
          make_band(12e-6, 50e-6, 80.0, 0.0)};
}

SimulationConfig default_config() { return SimulationConfig{}; }

SimulationConfig dataset_default_config() {
  SimulationConfig config;
  config.snapshot_times.clear();
  for (int t = 2; t <= 100; t += 2) config.snapshot_times.push_back(t);
  return config;
}

SimulationConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
  check_keys(doc, "", {"grid", "time", "bc", "material", "radiation",
                       "coupling", "solver", "snapshots", "steady", "sweep"});

  SimulationConfig config = default_config();

  if (doc.contains("grid")) {
    const auto& g = doc["grid"];
    check_keys(g, "grid", {"length_m", "n_nodes"});
    double length = config.grid.length();
    int n_nodes = config.grid.n_nodes();
    if (g.contains("length_m")) length = as_number(g["length_m"], "grid.length_m");
    if (g.contains("n_nodes")) n_nodes = as_int(g["n_nodes"], "grid.n_nodes");
    config.grid = Grid1D(length, n_nodes);
  }

  if (doc.contains("time")) {
    const auto& t = doc["time"];
    check_keys(t, "time", {"dt_s", "t_end_s"});
    if (t.contains("dt_s")) config.dt = as_number(t["dt_s"], "time.dt_s");
    if (t.contains("t_end_s"))
      config.t_end = as_number(t["t_end_s"], "time.t_end_s");
  }

  if (doc.contains("bc")) {
    const auto& b = doc["bc"];
    check_keys(b, "bc", {"ramp_rate", "ramp_end", "base_T", "T_E", "hold_peak"});
    if (b.contains("ramp_rate"))
      config.bc.ramp_rate = as_number(b["ramp_rate"], "bc.ramp_rate");
    if (b.contains("ramp_end"))
      config.bc.ramp_end = as_number(b["ramp_end"], "bc.ramp_end");
    if (b.contains("base_T"))
      config.bc.base_temperature = as_number(b["base_T"], "bc.base_T");
    if (b.contains("T_E"))
      config.bc.back_temperature = as_number(b["T_E"], "bc.T_E");
    if (b.contains("hold_peak"))
      config.bc.hold_peak = as_bool(b["hold_peak"], "bc.hold_peak");
  }

  if (doc.contains("material")) {
    const auto& m = doc["material"];
    check_keys(m, "material",
               {"preset", "k_ref", "k_coeffs", "rho_cp_ref", "rho_cp_coeffs",
                "t_min", "t_max"});
    MaterialModel base = config.material;
    if (m.contains("preset")) {
      const auto& p = m["preset"];
      if (!p.is_string())
        throw ConfigError("config key 'material.preset' must be a string");
      const std::string name = p.get<std::string>();
      if (name == "pmma-default") {
        base = pmma_material();
        config.bands = pmma_bands();
      } else if (name == "default") {
        base = SimulationConfig::default_material();
      } else {
        throw ConfigError("unknown material.preset '" + name + "'");
      }
    }
    double k_ref = base.k_ref(), rho_cp_ref = base.rho_cp_ref();
    double t_min = base.t_min(), t_max = base.t_max();
    std::vector<double> k_coeffs = base.k_coeffs();
    std::vector<double> rho_cp_coeffs = base.rho_cp_coeffs();
    if (m.contains("k_ref")) k_ref = as_number(m["k_ref"], "material.k_ref");
    if (m.contains("rho_cp_ref"))
      rho_cp_ref = as_number(m["rho_cp_ref"], "material.rho_cp_ref");
    if (m.contains("k_coeffs"))
      k_coeffs = as_number_list(m["k_coeffs"], "material.k_coeffs");
    if (m.contains("rho_cp_coeffs"))
      rho_cp_coeffs = as_number_list(m["rho_cp_coeffs"], "material.rho_cp_coeffs");
    if (m.contains("t_min")) t_min = as_number(m["t_min"], "material.t_min");
    if (m.contains("t_max")) t_max = as_number(m["t_max"], "material.t_max");
    config.material =
        MaterialModel(k_ref, k_coeffs, rho_cp_ref, rho_cp_coeffs, t_min, t_max);
  }

  if (doc.contains("radiation")) {
    const auto& r = doc["radiation"];
    check_keys(r, "radiation",
               {"enabled", "n_ordinates", "scatter_tol", "max_scatter_iters",
                "emission_panels", "bands"});
    if (r.contains("enabled"))
      config.radiation_enabled = as_bool(r["enabled"], "radiation.enabled");
    if (r.contains("n_ordinates"))
      config.n_ordinates = as_int(r["n_ordinates"], "radiation.n_ordinates");
    if (r.contains("scatter_tol"))
      config.sweep.scatter_tol = as_number(r["scatter_tol"], "radiation.scatter_tol");
    if (r.contains("max_scatter_iters"))
      config.sweep.max_scatter_iters =
          as_int(r["max_scatter_iters"], "radiation.max_scatter_iters");
    if (r.contains("emission_panels"))
      config.sweep.emission_panels =
          as_int(r["emission_panels"], "radiation.emission_panels");
    if (r.contains("bands")) {
      if (!r["bands"].is_array())
        throw ConfigError("config key 'radiation.bands' must be an array");
      std::vector<SpectralBand> bands;
      for (std::size_t i = 0; i < r["bands"].size(); ++i) {
        const auto& b = r["bands"][i];
        std::ostringstream key;
        key << "radiation.bands[" << i << "]";
        check_keys(b, key.str(), {"lambda_lo", "lambda_hi", "beta", "albedo"});
        for (const char* field : {"lambda_lo", "lambda_hi", "beta", "albedo"})
          if (!b.contains(field))
            throw ConfigError(key.str() + " missing '" + field + "'");
        bands.push_back(make_band(as_number(b["lambda_lo"], key.str()),
                                  as_number(b["lambda_hi"], key.str()),
                                  as_number(b["beta"], key.str()),
                                  as_number(b["albedo"], key.str())));
      }
      config.bands = std::move(bands);
    }
  }

  if (doc.contains("coupling")) {
    const auto& c = doc["coupling"];
    check_keys(c, "coupling", {"couple_tol", "couple_max"});
    if (c.contains("couple_tol"))
      config.coupling.couple_tol = as_number(c["couple_tol"], "coupling.couple_tol");
    if (c.contains("couple_max"))
      config.coupling.couple_max = as_int(c["couple_max"], "coupling.couple_max");
  }

  if (doc.contains("solver")) {
    const auto& s = doc["solver"];
    check_keys(s, "solver", {"picard_tol", "picard_max"});
    if (s.contains("picard_tol"))
      config.solver.picard_tol = as_number(s["picard_tol"], "solver.picard_tol");
    if (s.contains("picard_max"))
      config.solver.picard_max = as_int(s["picard_max"], "solver.picard_max");
  }

  if (doc.contains("snapshots"))
    config.snapshot_times = as_number_list(doc["snapshots"], "snapshots");

  if (doc.contains("steady")) {
    const auto& s = doc["steady"];
    check_keys(s, "steady", {"eps", "window"});
    if (s.contains("eps")) config.steady.eps = as_number(s["eps"], "steady.eps");
    if (s.contains("window"))
      config.steady.window = as_int(s["window"], "steady.window");
  }

  config.validate();
  return config;
}

SimulationConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

void apply_override(SimulationConfig& config, const std::string& key,
                    double value) {
  if (key == "bc.ramp_rate")
    config.bc.ramp_rate = value;
  else if (key == "bc.ramp_end")
    config.bc.ramp_end = value;
  else if (key == "bc.base_T")
    config.bc.base_temperature = value;
  else if (key == "bc.T_E")
    config.bc.back_temperature = value;
  else if (key == "time.dt_s")
    config.dt = value;
  else if (key == "time.t_end_s")
    config.t_end = value;
  else if (key == "grid.length_m")
    config.grid = Grid1D(value, config.grid.n_nodes());
  else if (key == "grid.n_nodes")
    config.grid = Grid1D(config.grid.length(), static_cast<int>(value));
  else if (key == "material.k_ref")
    config.material =
        MaterialModel(value, config.material.k_coeffs(),
                      config.material.rho_cp_ref(), config.material.rho_cp_coeffs(),
                      config.material.t_min(), config.material.t_max());
  else if (key == "material.rho_cp_ref")
    config.material =
        MaterialModel(config.material.k_ref(), config.material.k_coeffs(), value,
                      config.material.rho_cp_coeffs(), config.material.t_min(),
                      config.material.t_max());
  else
    throw ConfigError("sweep key '" + key + "' is not overridable");
  config.validate();
}

SweepSpec sweep_from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  json doc;
  try {
    doc = json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  SweepSpec spec;
  if (doc.is_object() && doc.contains("sweep")) {
    const auto& s = doc["sweep"];
    check_keys(s, "sweep", {"key", "values"});
    if (!s.contains("key") || !s.contains("values"))
      throw ConfigError("sweep needs both 'key' and 'values'");
    if (!s["key"].is_string()) throw ConfigError("sweep.key must be a string");
    spec.key = s["key"].get<std::string>();
    spec.values = as_number_list(s["values"], "sweep.values");
  }
  return spec;
}

std::string canonical_config_json(const SimulationConfig& config) {
  json doc;
  doc["grid"]["length_m"] = config.grid.length();
  doc["grid"]["n_nodes"] = config.grid.n_nodes();
  doc["time"]["dt_s"] = config.dt;
  doc["time"]["t_end_s"] = config.t_end;
  doc["bc"]["ramp_rate"] = config.bc.ramp_rate;
  doc["bc"]["ramp_end"] = config.bc.ramp_end;
  doc["bc"]["base_T"] = config.bc.base_temperature;
  doc["bc"]["T_E"] = config.bc.back_temperature;
  doc["bc"]["hold_peak"] = config.bc.hold_peak;
  doc["material"]["k_ref"] = config.material.k_ref();
  doc["material"]["k_coeffs"] = config.material.k_coeffs();
  doc["material"]["rho_cp_ref"] = config.material.rho_cp_ref();
  doc["material"]["rho_cp_coeffs"] = config.material.rho_cp_coeffs();
  doc["material"]["t_min"] = config.material.t_min();
  doc["material"]["t_max"] = config.material.t_max();
  doc["radiation"]["enabled"] = config.radiation_enabled;
  doc["radiation"]["n_ordinates"] = config.n_ordinates;
  doc["radiation"]["scatter_tol"] = config.sweep.scatter_tol;
  doc["radiation"]["max_scatter_iters"] = config.sweep.max_scatter_iters;
  doc["radiation"]["emission_panels"] = config.sweep.emission_panels;
  doc["radiation"]["bands"] = json::array();
  for (const auto& b : config.bands)
    doc["radiation"]["bands"].push_back({{"lambda_lo", b.lambda_lo},
                                         {"lambda_hi", b.lambda_hi},
                                         {"beta", b.beta},
                                         {"albedo", b.albedo}});
  doc["coupling"]["couple_tol"] = config.coupling.couple_tol;
  doc["coupling"]["couple_max"] = config.coupling.couple_max;
  doc["solver"]["picard_tol"] = config.solver.picard_tol;
  doc["solver"]["picard_max"] = config.solver.picard_max;
  doc["snapshots"] = config.snapshot_times;
  doc["steady"]["eps"] = config.steady.eps;
  doc["steady"]["window"] = config.steady.window;
  return doc.dump();
}

std::uint64_t config_hash(const SimulationConfig& config) {
  const std::string text = canonical_config_json(config);
  std::uint64_t hash = 14695981039346656037ull;  // FNV-1a
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

}  // namespace thermoflux
