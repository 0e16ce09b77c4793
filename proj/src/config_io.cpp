#include "rssloc/config_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rssloc {

namespace {

json vec2_to_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

Vec2 vec2_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) {
    throw std::runtime_error("expected a 2-element array, got " + j.dump());
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

/// Shortest round-trip decimal form; deterministic across runs.
std::string num(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void merge_checked(json& base, const json& overlay, const std::string& prefix) {
  for (auto it = overlay.begin(); it != overlay.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!base.contains(it.key())) {
      throw std::runtime_error("config: unknown key '" + path + "'");
    }
    if (it->is_object() && base[it.key()].is_object()) {
      merge_checked(base[it.key()], *it, path);
    } else {
      base[it.key()] = *it;
    }
  }
}

}  // namespace

void to_json(json& j, const Scenario& s) {
  json anchors = json::array();
  for (const Vec2& a : s.anchors) anchors.push_back(vec2_to_json(a));
  j = json{{"region_min", vec2_to_json(s.region_min)},
           {"region_max", vec2_to_json(s.region_max)},
           {"anchors", anchors},
           {"tx_power_dbm", s.tx_power_dbm},
           {"path_loss_exponent", s.path_loss_exponent},
           {"noise_std_db", s.noise_std_db}};
}

void from_json(const json& j, Scenario& s) {
  s.region_min = vec2_from_json(j.at("region_min"));
  s.region_max = vec2_from_json(j.at("region_max"));
  s.anchors.clear();
  for (const json& a : j.at("anchors")) s.anchors.push_back(vec2_from_json(a));
  s.tx_power_dbm = j.at("tx_power_dbm").get<double>();
  s.path_loss_exponent = j.at("path_loss_exponent").get<double>();
  const json& noise = j.at("noise_std_db");
  if (noise.is_number()) {
    s.noise_std_db.assign(s.anchors.size(), noise.get<double>());
  } else {
    s.noise_std_db = noise.get<std::vector<double>>();
  }
}

void to_json(json& j, const BarpropConfig& c) {
  j = json{{"learning_rate", c.learning_rate},
           {"nominal_decay", vec2_to_json(c.nominal_decay)},
           {"stability_const", vec2_to_json(c.stability_const)},
           {"buffer_len", c.buffer_len},
           {"tol", c.tol},
           {"max_iters", c.max_iters},
           {"init_candidates", c.init_candidates},
           {"bound_perturb_lo", c.bound_perturb_lo},
           {"bound_perturb_hi", c.bound_perturb_hi},
           {"fixed_decay", c.fixed_decay}};
}

void from_json(const json& j, BarpropConfig& c) {
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  if (j.contains("nominal_decay")) {
    c.nominal_decay = j["nominal_decay"].is_number()
                          ? Vec2::Constant(j["nominal_decay"].get<double>())
                          : vec2_from_json(j["nominal_decay"]);
  }
  if (j.contains("stability_const")) {
    c.stability_const = j["stability_const"].is_number()
                            ? Vec2::Constant(j["stability_const"].get<double>())
                            : vec2_from_json(j["stability_const"]);
  }
  c.buffer_len = j.value("buffer_len", c.buffer_len);
  c.tol = j.value("tol", c.tol);
  c.max_iters = j.value("max_iters", c.max_iters);
  c.init_candidates = j.value("init_candidates", c.init_candidates);
  c.bound_perturb_lo = j.value("bound_perturb_lo", c.bound_perturb_lo);
  c.bound_perturb_hi = j.value("bound_perturb_hi", c.bound_perturb_hi);
  c.fixed_decay = j.value("fixed_decay", c.fixed_decay);
}

void to_json(json& j, const RmspropConfig& c) {
  j = json{{"learning_rate", c.learning_rate},
           {"decay", vec2_to_json(c.decay)},
           {"stability_const", vec2_to_json(c.stability_const)},
           {"tol", c.tol},
           {"max_iters", c.max_iters},
           {"init_candidates", c.init_candidates},
           {"bound_perturb_lo", c.bound_perturb_lo},
           {"bound_perturb_hi", c.bound_perturb_hi}};
}

void from_json(const json& j, RmspropConfig& c) {
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  if (j.contains("decay")) {
    c.decay = j["decay"].is_number() ? Vec2::Constant(j["decay"].get<double>())
                                     : vec2_from_json(j["decay"]);
  }
  if (j.contains("stability_const")) {
    c.stability_const = j["stability_const"].is_number()
                            ? Vec2::Constant(j["stability_const"].get<double>())
                            : vec2_from_json(j["stability_const"]);
  }
  c.tol = j.value("tol", c.tol);
  c.max_iters = j.value("max_iters", c.max_iters);
  c.init_candidates = j.value("init_candidates", c.init_candidates);
  c.bound_perturb_lo = j.value("bound_perturb_lo", c.bound_perturb_lo);
  c.bound_perturb_hi = j.value("bound_perturb_hi", c.bound_perturb_hi);
}

void to_json(json& j, const LmConfig& c) {
  j = json{{"initial_damping", c.initial_damping},
           {"damping_up", c.damping_up},
           {"damping_down", c.damping_down},
           {"tol", c.tol},
           {"max_iters", c.max_iters}};
}

void from_json(const json& j, LmConfig& c) {
  c.initial_damping = j.value("initial_damping", c.initial_damping);
  c.damping_up = j.value("damping_up", c.damping_up);
  c.damping_down = j.value("damping_down", c.damping_down);
  c.tol = j.value("tol", c.tol);
  c.max_iters = j.value("max_iters", c.max_iters);
}

void to_json(json& j, const DeConfig& c) {
  j = json{{"population", c.population},
           {"max_generations", c.max_generations},
           {"crossover_rate", c.crossover_rate},
           {"differential_weight", c.differential_weight},
           {"tol", c.tol}};
}

void from_json(const json& j, DeConfig& c) {
  c.population = j.value("population", c.population);
  c.max_generations = j.value("max_generations", c.max_generations);
  c.crossover_rate = j.value("crossover_rate", c.crossover_rate);
  c.differential_weight = j.value("differential_weight", c.differential_weight);
  c.tol = j.value("tol", c.tol);
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("scenario file " + path + ": " + e.what());
  }
  Scenario s = j.get<Scenario>();
  s.validate();
  return s;
}

void save_scenario(const std::string& path, const Scenario& s) {
  write_text_file(path, json(s).dump(2) + "\n");
}

json default_config() {
  json scenario;
  scenario["layout"] = "homogeneous_12";  // homogeneous_12 | nonhomogeneous_12 | random | inline | file
  scenario["anchor_count"] = 12;
  scenario["path"] = "";
  scenario["region_min"] = json::array({0.0, 0.0});
  scenario["region_max"] = json::array({40.0, 40.0});
  scenario["tx_power_dbm"] = -10.0;
  scenario["path_loss_exponent"] = 3.0;
  scenario["anchors"] = json::array();       // inline layout only
  scenario["noise_std_db"] = json::array();  // inline layout only

  json target;
  target["mode"] = "uniform";  // uniform | fixed
  target["position"] = json::array({20.0, 20.0});

  json experiment;
  experiment["runs"] = 1000;
  experiment["noise_levels"] = json::array({1.0, 2.0, 3.0, 4.0, 5.0});
  experiment["anchor_counts"] = json::array({10, 14, 18, 22, 26, 30});
  experiment["algorithms"] = json::array({"barprop", "rmsprop", "lm", "de"});
  experiment["noise_enabled"] = true;
  experiment["per_run_anchor_layouts"] = false;

  json report;
  report["timing"] = 1;  // 0: zero timing fields for byte-reproducible artifacts

  json ingest;
  ingest["path"] = "";

  return json{{"scenario", scenario},
              {"target", target},
              {"experiment", experiment},
              {"barprop", BarpropConfig{}},
              {"rmsprop", RmspropConfig{}},
              {"lm", LmConfig{}},
              {"de", DeConfig{}},
              {"report", report},
              {"ingest", ingest}};
}

json load_config(const std::string& path) {
  json config = default_config();
  if (path.empty()) return config;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  json overlay;
  try {
    in >> overlay;
  } catch (const json::exception& e) {
    throw std::runtime_error("config file " + path + ": " + e.what());
  }
  merge_checked(config, overlay, "");
  return config;
}

std::vector<std::string> apply_overrides(json& config, const std::vector<std::string>& sets) {
  std::vector<std::string> echo;
  for (const std::string& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("override '" + kv + "' is not of the form key=value");
    }
    const std::string key = kv.substr(0, eq);
    const std::string raw = kv.substr(eq + 1);

    json* node = &config;
    std::stringstream ss(key);
    std::string part;
    while (std::getline(ss, part, '.')) {
      if (!node->is_object() || !node->contains(part)) {
        throw std::runtime_error("override references unknown config key '" + key + "'");
      }
      node = &(*node)[part];
    }
    json value;
    try {
      value = json::parse(raw);
    } catch (const json::exception&) {
      value = raw;  // bare strings (e.g. layout names) need no quotes
    }
    *node = value;
    echo.push_back(key + "=" + raw);
  }
  return echo;
}

ExperimentSpec spec_from_config(const json& config) {
  ExperimentSpec spec;
  const json& sc = config.at("scenario");
  const std::string layout = sc.at("layout").get<std::string>();
  if (layout == "homogeneous_12") {
    spec.scenario_source = ScenarioSource::homogeneous_12;
  } else if (layout == "nonhomogeneous_12") {
    spec.scenario_source = ScenarioSource::nonhomogeneous_12;
  } else if (layout == "random") {
    spec.scenario_source = ScenarioSource::random_anchors;
  } else if (layout == "file") {
    spec.scenario_source = ScenarioSource::from_file;
    spec.scenario_path = sc.at("path").get<std::string>();
  } else if (layout == "inline") {
    spec.scenario_source = ScenarioSource::custom;
    spec.custom_scenario = sc.get<Scenario>();
    spec.custom_scenario.validate();
  } else {
    throw std::runtime_error("config: unknown scenario.layout '" + layout + "'");
  }
  spec.anchor_count = sc.at("anchor_count").get<int>();
  spec.region_min = Vec2(sc.at("region_min")[0].get<double>(), sc.at("region_min")[1].get<double>());
  spec.region_max = Vec2(sc.at("region_max")[0].get<double>(), sc.at("region_max")[1].get<double>());
  spec.tx_power_dbm = sc.at("tx_power_dbm").get<double>();
  spec.path_loss_exponent = sc.at("path_loss_exponent").get<double>();

  const json& tg = config.at("target");
  const std::string mode = tg.at("mode").get<std::string>();
  if (mode == "fixed") {
    spec.target_source = TargetSource::fixed;
  } else if (mode == "uniform") {
    spec.target_source = TargetSource::uniform_in_region;
  } else {
    throw std::runtime_error("config: unknown target.mode '" + mode + "'");
  }
  spec.fixed_target = Vec2(tg.at("position")[0].get<double>(), tg.at("position")[1].get<double>());

  const json& ex = config.at("experiment");
  spec.runs = ex.at("runs").get<int>();
  spec.noise_levels = ex.at("noise_levels").get<std::vector<double>>();
  spec.algorithms = ex.at("algorithms").get<std::vector<std::string>>();
  spec.noise_enabled = ex.at("noise_enabled").get<bool>();
  spec.per_run_anchor_layouts = ex.at("per_run_anchor_layouts").get<bool>();

  spec.barprop = config.at("barprop").get<BarpropConfig>();
  spec.rmsprop = config.at("rmsprop").get<RmspropConfig>();
  spec.lm = config.at("lm").get<LmConfig>();
  spec.de = config.at("de").get<DeConfig>();
  spec.record_timing = config.at("report").at("timing").get<int>() != 0;
  return spec;
}

std::string report_csv(const std::vector<ExperimentReport>& reports,
                       const std::vector<std::string>& override_echo) {
  std::string out;
  for (const std::string& e : override_echo) out += "# " + e + "\n";
  out += "algorithm,sweep_value,rmse,crlb,mean_time_ms,mean_iters\n";
  for (const ExperimentReport& rep : reports) {
    for (const AlgorithmResult& r : rep.results) {
      out += r.algorithm + "," + num(rep.sweep_value) + "," + num(r.rmse) + "," +
             num(rep.crlb_ref) + "," + num(r.mean_time_ms) + "," + num(r.mean_iterations) + "\n";
    }
  }
  return out;
}

json report_json(const std::vector<ExperimentReport>& reports,
                 const std::vector<std::string>& override_echo, std::uint64_t master_seed) {
  json out;
  out["metadata"] = {{"master_seed", master_seed}, {"overrides", override_echo}};
  out["reports"] = json::array();
  for (const ExperimentReport& rep : reports) {
    json jr;
    jr["sweep_value"] = rep.sweep_value;
    jr["crlb"] = rep.crlb_ref;
    jr["runs"] = rep.runs;
    jr["algorithms"] = json::array();
    for (const AlgorithmResult& r : rep.results) {
      json ja;
      ja["algorithm"] = r.algorithm;
      ja["rmse"] = r.rmse;
      ja["mean_time_ms"] = r.mean_time_ms;
      ja["mean_iterations"] = r.mean_iterations;
      ja["error_samples"] = r.error_samples;
      json cdf = json::array();
      for (const auto& [e, p] : r.cdf) cdf.push_back(json::array({e, p}));
      ja["cdf"] = cdf;
      jr["algorithms"].push_back(std::move(ja));
    }
    out["reports"].push_back(std::move(jr));
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace rssloc
