#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "rssloc/config_io.hpp"

using namespace rssloc;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("scenario serialization round-trips field for field") {
  Scenario s;
  s.region_min = {-5.0, 0.0};
  s.region_max = {56.0, 25.0};
  s.anchors = {{1.5, 2.25}, {55.0, 1.0}, {28.0, 24.0}};
  s.tx_power_dbm = -12.5;
  s.path_loss_exponent = 2.7;
  s.noise_std_db = {1.0, 2.0, 3.5};

  const json j = s;
  const Scenario back = j.get<Scenario>();
  CHECK(back.region_min == s.region_min);
  CHECK(back.region_max == s.region_max);
  REQUIRE(back.anchors.size() == s.anchors.size());
  for (std::size_t i = 0; i < s.anchors.size(); ++i) CHECK(back.anchors[i] == s.anchors[i]);
  CHECK(back.tx_power_dbm == s.tx_power_dbm);
  CHECK(back.path_loss_exponent == s.path_loss_exponent);
  CHECK(back.noise_std_db == s.noise_std_db);
}

TEST_CASE("scalar noise std broadcasts over anchors") {
  json j = json::parse(R"({
    "region_min": [0,0], "region_max": [40,40],
    "anchors": [[0,0],[40,0],[20,40]],
    "tx_power_dbm": -10, "path_loss_exponent": 3,
    "noise_std_db": 2.5
  })");
  const Scenario s = j.get<Scenario>();
  CHECK(s.noise_std_db == std::vector<double>{2.5, 2.5, 2.5});
}

TEST_CASE("scenario file save and load") {
  Scenario s;
  s.anchors = {{0, 0}, {40, 0}, {20, 40}};
  s.noise_std_db.assign(3, 3.0);
  const std::string path = temp_path("rssloc_scenario.json");
  save_scenario(path, s);
  const Scenario back = load_scenario(path);
  CHECK(back.anchors.size() == 3);
  CHECK(back.anchors[2] == Vec2(20.0, 40.0));
  std::filesystem::remove(path);
}

TEST_CASE("defaults carry the benchmark-study parameters") {
  const json config = default_config();
  const ExperimentSpec spec = spec_from_config(config);
  CHECK(spec.barprop.learning_rate == 0.04);
  CHECK(spec.barprop.nominal_decay == Vec2(0.92, 0.92));
  CHECK(spec.barprop.stability_const == Vec2(1e-7, 1e-7));
  CHECK(spec.barprop.buffer_len == 4);
  CHECK(spec.barprop.tol == 0.01);
  CHECK(spec.barprop.max_iters == 800);
  CHECK(spec.barprop.bound_perturb_lo == 0.0);
  CHECK(spec.barprop.bound_perturb_hi == 0.75);
  CHECK(spec.rmsprop.learning_rate == 0.25);
  CHECK(spec.de.population == 10);
  CHECK(spec.runs == 1000);
  CHECK(spec.noise_levels == std::vector<double>{1.0, 2.0, 3.0, 4.0, 5.0});
  CHECK(spec.tx_power_dbm == -10.0);
  CHECK(spec.path_loss_exponent == 3.0);
  CHECK(spec.scenario_source == ScenarioSource::homogeneous_12);
  CHECK(spec.target_source == TargetSource::uniform_in_region);
}

TEST_CASE("config files merge over defaults and reject unknown keys") {
  const std::string path = temp_path("rssloc_config.json");
  std::ofstream(path) << R"({"experiment": {"runs": 77}, "barprop": {"learning_rate": 0.1}})";
  const json config = load_config(path);
  const ExperimentSpec spec = spec_from_config(config);
  CHECK(spec.runs == 77);
  CHECK(spec.barprop.learning_rate == 0.1);
  CHECK(spec.rmsprop.learning_rate == 0.25);  // untouched default

  std::ofstream(path) << R"({"experiments": {"runs": 77}})";  // typo
  CHECK_THROWS_WITH_AS(static_cast<void>(load_config(path)),
                       doctest::Contains("experiments"), std::runtime_error);
  std::filesystem::remove(path);
}

TEST_CASE("overrides set dotted paths and echo their text") {
  json config = default_config();
  const auto echo = apply_overrides(
      config, {"experiment.runs=5", "barprop.tol=0.02", "scenario.layout=nonhomogeneous_12"});
  CHECK(config["experiment"]["runs"] == 5);
  CHECK(config["barprop"]["tol"] == 0.02);
  CHECK(config["scenario"]["layout"] == "nonhomogeneous_12");
  REQUIRE(echo.size() == 3);
  CHECK(echo[0] == "experiment.runs=5");

  CHECK_THROWS_WITH_AS(static_cast<void>(apply_overrides(config, {"barprop.rate=1"})),
                       doctest::Contains("barprop.rate"), std::runtime_error);
  CHECK_THROWS_WITH_AS(static_cast<void>(apply_overrides(config, {"no-equals"})),
                       doctest::Contains("key=value"), std::runtime_error);
}

TEST_CASE("spec_from_config handles every scenario layout") {
  json config = default_config();

  config["scenario"]["layout"] = "nonhomogeneous_12";
  CHECK(spec_from_config(config).scenario_source == ScenarioSource::nonhomogeneous_12);

  config["scenario"]["layout"] = "random";
  config["scenario"]["anchor_count"] = 18;
  const ExperimentSpec spec = spec_from_config(config);
  CHECK(spec.scenario_source == ScenarioSource::random_anchors);
  CHECK(spec.anchor_count == 18);

  config["scenario"]["layout"] = "inline";
  config["scenario"]["anchors"] = json::array({{0, 0}, {40, 0}, {20, 40}});
  config["scenario"]["noise_std_db"] = 3.0;
  const ExperimentSpec inline_spec = spec_from_config(config);
  CHECK(inline_spec.scenario_source == ScenarioSource::custom);
  CHECK(inline_spec.custom_scenario.anchors.size() == 3);

  config["scenario"]["layout"] = "octagon";
  CHECK_THROWS_WITH_AS(static_cast<void>(spec_from_config(config)),
                       doctest::Contains("octagon"), std::runtime_error);
}

TEST_CASE("csv report format and determinism") {
  ExperimentReport rep;
  rep.sweep_value = 3.0;
  rep.crlb_ref = 1.25;
  rep.runs = 2;
  AlgorithmResult r;
  r.algorithm = "barprop";
  r.rmse = 5.0;
  r.error_samples = {3.0, 4.0};
  r.cdf = {{3.0, 0.5}, {4.0, 1.0}};
  r.mean_time_ms = 0.0;
  r.mean_iterations = 42.5;
  rep.results.push_back(r);

  const std::string csv = report_csv({rep}, {"experiment.runs=2"});
  CHECK(csv == "# experiment.runs=2\n"
               "algorithm,sweep_value,rmse,crlb,mean_time_ms,mean_iters\n"
               "barprop,3,5,1.25,0,42.5\n");
  CHECK(report_csv({rep}, {"experiment.runs=2"}) == csv);
}

TEST_CASE("json report carries samples, cdf, and metadata") {
  ExperimentReport rep;
  rep.sweep_value = 2.0;
  rep.crlb_ref = 0.5;
  rep.runs = 2;
  AlgorithmResult r;
  r.algorithm = "lm";
  r.rmse = 1.0;
  r.error_samples = {1.0, 1.0};
  r.cdf = {{1.0, 0.5}, {1.0, 1.0}};
  rep.results.push_back(r);

  const json j = report_json({rep}, {"a=1"}, 42);
  CHECK(j["metadata"]["master_seed"] == 42);
  CHECK(j["metadata"]["overrides"][0] == "a=1");
  CHECK(j["reports"][0]["algorithms"][0]["algorithm"] == "lm");
  CHECK(j["reports"][0]["algorithms"][0]["error_samples"].size() == 2);
  CHECK(j["reports"][0]["algorithms"][0]["cdf"][1][1] == 1.0);
}

TEST_CASE("solver config serialization round-trips") {
  BarpropConfig bar;
  bar.learning_rate = 0.05;
  bar.buffer_len = 6;
  const BarpropConfig bar2 = json(bar).get<BarpropConfig>();
  CHECK(bar2.learning_rate == 0.05);
  CHECK(bar2.buffer_len == 6);
  CHECK(bar2.nominal_decay == bar.nominal_decay);

  DeConfig de;
  de.max_generations = 321;
  CHECK(json(de).get<DeConfig>().max_generations == 321);

  LmConfig lm;
  lm.initial_damping = 0.5;
  CHECK(json(lm).get<LmConfig>().initial_damping == 0.5);

  RmspropConfig rms;
  rms.tol = 0.25;
  CHECK(json(rms).get<RmspropConfig>().tol == 0.25);
}
