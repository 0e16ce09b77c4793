// rssloc: RSS localization benchmark CLI.
//
// Subcommands run single solves, Monte Carlo experiments, noise/anchor
// sweeps, measurement-file ingestion and CRLB evaluation over a JSON config
// (all keys default to the benchmark-study parameters; --set key=value
// overrides win over the file). Exit codes: 0 ok, 2 config/usage error,
// 3 runtime abort, 4 I/O error.

#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "rssloc/config_io.hpp"

namespace {

using namespace rssloc;

struct CliOptions {
  std::string subcommand;
  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 1;
  int workers = 1;
  std::vector<std::string> sets;
};

Scenario scenario_for(const ExperimentSpec& spec) {
  return make_scenario(spec, spec.noise_levels.front());
}

void write_artifacts(const CliOptions& opt, const std::vector<ExperimentReport>& reports,
                     const std::vector<std::string>& echo) {
  if (opt.out_path.empty()) return;
  write_text_file(opt.out_path + ".csv", report_csv(reports, echo));
  write_text_file(opt.out_path + ".json", report_json(reports, echo, opt.seed).dump(2) + "\n");
}

int run_solve(const CliOptions& opt, const ExperimentSpec& spec,
              const std::vector<std::string>& echo) {
  const Scenario scenario = scenario_for(spec);
  RandomStream run_rng(run_stream_seed(spec.master_seed, 0));
  const Vec2 target = (spec.target_source == TargetSource::fixed)
                          ? spec.fixed_target
                          : draw_run_target(scenario, run_rng);
  const Measurement measurement = generate_rss(scenario, target, run_rng, spec.noise_enabled);

  json out;
  out["target"] = {target.x(), target.y()};
  out["estimates"] = json::array();
  for (const std::string& name : spec.algorithms) {
    RandomStream alg_rng(algorithm_stream_seed(spec.master_seed, name, 0));
    const Estimate est = run_algorithm(name, spec, scenario, measurement, target, alg_rng);
    std::printf("%s: position=(%.4f, %.4f) error=%.4f m iters=%d reason=%s time=%.3f ms\n",
                name.c_str(), est.position.x(), est.position.y(),
                (est.position - target).norm(), est.iterations,
                est.reason == StopReason::tolerance ? "tolerance" : "max_iters",
                spec.record_timing ? est.elapsed_seconds * 1e3 : 0.0);
    out["estimates"].push_back(
        {{"algorithm", name},
         {"position", {est.position.x(), est.position.y()}},
         {"error_m", (est.position - target).norm()},
         {"iterations", est.iterations},
         {"reason", est.reason == StopReason::tolerance ? "tolerance" : "max_iters"},
         {"time_ms", spec.record_timing ? est.elapsed_seconds * 1e3 : 0.0}});
  }
  for (const std::string& e : echo) out["overrides"].push_back(e);
  if (!opt.out_path.empty()) write_text_file(opt.out_path + ".json", out.dump(2) + "\n");
  return 0;
}

int run_experiment_cmd(const CliOptions& opt, const ExperimentSpec& spec,
                       const std::vector<std::string>& echo) {
  ExperimentReport report = run_experiment(spec);
  const AlgorithmResult& first = report.results.front();
  std::printf("runs=%d sigma=%g %s rmse=%.4f m (crlb %.4f m)\n", report.runs, report.sweep_value,
              first.algorithm.c_str(), first.rmse, report.crlb_ref);
  write_artifacts(opt, {report}, echo);
  return 0;
}

int run_sweep_noise(const CliOptions& opt, const ExperimentSpec& spec,
                    const std::vector<double>& levels, const std::vector<std::string>& echo) {
  const auto reports = noise_sweep(spec, levels);
  for (const ExperimentReport& r : reports) {
    std::printf("sigma=%g: %s rmse=%.4f m (crlb %.4f m)\n", r.sweep_value,
                r.results.front().algorithm.c_str(), r.results.front().rmse, r.crlb_ref);
  }
  write_artifacts(opt, reports, echo);
  return 0;
}

int run_sweep_anchors(const CliOptions& opt, const ExperimentSpec& spec,
                      const std::vector<int>& counts, const std::vector<std::string>& echo) {
  const auto reports = anchor_count_sweep(spec, counts);
  for (const ExperimentReport& r : reports) {
    std::printf("N=%g: %s rmse=%.4f m (crlb %.4f m)\n", r.sweep_value,
                r.results.front().algorithm.c_str(), r.results.front().rmse, r.crlb_ref);
  }
  write_artifacts(opt, reports, echo);
  return 0;
}

int run_ingest(const CliOptions& opt, const ExperimentSpec& spec, const std::string& data_path,
               const std::vector<std::string>& echo) {
  if (data_path.empty()) {
    std::cerr << "ingest: no measurement file (set ingest.path)\n";
    return 2;
  }
  const Scenario scenario = scenario_for(spec);
  const auto records = ingest_measurements(data_path, scenario);
  ExperimentReport report = run_records(spec, scenario, records);
  std::printf("records=%d %s rmse=%.4f m\n", report.runs, report.results.front().algorithm.c_str(),
              report.results.front().rmse);
  write_artifacts(opt, {report}, echo);
  return 0;
}

int run_crlb(const CliOptions& opt, const ExperimentSpec& spec,
             const std::vector<std::string>& echo) {
  const Scenario scenario = scenario_for(spec);
  const double bound = crlb(scenario, spec.fixed_target);
  std::printf("crlb at (%g, %g): %.6f m\n", spec.fixed_target.x(), spec.fixed_target.y(), bound);
  if (!opt.out_path.empty()) {
    json j{{"target", {spec.fixed_target.x(), spec.fixed_target.y()}}, {"crlb_m", bound}};
    for (const std::string& e : echo) j["overrides"].push_back(e);
    write_text_file(opt.out_path + ".json", j.dump(2) + "\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RSS-based localization benchmark (BARProp, RMSProp, LM, DE)"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  CliOptions opt;
  app.add_option("--config", opt.config_path, "JSON config file (defaults used when omitted)");
  app.add_option("--out", opt.out_path, "output basename; writes <out>.csv and <out>.json");
  app.add_option("--seed", opt.seed, "master seed");
  app.add_option("--workers", opt.workers, "worker threads for Monte Carlo runs");
  app.add_option("--set", opt.sets, "config override key=value (repeatable)");

  auto* solve_cmd = app.add_subcommand("solve", "one measurement, every configured algorithm");
  auto* experiment_cmd = app.add_subcommand("experiment", "Monte Carlo run at the first noise level");
  auto* sweep_noise_cmd = app.add_subcommand("sweep-noise", "experiment per noise level");
  auto* sweep_anchors_cmd = app.add_subcommand("sweep-anchors", "experiment per anchor count");
  auto* ingest_cmd = app.add_subcommand("ingest", "run algorithms over a measurement CSV");
  auto* crlb_cmd = app.add_subcommand("crlb", "CRLB at target.position");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    json config = load_config(opt.config_path);
    const std::vector<std::string> echo = apply_overrides(config, opt.sets);
    ExperimentSpec spec = spec_from_config(config);
    spec.master_seed = opt.seed;
    spec.workers = opt.workers;

    if (solve_cmd->parsed()) return run_solve(opt, spec, echo);
    if (experiment_cmd->parsed()) return run_experiment_cmd(opt, spec, echo);
    if (sweep_noise_cmd->parsed()) {
      return run_sweep_noise(opt, spec, config["experiment"]["noise_levels"].get<std::vector<double>>(), echo);
    }
    if (sweep_anchors_cmd->parsed()) {
      return run_sweep_anchors(opt, spec, config["experiment"]["anchor_counts"].get<std::vector<int>>(), echo);
    }
    if (ingest_cmd->parsed()) {
      return run_ingest(opt, spec, config["ingest"]["path"].get<std::string>(), echo);
    }
    if (crlb_cmd->parsed()) return run_crlb(opt, spec, echo);
    std::cerr << "no subcommand\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    std::cerr << "error: " << msg << "\n";
    if (msg.find("config") != std::string::npos || msg.find("override") != std::string::npos ||
        msg.find("scenario file") != std::string::npos) {
      return 2;
    }
    if (msg.find("cannot open") != std::string::npos ||
        msg.find("failed writing") != std::string::npos) {
      return 4;
    }
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
