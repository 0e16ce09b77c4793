#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rssloc/baselines.hpp"
#include "rssloc/optim.hpp"

namespace rssloc {

enum class ScenarioSource { homogeneous_12, nonhomogeneous_12, random_anchors, from_file, custom };
enum class TargetSource { fixed, uniform_in_region };

/// Monte Carlo experiment description. A single run_experiment call uses
/// noise_levels.front(); the sweep drivers fan out over levels or counts.
struct ExperimentSpec {
  ScenarioSource scenario_source = ScenarioSource::homogeneous_12;
  int anchor_count = 12;        // random_anchors only
  std::string scenario_path;    // from_file only
  Scenario custom_scenario;     // custom only
  Vec2 region_min{0.0, 0.0};    // random_anchors region
  Vec2 region_max{40.0, 40.0};
  double tx_power_dbm = -10.0;
  double path_loss_exponent = 3.0;

  TargetSource target_source = TargetSource::uniform_in_region;
  Vec2 fixed_target{20.0, 20.0};

  std::vector<double> noise_levels{3.0};
  bool noise_enabled = true;    // false: noiseless measurements, sigma kept as weights
  int runs = 1000;              // M
  std::vector<std::string> algorithms{"barprop", "rmsprop", "lm", "de"};
  std::uint64_t master_seed = 1;
  int workers = 1;
  /// Random anchor layouts are fixed per (master_seed, N) by default; with
  /// this flag每 run draws its own layout from the run stream.
  bool per_run_anchor_layouts = false;
  bool record_timing = true;    // false: timing fields zeroed (reproducible artifacts)

  BarpropConfig barprop;
  RmspropConfig rmsprop;
  LmConfig lm;
  DeConfig de;

  void validate() const;
};

struct AlgorithmResult {
  std::string algorithm;
  double rmse = 0.0;
  std::vector<double> error_samples;               // Euclidean errors, meters, per run
  std::vector<std::pair<double, double>> cdf;      // (error, probability), non-decreasing
  double mean_time_ms = 0.0;
  double mean_iterations = 0.0;
};

struct ExperimentReport {
  double sweep_value = 0.0;   // noise sigma or anchor count, set by the driver
  double crlb_ref = 0.0;      // CRLB at the fixed target, or mean over sampled targets
  int runs = 0;
  std::vector<AlgorithmResult> results;
};

/// Root mean squared error over Euclidean error samples.
double rmse(const std::vector<double>& errors);

/// The two 12-anchor reference layouts (region [0,40] x [0,40]).
std::vector<Vec2> builtin_layout(const std::string& name);

/// Names accepted by ExperimentSpec::algorithms.
const std::vector<std::string>& registered_algorithms();

/// Seed of the algorithm-independent per-run stream (target draw, noise).
std::uint64_t run_stream_seed(std::uint64_t master_seed, int run_index);

/// Seed of one algorithm's solver stream for one run; depends only on
/// (master seed, algorithm name, run index).
std::uint64_t algorithm_stream_seed(std::uint64_t master_seed, const std::string& algorithm,
                                    int run_index);

/// Invoke one registered algorithm (lm starts from true_position).
Estimate run_algorithm(const std::string& algorithm, const ExperimentSpec& spec,
                       const Scenario& scenario, const Measurement& measurement,
                       const Vec2& true_position, RandomStream& rng);

/// Random-target draw used by runs: uniform with a 1 m margin from the
/// region edges, re-drawn while within kMinAnchorDistance of an anchor.
Vec2 draw_run_target(const Scenario& scenario, RandomStream& rng);

/// Build the scenario a spec describes at one noise level. Random layouts
/// are drawn from a stream keyed by (master_seed, anchor_count) and
/// re-drawn while degenerate (all anchors within 1 m, or collinear).
Scenario make_scenario(const ExperimentSpec& spec, double noise_level);

/// Run M Monte Carlo runs at noise_levels.front(). Per run m: derive the
/// run stream from (master_seed, m), draw the target (1 m edge margin,
/// clear of anchors), generate one measurement, hand the same measurement
/// to every algorithm (each on its own (master_seed, algorithm, m) stream;
/// lm starts from the true position). Aggregation is order-independent, so
/// the report does not depend on the worker count.
ExperimentReport run_experiment(const ExperimentSpec& spec);

/// run_experiment once per noise level; sweep_value = sigma.
std::vector<ExperimentReport> noise_sweep(const ExperimentSpec& spec,
                                          const std::vector<double>& levels);

/// run_experiment once per anchor count (random layouts); sweep_value = N.
std::vector<ExperimentReport> anchor_count_sweep(const ExperimentSpec& spec,
                                                 const std::vector<int>& counts);

/// Parse a measurement CSV (header `x1,x2,rss_1,...,rss_N`) into records of
/// (measurement, true position). Noise stds are taken from the scenario,
/// whose anchor count must match N. Schema violations report the line
/// number and offending column.
std::vector<std::pair<Measurement, Vec2>> ingest_measurements(const std::string& path,
                                                              const Scenario& scenario);

/// Run every ingested record through the spec's algorithms (one record =
/// one trial) and aggregate exactly like run_experiment.
ExperimentReport run_records(const ExperimentSpec& spec, const Scenario& scenario,
                             const std::vector<std::pair<Measurement, Vec2>>& records);

}  // namespace rssloc
