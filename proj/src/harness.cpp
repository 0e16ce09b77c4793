#include "rssloc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "rssloc/config_io.hpp"

namespace rssloc {

namespace {

// Stream salts; run/layout streams are algorithm-independent so adding an
// algorithm never perturbs another's inputs.
constexpr std::uint64_t kSaltRun = 0x52554e;       // target + measurement noise
constexpr std::uint64_t kSaltLayout = 0x4c41594f;  // random anchor layouts

std::uint64_t algorithm_salt(const std::string& name) {
  // FNV-1a, so the salt depends only on the algorithm name.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

bool layout_degenerate(const std::vector<Vec2>& anchors) {
  Vec2 lo = anchors.front(), hi = anchors.front();
  for (const Vec2& a : anchors) {
    lo = lo.cwiseMin(a);
    hi = hi.cwiseMax(a);
  }
  if ((hi - lo).norm() < 1.0) return true;  // clustered within 1 m
  double max_area = 0.0;
  const Vec2 base = anchors[1] - anchors[0];
  for (std::size_t i = 2; i < anchors.size(); ++i) {
    const Vec2 v = anchors[i] - anchors[0];
    max_area = std::max(max_area, std::abs(base.x() * v.y() - base.y() * v.x()));
  }
  return max_area < 1e-6;  // collinear
}

std::vector<Vec2> draw_layout(int count, const Vec2& lo, const Vec2& hi, RandomStream& rng) {
  std::vector<Vec2> anchors(static_cast<std::size_t>(count));
  do {
    for (Vec2& a : anchors) {
      a.x() = lo.x() + (hi.x() - lo.x()) * rng.uniform01();
      a.y() = lo.y() + (hi.y() - lo.y()) * rng.uniform01();
    }
  } while (layout_degenerate(anchors));
  return anchors;
}

}  // namespace

Vec2 draw_run_target(const Scenario& scenario, RandomStream& rng) {
  const Vec2 lo = scenario.region_min + Vec2(1.0, 1.0);
  const Vec2 hi = scenario.region_max - Vec2(1.0, 1.0);
  while (true) {
    Vec2 t;
    t.x() = lo.x() + (hi.x() - lo.x()) * rng.uniform01();
    t.y() = lo.y() + (hi.y() - lo.y()) * rng.uniform01();
    bool clear = true;
    for (const Vec2& a : scenario.anchors) {
      if ((t - a).norm() < kMinAnchorDistance) {
        clear = false;
        break;
      }
    }
    if (clear) return t;
  }
}

namespace {

struct RunRecord {
  double error = 0.0;
  double time_ms = 0.0;
  double iterations = 0.0;
};

AlgorithmResult reduce_algorithm(const std::string& name, std::vector<RunRecord>&& rows,
                                 bool record_timing) {
  AlgorithmResult result;
  result.algorithm = name;
  const std::size_t m = rows.size();
  result.error_samples.reserve(m);
  double time_sum = 0.0, iter_sum = 0.0;
  for (const RunRecord& r : rows) {
    result.error_samples.push_back(r.error);
    time_sum += r.time_ms;
    iter_sum += r.iterations;
  }
  result.rmse = rmse(result.error_samples);
  result.mean_time_ms = record_timing ? time_sum / static_cast<double>(m) : 0.0;
  result.mean_iterations = iter_sum / static_cast<double>(m);

  std::vector<double> sorted = result.error_samples;
  std::sort(sorted.begin(), sorted.end());
  result.cdf.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    result.cdf.emplace_back(sorted[i], static_cast<double>(i + 1) / static_cast<double>(m));
  }
  return result;
}

ExperimentReport aggregate(const ExperimentSpec& spec,
                           std::vector<std::vector<RunRecord>>&& per_algorithm,
                           std::vector<double>&& crlb_samples) {
  ExperimentReport report;
  report.runs = static_cast<int>(crlb_samples.size());
  report.crlb_ref = std::accumulate(crlb_samples.begin(), crlb_samples.end(), 0.0) /
                    static_cast<double>(crlb_samples.size());
  for (std::size_t a = 0; a < spec.algorithms.size(); ++a) {
    report.results.push_back(
        reduce_algorithm(spec.algorithms[a], std::move(per_algorithm[a]), spec.record_timing));
  }
  return report;
}

/// Runs `body(m)` for m in [0, runs) on `workers` threads.
void parallel_for_runs(int runs, int workers, const std::function<void(int)>& body) {
  if (workers <= 1) {
    for (int m = 0; m < runs; ++m) body(m);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    int m;
    while ((m = next.fetch_add(1)) < runs) {
      try {
        body(m);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int n = std::min(workers, runs);
  pool.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

void ExperimentSpec::validate() const {
  if (runs < 1) throw std::invalid_argument("experiment: runs must be >= 1");
  if (noise_levels.empty()) throw std::invalid_argument("experiment: at least one noise level");
  for (double s : noise_levels) {
    if (!(s > 0.0)) throw std::invalid_argument("experiment: noise levels must be > 0");
  }
  if (algorithms.empty()) throw std::invalid_argument("experiment: at least one algorithm");
  const auto& known = registered_algorithms();
  for (const auto& a : algorithms) {
    if (std::find(known.begin(), known.end(), a) == known.end()) {
      throw std::invalid_argument("experiment: unknown algorithm id '" + a + "'");
    }
  }
  if (workers < 1) throw std::invalid_argument("experiment: workers must be >= 1");
  if (scenario_source == ScenarioSource::random_anchors && anchor_count < 1) {
    throw std::invalid_argument("experiment: anchor_count must be >= 1");
  }
}

double rmse(const std::vector<double>& errors) {
  double sq = 0.0;
  for (double e : errors) sq += e * e;
  return std::sqrt(sq / static_cast<double>(errors.size()));
}

std::vector<Vec2> builtin_layout(const std::string& name) {
  if (name == "homogeneous_12") {
    return {{40, 40}, {40, 0}, {0, 40}, {0, 0},   {40, 20}, {20, 40},
            {0, 20},  {20, 0}, {10, 10}, {10, 30}, {30, 30}, {30, 10}};
  }
  if (name == "nonhomogeneous_12") {
    return {{32, 4}, {40, 2}, {6, 14}, {1, 1},   {38, 12}, {20, 11},
            {3, 10}, {12, 8}, {7, 7},  {10, 13}, {25, 3},  {37, 6}};
  }
  throw std::invalid_argument("unknown builtin layout: " + name);
}

const std::vector<std::string>& registered_algorithms() {
  static const std::vector<std::string> names{"barprop", "rmsprop", "lm", "de"};
  return names;
}

std::uint64_t run_stream_seed(std::uint64_t master_seed, int run_index) {
  return mix_seed(master_seed, kSaltRun, static_cast<std::uint64_t>(run_index));
}

std::uint64_t algorithm_stream_seed(std::uint64_t master_seed, const std::string& algorithm,
                                    int run_index) {
  return mix_seed(master_seed, algorithm_salt(algorithm), static_cast<std::uint64_t>(run_index));
}

Estimate run_algorithm(const std::string& algorithm, const ExperimentSpec& spec,
                       const Scenario& scenario, const Measurement& measurement,
                       const Vec2& true_position, RandomStream& rng) {
  if (algorithm == "barprop") return solve(scenario, measurement, spec.barprop, rng);
  if (algorithm == "rmsprop") return rmsprop_solve(scenario, measurement, spec.rmsprop, rng);
  if (algorithm == "lm") return lm_solve(scenario, measurement, true_position, spec.lm);
  if (algorithm == "de") return de_solve(scenario, measurement, spec.de, rng);
  throw std::invalid_argument("unknown algorithm id: " + algorithm);
}

Scenario make_scenario(const ExperimentSpec& spec, double noise_level) {
  Scenario s;
  s.tx_power_dbm = spec.tx_power_dbm;
  s.path_loss_exponent = spec.path_loss_exponent;
  switch (spec.scenario_source) {
    case ScenarioSource::homogeneous_12:
      s.anchors = builtin_layout("homogeneous_12");
      s.region_min = {0.0, 0.0};
      s.region_max = {40.0, 40.0};
      break;
    case ScenarioSource::nonhomogeneous_12:
      s.anchors = builtin_layout("nonhomogeneous_12");
      s.region_min = {0.0, 0.0};
      s.region_max = {40.0, 40.0};
      break;
    case ScenarioSource::random_anchors: {
      s.region_min = spec.region_min;
      s.region_max = spec.region_max;
      RandomStream layout_rng(
          mix_seed(spec.master_seed, kSaltLayout, static_cast<std::uint64_t>(spec.anchor_count)));
      s.anchors = draw_layout(spec.anchor_count, s.region_min, s.region_max, layout_rng);
      break;
    }
    case ScenarioSource::from_file:
      s = load_scenario(spec.scenario_path);
      break;
    case ScenarioSource::custom:
      s = spec.custom_scenario;
      break;
  }
  // Experiment noise levels define both the generated shadowing and the
  // cost weights, uniformly across anchors.
  s.noise_std_db.assign(s.anchors.size(), noise_level);
  s.validate();
  return s;
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const double sigma = spec.noise_levels.front();
  const Scenario base_scenario = make_scenario(spec, sigma);

  const std::size_t n_alg = spec.algorithms.size();
  std::vector<std::vector<RunRecord>> per_algorithm(n_alg);
  for (auto& v : per_algorithm) v.resize(static_cast<std::size_t>(spec.runs));
  std::vector<double> crlb_samples(static_cast<std::size_t>(spec.runs));

  parallel_for_runs(spec.runs, spec.workers, [&](int m) {
    RandomStream run_rng(mix_seed(spec.master_seed, kSaltRun, static_cast<std::uint64_t>(m)));
    Scenario scenario = base_scenario;
    if (spec.scenario_source == ScenarioSource::random_anchors && spec.per_run_anchor_layouts) {
      scenario.anchors = draw_layout(spec.anchor_count, scenario.region_min,
                                     scenario.region_max, run_rng);
      scenario.noise_std_db.assign(scenario.anchors.size(), sigma);
    }
    const Vec2 target = (spec.target_source == TargetSource::fixed)
                            ? spec.fixed_target
                            : draw_run_target(scenario, run_rng);
    const Measurement measurement = generate_rss(scenario, target, run_rng, spec.noise_enabled);
    crlb_samples[static_cast<std::size_t>(m)] = crlb(scenario, target);

    for (std::size_t a = 0; a < n_alg; ++a) {
      RandomStream alg_rng(mix_seed(spec.master_seed, algorithm_salt(spec.algorithms[a]),
                                    static_cast<std::uint64_t>(m)));
      const Estimate est =
          run_algorithm(spec.algorithms[a], spec, scenario, measurement, target, alg_rng);
      RunRecord& row = per_algorithm[a][static_cast<std::size_t>(m)];
      row.error = (est.position - target).norm();
      row.time_ms = est.elapsed_seconds * 1e3;
      row.iterations = static_cast<double>(est.iterations);
    }
  });

  ExperimentReport report = aggregate(spec, std::move(per_algorithm), std::move(crlb_samples));
  report.sweep_value = sigma;
  return report;
}

std::vector<ExperimentReport> noise_sweep(const ExperimentSpec& spec,
                                          const std::vector<double>& levels) {
  std::vector<ExperimentReport> reports;
  reports.reserve(levels.size());
  for (double sigma : levels) {
    ExperimentSpec one = spec;
    one.noise_levels = {sigma};
    reports.push_back(run_experiment(one));
  }
  return reports;
}

std::vector<ExperimentReport> anchor_count_sweep(const ExperimentSpec& spec,
                                                 const std::vector<int>& counts) {
  std::vector<ExperimentReport> reports;
  reports.reserve(counts.size());
  for (int n : counts) {
    if (n < 1) throw std::invalid_argument("anchor_count_sweep: counts must be positive");
    ExperimentSpec one = spec;
    one.scenario_source = ScenarioSource::random_anchors;
    one.anchor_count = n;
    ExperimentReport r = run_experiment(one);
    r.sweep_value = static_cast<double>(n);
    reports.push_back(std::move(r));
  }
  return reports;
}

std::vector<std::pair<Measurement, Vec2>> ingest_measurements(const std::string& path,
                                                              const Scenario& scenario) {
  scenario.validate();
  std::ifstream in(path);
  if (!in) throw std::runtime_error("ingest: cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("ingest: empty file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) header.push_back(field);
  }
  const std::size_t n_anchors = scenario.anchor_count();
  std::vector<std::string> expected{"x1", "x2"};
  for (std::size_t n = 1; n <= n_anchors; ++n) expected.push_back("rss_" + std::to_string(n));
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i >= header.size() || header[i] != expected[i]) {
      throw std::runtime_error("ingest: line 1: missing or misnamed column '" + expected[i] +
                               "'" + (i < header.size() ? " (found '" + header[i] + "')" : ""));
    }
  }
  if (header.size() != expected.size()) {
    throw std::runtime_error("ingest: line 1: expected " + std::to_string(expected.size()) +
                             " columns for " + std::to_string(n_anchors) + " anchors, found " +
                             std::to_string(header.size()));
  }

  std::vector<std::pair<Measurement, Vec2>> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<double> values;
    while (std::getline(ss, field, ',')) {
      try {
        std::size_t pos = 0;
        const double v = std::stod(field, &pos);
        if (pos != field.size()) throw std::invalid_argument(field);
        values.push_back(v);
      } catch (const std::exception&) {
        throw std::runtime_error("ingest: line " + std::to_string(line_no) +
                                 ": cannot parse value '" + field + "' in column '" +
                                 expected[std::min(values.size(), expected.size() - 1)] + "'");
      }
    }
    if (values.size() != expected.size()) {
      throw std::runtime_error("ingest: line " + std::to_string(line_no) + ": expected " +
                               std::to_string(expected.size()) + " values, found " +
                               std::to_string(values.size()));
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values[i])) {
        throw std::runtime_error("ingest: line " + std::to_string(line_no) +
                                 ": non-finite value in column '" + expected[i] + "'");
      }
    }
    Measurement meas;
    meas.rss_dbm.assign(values.begin() + 2, values.end());
    meas.noise_std_db = scenario.noise_std_db;
    records.emplace_back(std::move(meas), Vec2(values[0], values[1]));
  }
  return records;
}

ExperimentReport run_records(const ExperimentSpec& spec, const Scenario& scenario,
                             const std::vector<std::pair<Measurement, Vec2>>& records) {
  spec.validate();
  scenario.validate();
  if (records.empty()) throw std::invalid_argument("run_records: no records");

  const int runs = static_cast<int>(records.size());
  const std::size_t n_alg = spec.algorithms.size();
  std::vector<std::vector<RunRecord>> per_algorithm(n_alg);
  for (auto& v : per_algorithm) v.resize(static_cast<std::size_t>(runs));
  std::vector<double> crlb_samples(static_cast<std::size_t>(runs));

  parallel_for_runs(runs, spec.workers, [&](int m) {
    const auto& [measurement, target] = records[static_cast<std::size_t>(m)];
    crlb_samples[static_cast<std::size_t>(m)] = crlb(scenario, target);
    for (std::size_t a = 0; a < n_alg; ++a) {
      RandomStream alg_rng(mix_seed(spec.master_seed, algorithm_salt(spec.algorithms[a]),
                                    static_cast<std::uint64_t>(m)));
      const Estimate est =
          run_algorithm(spec.algorithms[a], spec, scenario, measurement, target, alg_rng);
      RunRecord& row = per_algorithm[a][static_cast<std::size_t>(m)];
      row.error = (est.position - target).norm();
      row.time_ms = est.elapsed_seconds * 1e3;
      row.iterations = static_cast<double>(est.iterations);
    }
  });

  ExperimentReport report = aggregate(spec, std::move(per_algorithm), std::move(crlb_samples));
  report.sweep_value = scenario.noise_std_db.front();
  return report;
}

}  // namespace rssloc
