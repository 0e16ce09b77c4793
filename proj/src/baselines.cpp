#include "rssloc/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace rssloc {

namespace {
constexpr double kLn10 = 2.302585092994045684;
}

void RmspropConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("rmsprop: learning_rate must be > 0");
  for (int k = 0; k < 2; ++k) {
    if (!(decay[k] > 0.0 && decay[k] < 1.0)) {
      throw std::invalid_argument("rmsprop: decay components must lie in (0, 1)");
    }
    if (!(stability_const[k] > 0.0)) {
      throw std::invalid_argument("rmsprop: stability_const components must be > 0");
    }
  }
  if (!(tol > 0.0)) throw std::invalid_argument("rmsprop: tol must be > 0");
  if (max_iters < 1) throw std::invalid_argument("rmsprop: max_iters must be >= 1");
  if (init_candidates < 1) throw std::invalid_argument("rmsprop: init_candidates must be >= 1");
  if (!(bound_perturb_lo >= 0.0 && bound_perturb_lo < bound_perturb_hi)) {
    throw std::invalid_argument("rmsprop: bound perturbation needs 0 <= lo < hi");
  }
}

Estimate rmsprop_solve(const Scenario& scenario, const Measurement& measurement,
                       const RmspropConfig& config, RandomStream& rng,
                       const IterationObserver& observer) {
  config.validate();
  scenario.validate();
  const auto t0 = std::chrono::steady_clock::now();

  BarpropState state;
  state.position = init_feasible(scenario, measurement, config.init_candidates, rng);
  state.decay = config.decay;

  while (state.iter < config.max_iters) {
    double value;
    Vec2 g;
    cost_value_gradient(scenario, measurement, state.position, value, g);
    const Vec2 sq = g.cwiseProduct(g);

    state.smoothed = config.decay.cwiseProduct(state.smoothed) +
                     (Vec2::Ones() - config.decay).cwiseProduct(sq);
    const Vec2 denom = config.stability_const + state.smoothed.cwiseSqrt();
    Vec2 proposed = state.position - config.learning_rate * g.cwiseQuotient(denom);
    if (!proposed.allFinite()) {
      throw std::runtime_error("rmsprop: non-finite position update at iteration " +
                               std::to_string(state.iter + 1));
    }
    const Vec2 prev = state.position;
    state.position = bound_project(proposed, scenario, config.bound_perturb_lo,
                                   config.bound_perturb_hi, rng);
    ++state.iter;
    if ((state.position - prev).norm() < config.tol) {
      state.converged = true;
      state.reason = StopReason::tolerance;
    }
    if (observer) observer(state);
    if (state.converged) break;
  }

  Estimate est;
  est.position = state.position;
  est.iterations = state.iter;
  est.reason = state.converged ? StopReason::tolerance : StopReason::max_iters;
  est.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return est;
}

void LmConfig::validate() const {
  if (!(initial_damping > 0.0)) throw std::invalid_argument("lm: initial_damping must be > 0");
  if (!(damping_up > 1.0)) throw std::invalid_argument("lm: damping_up must be > 1");
  if (!(damping_down > 0.0 && damping_down < 1.0)) {
    throw std::invalid_argument("lm: damping_down must lie in (0, 1)");
  }
  if (!(tol > 0.0)) throw std::invalid_argument("lm: tol must be > 0");
  if (max_iters < 1) throw std::invalid_argument("lm: max_iters must be >= 1");
}

namespace {

/// Weighted residuals r_n = h_n/sigma_n and Jacobian rows
/// (10*gamma/(sigma_n ln10)) * (x - s_n)^T / d_n^2.
void lm_residuals(const Scenario& scenario, const Measurement& measurement, const Vec2& x,
                  std::vector<double>& r, std::vector<Vec2>& jac, double& cost_value) {
  const double gamma = scenario.path_loss_exponent;
  const std::size_t n_anchors = scenario.anchor_count();
  r.resize(n_anchors);
  jac.resize(n_anchors);
  cost_value = 0.0;
  for (std::size_t n = 0; n < n_anchors; ++n) {
    const Vec2 dx = x - scenario.anchors[n];
    double d = dx.norm();
    if (d < kMinAnchorDistance) d = kMinAnchorDistance;
    const double sigma = measurement.noise_std_db[n];
    const double h = measurement.rss_dbm[n] - scenario.tx_power_dbm + 10.0 * gamma * std::log10(d);
    r[n] = h / sigma;
    jac[n] = (10.0 * gamma / (sigma * kLn10)) * dx / (d * d);
    cost_value += r[n] * r[n];
  }
}

}  // namespace

Estimate lm_solve(const Scenario& scenario, const Measurement& measurement,
                  const Vec2& start, const LmConfig& config) {
  config.validate();
  scenario.validate();
  if (!scenario.contains(start)) {
    throw std::invalid_argument("lm_solve: start must lie inside the region");
  }
  const auto t0 = std::chrono::steady_clock::now();

  Vec2 x = start;
  double damping = config.initial_damping;
  std::vector<double> r, r_trial;
  std::vector<Vec2> jac, jac_trial;
  double f;
  lm_residuals(scenario, measurement, x, r, jac, f);

  Estimate est;
  est.reason = StopReason::max_iters;
  int it = 0;
  while (it < config.max_iters) {
    ++it;
    Eigen::Matrix2d jtj = Eigen::Matrix2d::Zero();
    Vec2 jtr = Vec2::Zero();
    for (std::size_t n = 0; n < r.size(); ++n) {
      jtj += jac[n] * jac[n].transpose();
      jtr += jac[n] * r[n];
    }
    // Gradient of f = ||r||^2 is 2 J^T r.
    if ((2.0 * jtr).norm() < config.tol) {
      est.reason = StopReason::tolerance;
      break;
    }
    const Eigen::Matrix2d a = jtj + damping * Eigen::Matrix2d::Identity();
    const Vec2 delta = a.ldlt().solve(-jtr);
    if (!delta.allFinite()) {
      throw std::runtime_error("lm_solve: non-finite step at iteration " + std::to_string(it));
    }
    const Vec2 x_trial = x + delta;
    double f_trial;
    lm_residuals(scenario, measurement, x_trial, r_trial, jac_trial, f_trial);
    if (f_trial < f) {
      x = x_trial;
      f = f_trial;
      r.swap(r_trial);
      jac.swap(jac_trial);
      damping *= config.damping_down;
      if (delta.norm() < config.tol) {
        est.reason = StopReason::tolerance;
        break;
      }
    } else {
      damping *= config.damping_up;
    }
  }

  est.position = x;
  est.iterations = it;
  est.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return est;
}

void DeConfig::validate() const {
  if (population < 4) throw std::invalid_argument("de: population must be >= 4");
  if (max_generations < 1) throw std::invalid_argument("de: max_generations must be >= 1");
  if (!(crossover_rate > 0.0 && crossover_rate <= 1.0)) {
    throw std::invalid_argument("de: crossover_rate must lie in (0, 1]");
  }
  if (!(differential_weight > 0.0 && differential_weight <= 2.0)) {
    throw std::invalid_argument("de: differential_weight must lie in (0, 2]");
  }
  if (!(tol > 0.0)) throw std::invalid_argument("de: tol must be > 0");
}

Estimate de_solve(const Scenario& scenario, const Measurement& measurement,
                  const DeConfig& config, RandomStream& rng,
                  const GenerationObserver& observer) {
  config.validate();
  scenario.validate();
  const auto t0 = std::chrono::steady_clock::now();

  const std::size_t k_pop = static_cast<std::size_t>(config.population);
  const Vec2 span = scenario.region_max - scenario.region_min;
  std::vector<Vec2> pop(k_pop);
  std::vector<double> fitness(k_pop);
  for (std::size_t i = 0; i < k_pop; ++i) {
    pop[i].x() = scenario.region_min.x() + span.x() * rng.uniform01();
    pop[i].y() = scenario.region_min.y() + span.y() * rng.uniform01();
    Vec2 g;
    cost_value_gradient(scenario, measurement, pop[i], fitness[i], g);
  }

  Estimate est;
  est.reason = StopReason::max_iters;
  int gen = 0;
  while (gen < config.max_generations) {
    ++gen;
    for (std::size_t i = 0; i < k_pop; ++i) {
      std::size_t a = i, b = i, c = i;
      while (a == i) a = rng.index(k_pop);
      while (b == i || b == a) b = rng.index(k_pop);
      while (c == i || c == a || c == b) c = rng.index(k_pop);

      Vec2 mutant = pop[a] + config.differential_weight * (pop[b] - pop[c]);
      mutant.x() = std::clamp(mutant.x(), scenario.region_min.x(), scenario.region_max.x());
      mutant.y() = std::clamp(mutant.y(), scenario.region_min.y(), scenario.region_max.y());

      const std::size_t j_rand = rng.index(2);
      Vec2 trial = pop[i];
      for (std::size_t k = 0; k < 2; ++k) {
        if (k == j_rand || rng.uniform01() < config.crossover_rate) {
          trial[static_cast<int>(k)] = mutant[static_cast<int>(k)];
        }
      }
      double f_trial;
      Vec2 g;
      cost_value_gradient(scenario, measurement, trial, f_trial, g);
      if (f_trial <= fitness[i]) {
        pop[i] = trial;
        fitness[i] = f_trial;
      }
    }
    if (observer) {
      observer(gen, *std::min_element(fitness.begin(), fitness.end()));
    }
    Vec2 lo = pop[0], hi = pop[0];
    for (const Vec2& p : pop) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    if ((hi - lo).maxCoeff() < config.tol) {
      est.reason = StopReason::tolerance;
      break;
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < k_pop; ++i) {
    if (fitness[i] < fitness[best]) best = i;
  }
  est.position = pop[best];
  est.iterations = gen;
  est.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return est;
}

}  // namespace rssloc
