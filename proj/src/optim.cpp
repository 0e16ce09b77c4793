#include "rssloc/optim.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rssloc {

void BarpropConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("barprop: learning_rate must be > 0");
  for (int k = 0; k < 2; ++k) {
    if (!(nominal_decay[k] > 0.0 && nominal_decay[k] < 1.0)) {
      throw std::invalid_argument("barprop: nominal_decay components must lie in (0, 1)");
    }
    if (!(stability_const[k] > 0.0)) {
      throw std::invalid_argument("barprop: stability_const components must be > 0");
    }
  }
  if (buffer_len < 1) throw std::invalid_argument("barprop: buffer_len must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("barprop: tol must be > 0");
  if (max_iters < 1) throw std::invalid_argument("barprop: max_iters must be >= 1");
  if (init_candidates < 1) throw std::invalid_argument("barprop: init_candidates must be >= 1");
  if (!(bound_perturb_lo >= 0.0 && bound_perturb_lo < bound_perturb_hi)) {
    throw std::invalid_argument("barprop: bound perturbation needs 0 <= lo < hi");
  }
}

Vec2 init_feasible(const Scenario& scenario, const Measurement& measurement,
                   int candidates, RandomStream& rng) {
  Vec2 best = Vec2::Zero();
  double best_cost = std::numeric_limits<double>::infinity();
  const Vec2 span = scenario.region_max - scenario.region_min;
  for (int u = 0; u < candidates; ++u) {
    Vec2 cand;
    cand.x() = scenario.region_min.x() + span.x() * rng.uniform01();
    cand.y() = scenario.region_min.y() + span.y() * rng.uniform01();
    double f;
    Vec2 g;
    cost_value_gradient(scenario, measurement, cand, f, g);
    if (f < best_cost) {
      best_cost = f;
      best = cand;
    }
  }
  return best;
}

int buffer_index(int iter, int buffer_len) {
  return iter - buffer_len * ((iter - 1) / buffer_len);
}

Vec2 adaptive_decay(const Eigen::Ref<const Eigen::Matrix2Xd>& buffer, const Vec2& nominal) {
  Vec2 rho;
  for (int k = 0; k < 2; ++k) {
    const double q = buffer.row(k).maxCoeff();
    const double p = buffer.row(k).minCoeff();
    const double gamma = 1.0 - (q - p) / (q + 1.0);
    rho[k] = std::max(nominal[k], gamma);
  }
  return rho;
}

Vec2 bound_project(const Vec2& x, const Scenario& scenario, double lo, double hi,
                   RandomStream& rng) {
  const double z = rng.uniform(lo, hi);
  Vec2 out;
  for (int k = 0; k < 2; ++k) {
    const double y = std::clamp(x[k], scenario.region_min[k], scenario.region_max[k]);
    const double sign = (y > x[k]) ? 1.0 : (y < x[k]) ? -1.0 : 0.0;
    out[k] = std::clamp(y + z * sign, scenario.region_min[k], scenario.region_max[k]);
  }
  return out;
}

BarpropState step(const BarpropState& state, const Scenario& scenario,
                  const Measurement& measurement, const BarpropConfig& config,
                  RandomStream& rng) {
  BarpropState next = state;
  const int j = state.iter + 1;

  double value;
  Vec2 g;
  cost_value_gradient(scenario, measurement, state.position, value, g);
  const Vec2 sq = g.cwiseProduct(g);

  if (config.fixed_decay) {
    next.decay = config.nominal_decay;
  } else {
    if (next.buffer.cols() != config.buffer_len) {
      next.buffer = Eigen::Matrix2Xd::Zero(2, config.buffer_len);
      next.filled = 0;
    }
    const int slot = buffer_index(j, config.buffer_len);
    next.buffer.col(slot - 1) = sq;
    if (next.filled < config.buffer_len) ++next.filled;
    // Adaptive rule needs a full window; nominal decay while it fills.
    next.decay = (next.filled >= config.buffer_len)
                     ? adaptive_decay(next.buffer, config.nominal_decay)
                     : config.nominal_decay;
  }

  next.smoothed = next.decay.cwiseProduct(state.smoothed) +
                  (Vec2::Ones() - next.decay).cwiseProduct(sq);

  const Vec2 denom = config.stability_const + next.smoothed.cwiseSqrt();
  Vec2 proposed = state.position - config.learning_rate * g.cwiseQuotient(denom);
  if (!proposed.allFinite()) {
    throw std::runtime_error("barprop: non-finite position update at iteration " +
                             std::to_string(j) + " (gradient " + std::to_string(g.x()) + "," +
                             std::to_string(g.y()) + ")");
  }
  next.position = bound_project(proposed, scenario, config.bound_perturb_lo,
                                config.bound_perturb_hi, rng);
  next.iter = j;

  const double displacement = (next.position - state.position).norm();
  if (displacement < config.tol) {
    next.converged = true;
    next.reason = StopReason::tolerance;
  }
  return next;
}

Estimate solve(const Scenario& scenario, const Measurement& measurement,
               const BarpropConfig& config, RandomStream& rng,
               const IterationObserver& observer) {
  config.validate();
  scenario.validate();
  const auto t0 = std::chrono::steady_clock::now();

  BarpropState state;
  state.position = init_feasible(scenario, measurement, config.init_candidates, rng);
  state.buffer = Eigen::Matrix2Xd::Zero(2, config.buffer_len);

  while (state.iter < config.max_iters) {
    state = step(state, scenario, measurement, config, rng);
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

}  // namespace rssloc
