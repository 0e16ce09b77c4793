#pragma once

#include <Eigen/Dense>
#include <functional>

#include "rssloc/model.hpp"

namespace rssloc {

enum class StopReason { tolerance, max_iters };

/// BARProp hyperparameters. Defaults are the values used throughout the
/// benchmark study; RMSProp differs only in the learning rate (0.25).
struct BarpropConfig {
  double learning_rate = 0.04;                  // mu
  Vec2 nominal_decay{0.92, 0.92};               // rho~ (lower limit of the adaptive decay)
  Vec2 stability_const{1e-7, 1e-7};             // delta
  int buffer_len = 4;                           // L
  double tol = 0.01;                            // epsilon, meters of displacement
  int max_iters = 800;                          // J
  int init_candidates = 64;                     // U
  double bound_perturb_lo = 0.0;                // alpha
  double bound_perturb_hi = 0.75;               // beta
  /// Differential-test mode: decay pinned to nominal_decay, buffer unused.
  /// In this mode the iterate sequence matches rmsprop_solve bit for bit.
  bool fixed_decay = false;

  void validate() const;
};

/// Evolving optimizer state. `buffer` holds the latest squared gradients,
/// one column per cyclic slot; `filled` counts how many slots have been
/// written so far (the adaptive decay engages once filled == buffer_len).
struct BarpropState {
  Vec2 position = Vec2::Zero();
  Vec2 smoothed = Vec2::Zero();      // c_j
  Eigen::Matrix2Xd buffer;           // B, 2 x L
  int filled = 0;
  int iter = 0;                      // j, completed iterations
  Vec2 decay = Vec2::Ones();         // rho_j of the last completed iteration
  bool converged = false;
  StopReason reason = StopReason::max_iters;
};

struct Estimate {
  Vec2 position = Vec2::Zero();
  int iterations = 0;
  StopReason reason = StopReason::max_iters;
  double elapsed_seconds = 0.0;
};

/// Draw U candidates uniformly in the region (two uniforms per candidate,
/// x then y) and return the one with minimal cost; ties break toward the
/// lowest candidate index.
Vec2 init_feasible(const Scenario& scenario, const Measurement& measurement,
                   int candidates, RandomStream& rng);

/// 1-based cyclic buffer index: l = j - L*floor((j-1)/L), j >= 1.
int buffer_index(int iter, int buffer_len);

/// Adaptive decay over a fully written buffer window. Per coordinate k:
///   q_k = max of row k, p_k = min of row k,
///   gamma_k = 1 - (q_k - p_k)/(q_k + 1),
///   rho_k = max(nominal_k, gamma_k).
Vec2 adaptive_decay(const Eigen::Ref<const Eigen::Matrix2Xd>& buffer, const Vec2& nominal);

/// Clamp x into the region, then nudge every clamped coordinate inward by
/// z*sgn(clamp(x)-x) with a single z ~ Uniform(lo, hi) drawn per call
/// (drawn unconditionally, so the stream advances by one uniform even for
/// interior points); the result is re-clamped. Interior coordinates pass
/// through unchanged.
Vec2 bound_project(const Vec2& x, const Scenario& scenario, double lo, double hi,
                   RandomStream& rng);

/// One full iteration: gradient at the current position, squared gradient
/// into the buffer slot buffer_index(j, L), adaptive decay (nominal while
/// the buffer is still filling), smoothed-term update, damped position
/// update, bounding projection. Sets converged when the post-bounding
/// displacement drops below tol. Throws std::runtime_error if the update
/// produces a non-finite position.
BarpropState step(const BarpropState& state, const Scenario& scenario,
                  const Measurement& measurement, const BarpropConfig& config,
                  RandomStream& rng);

using IterationObserver = std::function<void(const BarpropState&)>;

/// init_feasible, then iterate step() until convergence or max_iters.
/// The observer, when set, is invoked after every completed iteration.
Estimate solve(const Scenario& scenario, const Measurement& measurement,
               const BarpropConfig& config, RandomStream& rng,
               const IterationObserver& observer = {});

}  // namespace rssloc
