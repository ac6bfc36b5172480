#pragma once

#include <vector>

#include "dzgt/lower_solver.hpp"
#include "dzgt/network.hpp"
#include "dzgt/problem.hpp"
#include "dzgt/smoothing.hpp"

namespace dzgt {

/// Objective-evaluation settings for the trajectory record. Evaluation solves
/// the lower level to `inner_budget` SA steps at the network-mean iterate and
/// averages `samples` objective draws per agent. cadence c > 0 evaluates
/// epochs divisible by c plus the final epoch; c == 0 disables evaluation.
struct EvalSettings {
  int samples = 200;
  int cadence = 1;
  long inner_budget = 2000;
};

/// One distributed run's parameters.
struct RunConfig {
  double gamma = 1e-5;      // upper-level stepsize, > 0
  double eta = 0.1;         // smoothing radius, > 0
  long K = 100;             // outer epochs, >= 0
  InnerConfig inner;        // lower-level solver parameters
  std::uint64_t seed = 0;   // run seed; all streams derive from it
  double x0_scale = 1.0;    // initial iterates are x0_scale * N(0, I)
  bool warm_start = true;   // reuse previous inner solutions as starts
  EvalSettings eval;

  void validate() const;
};

/// Joint state of the m agents: iterate rows X, tracker rows Y, last sampled
/// gradients G_prev, and the per-agent warm starts for the two inner solves.
struct SwarmState {
  Matrix X, Y, G_prev;  // m x n
  Matrix Zx, Zxv;       // m x p
  long k = 0;           // current epoch
  long total_inner_steps = 0;
};

/// Relative residuals of the invariants the update must preserve: the tracker
/// mean equals the current gradient mean; the iterate mean moves by
/// -gamma * tracker mean; the tracker column sums match m times their mean.
struct StepDiagnostics {
  double tracking_residual = 0.0;
  double mean_update_residual = 0.0;
  double centering_residual = 0.0;
  long inner_steps = 0;
};

struct EpochMetrics {
  long epoch = 0;
  double consensus_violation = 0.0;  // sum_i ||x_i - x_bar||^2
  double tracker_dispersion = 0.0;   // sum_i ||y_i - y_bar||^2
  double objective_mean = 0.0;       // NaN when not evaluated this epoch
  double objective_se = 0.0;         // NaN when not evaluated this epoch
  long inner_steps = 0;              // lower-level iterations this epoch
  double tracking_residual = 0.0;
  double mean_update_residual = 0.0;
  double centering_residual = 0.0;
  Vector mean_iterate;               // x_bar at this epoch
  double wall_seconds = 0.0;
};

struct TrajectoryRecord {
  std::vector<EpochMetrics> epochs;  // size K + 1 (epoch 0 through K)
  long total_inner_steps = 0;
  double total_wall_seconds = 0.0;
};

double consensus_violation(const Matrix& rows);
double tracker_dispersion(const Matrix& rows);

/// Epoch-0 state: x_{i,0} = x0_scale * N(0, I) per agent, warm starts at the
/// origin, and trackers initialized to the first sampled gradients (y_{i,0} =
/// g_{i,0}), each from two budget(0)-step inner solves.
SwarmState init_swarm(const SmpecInstance& inst, const MixingMatrix& mix, const RunConfig& cfg);

/// One epoch k -> k+1:
///   X <- W X - gamma Y,  then per agent two inner solves and a two-point
///   gradient at the new iterate, then  Y <- W Y + G_new - G_old.
/// Raises NonFiniteIterateError if an iterate or tracker leaves the finite
/// range; returns the invariant residuals (recorded, never asserted here).
StepDiagnostics step(SwarmState& state, const SmpecInstance& inst, const MixingMatrix& mix,
                     const RunConfig& cfg);

/// Full trajectory with per-epoch metrics; K = 0 records only epoch 0.
TrajectoryRecord run(const SmpecInstance& inst, const MixingMatrix& mix, const RunConfig& cfg);

/// Mean and standard error of the implicit objective at x_bar: one
/// evaluation-grade inner solve shared by all agents, then per-agent noise
/// averaging. Deterministic given (run_seed, epoch).
McValue evaluate_objective(const SmpecInstance& inst, const Vector& x_bar,
                           const EvalSettings& eval, const InnerConfig& inner,
                           std::uint64_t run_seed, long epoch);

}  // namespace dzgt
