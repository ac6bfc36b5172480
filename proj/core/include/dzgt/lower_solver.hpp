#pragma once

#include <functional>
#include <optional>

#include "dzgt/problem.hpp"

namespace dzgt {

/// Parameters of the inexact lower-level solver (projected stochastic
/// approximation on the strongly monotone VI of the mean lower map).
struct InnerConfig {
  /// Base stepsize gamma_hat; must exceed 1/(2 mu_F). Unset selects 1/mu_F.
  std::optional<double> gamma_hat;
  /// Stepsize shift: step at inner iteration t is gamma_hat / (t + 1 + Gamma).
  double Gamma = 1.0;
  /// Iteration budget as a function of the outer epoch k; the default is
  /// ceil(sqrt(k + 1)), the schedule the convergence analysis assumes.
  std::function<long(long)> budget_rule;
  /// Samples per natural-residual estimate bracketing the solve (>= 1).
  int residual_samples = 8;

  double resolved_gamma_hat(double mu_F) const;
  long budget(long k) const;
  /// Throws std::invalid_argument on a stepsize or budget violation.
  void validate(double mu_F) const;
};

/// The default budget schedule: t_k = ceil(sqrt(k + 1)).
long default_budget_rule(long k);

/// Budget rule pinned to a constant count, e.g. for evaluation-grade solves.
std::function<long(long)> fixed_budget_rule(long steps);

struct InnerSolveResult {
  Vector z;                  // final iterate, feasible for Z(x_hat)
  long iterations_used = 0;  // equals the budget
  double residual = 0.0;     // sampled natural residual at z
  /// Estimated mean-square error bound E||z - z*||^2 <= nu / (t + Gamma + 1)
  /// with nu = max{(Gamma+1) D0^2, gamma_hat^2 M2 / (2 mu_F gamma_hat - 1)},
  /// D0 = (1 + L_F)/mu_F * (initial residual) and M2 the running mean of
  /// ||F~||^2 over the solve. An estimate, not a certified bound.
  double epsilon_estimate = 0.0;
};

/// Hook called as observer(t, z_t) with t = 0 for the projected start and
/// after every update; used by diagnostics and rate tests.
using StepObserver = std::function<void(long t, const Vector& z)>;

/// Runs budget(k) projected SA steps
///     z_{t+1} = P_{Z(x_hat)}[ z_t - gamma_hat_t F~(x_hat, z_t, zeta_t) ],
/// gamma_hat_t = gamma_hat / (t + 1 + Gamma), from the projected warm start z0.
/// All zeta draws come from `rng`; the residual estimates use a sub-stream
/// forked from one initial draw so the SA noise sequence is independent of
/// the residual sampling effort. Iterates are kept feasible by construction;
/// non-finite iterates raise NonFiniteIterateError.
InnerSolveResult solve_inner(const SmpecInstance& inst, const Vector& x_hat, long k,
                             const InnerConfig& cfg, const Vector& z0, Rng& rng,
                             const StepObserver& observer = nullptr);

/// Sampled natural-map residual || z - P_{Z(x)}[ z - F_N(x, z) ] || with F_N a
/// `draws`-sample mean of the lower map. Zero exactly at the VI solution when
/// the mean is exact.
double natural_residual(const SmpecInstance& inst, const Vector& x, const Vector& z, int draws,
                        Rng& rng);

}  // namespace dzgt
