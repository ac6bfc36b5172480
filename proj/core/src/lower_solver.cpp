#include "dzgt/lower_solver.hpp"

#include <cmath>
#include <stdexcept>

namespace dzgt {

long default_budget_rule(long k) {
  if (k < 0) throw std::invalid_argument("default_budget_rule: negative epoch");
  return static_cast<long>(std::ceil(std::sqrt(static_cast<double>(k + 1))));
}

std::function<long(long)> fixed_budget_rule(long steps) {
  if (steps < 1) throw std::invalid_argument("fixed_budget_rule: steps must be >= 1");
  return [steps](long) { return steps; };
}

double InnerConfig::resolved_gamma_hat(double mu_F) const {
  return gamma_hat.value_or(1.0 / mu_F);
}

long InnerConfig::budget(long k) const {
  return budget_rule ? budget_rule(k) : default_budget_rule(k);
}

void InnerConfig::validate(double mu_F) const {
  if (!(mu_F > 0)) throw std::invalid_argument("InnerConfig: mu_F must be > 0");
  const double gh = resolved_gamma_hat(mu_F);
  if (!(gh > 1.0 / (2.0 * mu_F)))
    throw std::invalid_argument("InnerConfig: gamma_hat must exceed 1/(2 mu_F)");
  if (!(Gamma >= 0)) throw std::invalid_argument("InnerConfig: Gamma must be >= 0");
  if (residual_samples < 1)
    throw std::invalid_argument("InnerConfig: residual_samples must be >= 1");
}

double natural_residual(const SmpecInstance& inst, const Vector& x, const Vector& z, int draws,
                        Rng& rng) {
  const Vector F = mean_lower_map(inst, x, z, draws, rng);
  return (z - inst.feasible_set.project(x, z - F)).norm();
}

InnerSolveResult solve_inner(const SmpecInstance& inst, const Vector& x_hat, long k,
                             const InnerConfig& cfg, const Vector& z0, Rng& rng,
                             const StepObserver& observer) {
  cfg.validate(inst.mu_F);
  if (x_hat.size() != inst.n) throw std::invalid_argument("solve_inner: x_hat has wrong size");
  if (z0.size() != inst.p) throw std::invalid_argument("solve_inner: z0 has wrong size");
  const long budget = cfg.budget(k);
  if (budget < 1) throw std::invalid_argument("solve_inner: budget must be >= 1");

  const double gamma_hat = cfg.resolved_gamma_hat(inst.mu_F);

  // Fork the residual stream off one draw so the number of residual samples
  // does not shift the SA noise sequence.
  Rng residual_rng(splitmix64(rng()));

  Vector z = inst.feasible_set.project(x_hat, z0);
  const double res0 = natural_residual(inst, x_hat, z, cfg.residual_samples, residual_rng);
  if (observer) observer(0, z);

  double mean_sq_norm = 0.0;
  for (long t = 0; t < budget; ++t) {
    const double step = gamma_hat / (static_cast<double>(t) + 1.0 + cfg.Gamma);
    const Vector F = inst.lower_map(x_hat, z, inst.noise_zeta.draw(rng));
    mean_sq_norm += (F.squaredNorm() - mean_sq_norm) / (t + 1);
    z = inst.feasible_set.project(x_hat, z - step * F);
    if (!z.allFinite())
      throw NonFiniteIterateError("solve_inner: iterate diverged to non-finite values");
    if (observer) observer(t + 1, z);
  }

  InnerSolveResult out;
  out.z = z;
  out.iterations_used = budget;
  out.residual = natural_residual(inst, x_hat, z, cfg.residual_samples, residual_rng);

  const double D0 = (1.0 + inst.L_F) / inst.mu_F * res0;
  const double nu = std::max((cfg.Gamma + 1.0) * D0 * D0,
                             gamma_hat * gamma_hat * mean_sq_norm /
                                 (2.0 * inst.mu_F * gamma_hat - 1.0));
  out.epsilon_estimate = nu / (static_cast<double>(budget) + cfg.Gamma + 1.0);
  return out;
}

}  // namespace dzgt
