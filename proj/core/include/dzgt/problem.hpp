#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "dzgt/feasible_set.hpp"
#include "dzgt/random.hpp"

namespace dzgt {

/// Sampled local objective h~_i(x, z, xi): one noisy function value.
using ObjectiveSampler = std::function<double(const Vector& x, const Vector& z, double xi)>;

/// Sampled lower-level map F~(x, z, zeta): one noisy operator evaluation.
using LowerMapSampler = std::function<Vector(const Vector& x, const Vector& z, double zeta)>;

/// One single-stage stochastic mathematical program with equilibrium
/// constraints (SMPEC) shared by m agents:
///
///   min_x  (1/m) sum_i E_xi[ h~_i(x, z(x), xi) ]
///   s.t.   z(x) solves the strongly monotone VI of E_zeta[ F~(x, ., zeta) ] on Z(x).
///
/// Function access is sample-based only (zeroth-order upper level, stochastic
/// lower-level map); mu_F / L_F are the monotonicity and Lipschitz moduli of
/// the mean lower map in z, and L0 / L0_tilde bound the implicit objective's
/// Lipschitz modulus in x and the objective's modulus in z (possibly numeric
/// estimates over a reference box).
struct SmpecInstance {
  int n = 0;  // upper-level dimension
  int p = 0;  // lower-level dimension
  int m = 0;  // number of agents

  std::vector<ObjectiveSampler> local_objectives;  // size m
  LowerMapSampler lower_map;
  FeasibleSet feasible_set;

  NoiseModel noise_xi = NoiseModel::normal(1.0, 0.1);
  NoiseModel noise_zeta = NoiseModel::normal(1.0, 0.1);

  double mu_F = 0.0;
  double L_F = 0.0;
  double L0 = 0.0;
  double L0_tilde = 0.0;

  /// Throws std::invalid_argument when sizes or moduli are inconsistent.
  void validate() const;
};

/// Numeric bounds on the two objective Lipschitz moduli, estimated by sampling.
struct LipschitzEstimate {
  double L0 = 0.0;        // x -> h~_i(x, z(x), xi), averaged over xi, max over i
  double L0_tilde = 0.0;  // z -> h~_i(x, z, xi), worst case over samples
};

/// Deterministic proxy solve of the lower level with noise frozen at its mean:
/// fixed-stepsize projected gradient with stepsize 2/(mu_F + L_F). Contracts
/// linearly with ratio (L_F - mu_F)/(L_F + mu_F); `iters` in the low hundreds
/// reaches machine precision for the shipped instances. Support routine for
/// constant estimation and evaluation oracles, not part of the algorithm.
Vector deterministic_lower_solve(const SmpecInstance& inst, const Vector& x, int iters = 200);

/// Samples difference quotients of the implicit objective over the box
/// [-box_radius, box_radius]^n (and of z-slices for L0_tilde) and returns
/// root-mean-square-over-noise / max-over-pairs bounds. Deterministic given
/// the seed. Used to populate SmpecInstance::L0 / L0_tilde for instances with
/// no closed form.
LipschitzEstimate estimate_lipschitz(const SmpecInstance& inst, double box_radius, int pairs,
                                     int noise_draws, std::uint64_t seed);

/// The two-dimensional bilevel benchmark used throughout the experiment
/// harness: every agent holds the same objective sample
///     h~(x, y, xi) = -x1^2 - 3 x2 - xi * y1 + y2^2,
/// the lower map sample is F~(x, y, zeta) = (2 y1, 2 y2 - zeta), and
///     Z(x) = { y >= 0,  -2 y1 + y2 >= -3 - x1^2 + 2 x1 - x2^2,
///              3 y1 - y2 >= 4 - x2 }.
/// mu_F = L_F = 2 exactly; L0 / L0_tilde are numeric estimates over the box
/// [-lipschitz_box, lipschitz_box]^2 (frozen internal probe seed).
SmpecInstance builtin_benchmark(int m, NoiseModel noise_xi = NoiseModel::normal(1.0, 0.1),
                                NoiseModel noise_zeta = NoiseModel::normal(1.0, 0.1),
                                double lipschitz_box = 2.0, int lipschitz_pairs = 64,
                                int lipschitz_draws = 32);

/// Synthetic strongly monotone quadratic family with closed forms for the
/// lower solution, the implicit objective, its gradient, and the smoothed
/// objective. Used as the ground-truth oracle family in tests:
///
///   F~(x, z, zeta) = A z + B x + b + (zeta - mean_zeta) * noise_dir,
///   h~_i(x, z, xi) = 0.5 x'P_i x + q_i'x + s_i'z + (xi - mean_xi) * t_i'x,
///
/// with A symmetric positive definite and Z = R^p, so z(x) = -A^{-1}(B x + b)
/// is affine, f is an explicit quadratic, the sphere-smoothed gradient equals
/// the true gradient, and f^eta = f + eta^2 tr(P_bar) / (2(n+2)).
struct SyntheticQuadratic {
  int n = 0, p = 0, m = 0;
  Matrix A, B;
  Vector b;
  std::vector<Matrix> P;
  std::vector<Vector> q, s, t;
  Vector noise_dir;  // unit vector multiplying the centered zeta noise
  NoiseModel noise_xi = NoiseModel::normal(0.0, 0.1);
  NoiseModel noise_zeta = NoiseModel::normal(0.0, 0.1);
  double mu_F = 0.0, L_F = 0.0;

  Vector solution(const Vector& x) const;       // z(x) = -A^{-1}(B x + b)
  double objective(const Vector& x) const;      // f(x)
  Vector gradient(const Vector& x) const;       // grad f(x) (= grad f^eta(x))
  double smoothed_objective(const Vector& x, double eta) const;

  /// Packages the family as a sample-access instance. L0 uses the closed-form
  /// bound max_i E[(D_i + |xi - mean| ||t_i||)^2]^{1/2} over the box
  /// [-box_radius, box_radius]^n; L0_tilde = max_i ||s_i|| exactly.
  SmpecInstance instance(double box_radius = 2.0) const;
};

/// Seeded generator for the synthetic family. A has spectrum in [1, 2]; the
/// P_i are SPD with spectrum in about [0.5, 1.75].
SyntheticQuadratic make_synthetic_quadratic(int n, int p, int m, std::uint64_t seed,
                                            NoiseModel noise_xi = NoiseModel::normal(0.0, 0.1),
                                            NoiseModel noise_zeta = NoiseModel::normal(0.0, 0.1));

/// Empirical strong-monotonicity modulus of the mean lower map at parameter x:
/// min over sampled pairs of <F(z)-F(z'), z-z'> / ||z-z'||^2 (mean map via
/// `noise_draws` samples per evaluation). Diagnostic for validating instances.
double empirical_monotonicity_modulus(const SmpecInstance& inst, const Vector& x,
                                      double region_radius, int pair_count, int noise_draws,
                                      Rng& rng);

/// Empirical Lipschitz modulus of the mean lower map in z at parameter x.
double empirical_map_lipschitz(const SmpecInstance& inst, const Vector& x, double region_radius,
                               int pair_count, int noise_draws, Rng& rng);

/// N-sample Monte Carlo mean of the lower map at (x, z).
Vector mean_lower_map(const SmpecInstance& inst, const Vector& x, const Vector& z, int draws,
                      Rng& rng);

}  // namespace dzgt
