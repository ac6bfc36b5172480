#pragma once

#include <functional>

#include "dzgt/feasible_set.hpp"  // Vector
#include "dzgt/random.hpp"

namespace dzgt {

/// A perturbation direction drawn uniformly from the radius-eta sphere.
struct SphereSample {
  Vector v;    // ||v|| = eta
  double eta;  // > 0
};

/// Whether the two function values fed to the estimator came from exact
/// lower-level solutions or from inexact (budgeted) inner solves.
enum class GradientProvenance { kExact, kInexact };

/// One randomized gradient estimate g = n (h2 - h1) / eta * v / ||v||.
struct ZoGradient {
  Vector g;
  GradientProvenance provenance = GradientProvenance::kExact;
  double eta = 0.0;
  double inner_accuracy = 0.0;  // epsilon bound carried by the inexact values
};

/// Uniform sample from the sphere of radius eta in R^n (normalized Gaussian).
/// Throws ZeroRadiusError when eta == 0; std::invalid_argument for eta < 0 or
/// n < 1. n == 1 degenerates to {-eta, +eta} with equal probability.
SphereSample sample_sphere(int n, double eta, Rng& rng);

/// Uniform sample from the closed ball of radius eta (radius r = eta U^{1/n}).
/// Support routine for Monte Carlo verification of the smoothed objective.
Vector sample_ball(int n, double eta, Rng& rng);

/// Two-point estimator of the smoothed gradient: given h1 = h~(x, z1, xi) and
/// h2 = h~(x + v, z2, xi) with the SAME noise realization xi at both points,
///     g = n (h2 - h1) / eta * (v / ||v||).
/// The 1/eta difference quotient and the unit direction are kept as separate
/// factors (they coincide only because ||v|| = eta, and the statistical
/// identity E[g] = grad h^eta(x) is about the unit direction).
ZoGradient zo_estimate(double h_at_x, double h_at_x_plus_v, const SphereSample& v, int n,
                       GradientProvenance provenance = GradientProvenance::kExact,
                       double inner_accuracy = 0.0);

/// Monte Carlo mean with standard error.
struct McValue {
  double value = 0.0;
  double std_error = 0.0;
};

/// Monte Carlo estimate of the ball-smoothed value h^eta(x) = E_B[h(x + w)].
McValue smoothed_value_mc(const std::function<double(const Vector&)>& h, const Vector& x,
                          double eta, int draws, Rng& rng);

/// Componentwise Monte Carlo mean (with standard errors) of the sphere
/// estimator at fixed x, for verifying E[g] = grad h^eta(x) on closed forms.
struct McGradient {
  Vector mean;
  Vector std_error;
};
McGradient smoothed_gradient_mc(const std::function<double(const Vector&)>& h, const Vector& x,
                                double eta, int draws, Rng& rng);

}  // namespace dzgt
