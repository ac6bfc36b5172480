#pragma once

#include "dzgt/errors.hpp"

namespace dzgt {

/// Problem- and network-level quantities feeding the convergence-rate
/// constants: objective moduli L0 / L0_tilde, dimensions n (upper) and m
/// (agents), smoothing radius eta, mixing deviation norm rho, averaging
/// parameter beta, tracker weight alpha, and the inner-solve accuracy proxy
/// eps0 entering the dispersion constant.
struct TheoryInputs {
  double L0 = 0.0;
  double L0_tilde = 0.0;
  int n = 0;
  int m = 0;
  double eta = 0.0;
  double rho = 0.0;
  double beta = 0.0;
  double alpha = 1.0;
  double eps0 = 0.0;
};

/// Outputs of the constants calculator. T1..T3 are the stepsize thresholds
/// (positive roots of the three Lyapunov coefficient functions), C0 their
/// minimum, gamma_limit the smoothness-driven cap (1 - 3 beta/2) eta/(2 L0 n),
/// gamma_max = min(C0, gamma_limit), K_min = (C0/gamma_limit)^2 the horizon
/// beyond which gamma = C0/sqrt(K) respects the cap, and theta the tracker
/// dispersion weight. C1..C4 are the coefficient values at gamma_eval =
/// C0/sqrt(max(K_min, 1)).
struct TheoryConstants {
  double T1 = 0.0, T2 = 0.0, T3 = 0.0;
  double C0 = 0.0;
  double gamma_limit = 0.0;
  double gamma_max = 0.0;
  double K_min = 0.0;
  double theta = 0.0;
  double gamma_eval = 0.0;
  double C1 = 0.0, C2 = 0.0, C3 = 0.0, C4 = 0.0;
};

/// Throws InvalidBetaError when beta is outside (0, min{2/3, rho^-2 - 1});
/// std::invalid_argument for any other out-of-range input.
void validate_theory_inputs(const TheoryInputs& in);

/// Largest admissible default: min(1/3, (rho^-2 - 1)/2) (1/3 when rho = 0).
double default_beta(double rho);

/// The four Lyapunov coefficient functions at an arbitrary stepsize gamma.
/// C1..C3 are nonnegative for gamma <= min(T1..T3, gamma_limit); C4 and theta
/// measure the constant dispersion floor. All take validated inputs.
double lyap_C1(const TheoryInputs& in, double gamma);
double lyap_C2(const TheoryInputs& in, double gamma);
double lyap_C3(const TheoryInputs& in, double gamma);
double lyap_C4(const TheoryInputs& in, double gamma);
double lyap_theta(const TheoryInputs& in);

/// Full calculator. Throws NegativeDiscriminantError if a threshold radicand
/// is negative (not reachable for validated inputs, kept as a hard guard).
TheoryConstants theory_constants(const TheoryInputs& in);

}  // namespace dzgt
