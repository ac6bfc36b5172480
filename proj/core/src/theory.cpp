#include "dzgt/theory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dzgt {

namespace {

// Positive root of  a g^2 + b g + c = 0  with a < 0 and c > 0 (so exactly one
// positive root exists). Guards the radicand even though validated inputs
// cannot drive it negative. Evaluated branch-stably: when b and the radical
// nearly cancel (|4ac| << b^2, the stiff large-L0/small-beta regime) the naive
// (-b - sqrt)/2a form loses half the significand, so each branch sums terms of
// one sign only.
double positive_root(double a, double b, double c) {
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0)
    throw NegativeDiscriminantError("stepsize threshold: negative discriminant " +
                                    std::to_string(disc));
  const double rd = std::sqrt(disc);
  if (b <= 0) return (2.0 * c) / (rd - b);
  return -(b + rd) / (2.0 * a);
}

struct Derived {
  double B2;       // (1 + 1/beta)^2
  double Ln_eta;   // L0 n / eta
  double Ln_eta2;  // (L0 n / eta)^2
  double c;        // 1 - (1 + beta) rho^2
};

Derived derive(const TheoryInputs& in) {
  Derived d;
  const double inv = 1.0 + 1.0 / in.beta;
  d.B2 = inv * inv;
  d.Ln_eta = in.L0 * in.n / in.eta;
  d.Ln_eta2 = d.Ln_eta * d.Ln_eta;
  d.c = 1.0 - (1.0 + in.beta) * in.rho * in.rho;
  return d;
}

}  // namespace

double default_beta(double rho) {
  if (!(rho >= 0) || rho >= 1) throw std::invalid_argument("default_beta: need rho in [0, 1)");
  if (rho == 0.0) return 1.0 / 3.0;
  return std::min(1.0 / 3.0, 0.5 * (1.0 / (rho * rho) - 1.0));
}

void validate_theory_inputs(const TheoryInputs& in) {
  if (!(in.L0 > 0)) throw std::invalid_argument("theory: L0 must be > 0");
  if (!(in.L0_tilde > 0)) throw std::invalid_argument("theory: L0_tilde must be > 0");
  if (in.n < 1) throw std::invalid_argument("theory: n must be >= 1");
  if (in.m < 1) throw std::invalid_argument("theory: m must be >= 1");
  if (!(in.eta > 0)) throw std::invalid_argument("theory: eta must be > 0");
  if (!(in.rho >= 0) || in.rho >= 1)
    throw std::invalid_argument("theory: rho must lie in [0, 1)");
  if (!(in.alpha > 0)) throw std::invalid_argument("theory: alpha must be > 0");
  if (!(in.eps0 >= 0)) throw std::invalid_argument("theory: eps0 must be >= 0");
  double cap = 2.0 / 3.0;
  if (in.rho > 0) cap = std::min(cap, 1.0 / (in.rho * in.rho) - 1.0);
  if (!(in.beta > 0) || !(in.beta < cap))
    throw InvalidBetaError("beta = " + std::to_string(in.beta) +
                           " outside (0, " + std::to_string(cap) + ")");
}

double lyap_C1(const TheoryInputs& in, double gamma) {
  const Derived d = derive(in);
  return (2.0 - 1.5 * in.beta) - 2.0 * d.Ln_eta * gamma -
         8.0 * in.alpha * d.Ln_eta2 * d.B2 * gamma * gamma;
}

double lyap_C2(const TheoryInputs& in, double gamma) {
  const Derived d = derive(in);
  const double b = -d.Ln_eta2 / (2.0 * in.beta * in.m) + d.Ln_eta * (2.0 - in.beta) / in.m -
                   4.0 * in.alpha * d.Ln_eta2 * d.B2 -
                   in.alpha * d.Ln_eta2 * in.rho * in.rho * (1.0 + in.beta) * (1.0 + 1.0 / in.beta);
  return d.c + b * gamma - (2.0 * d.Ln_eta2 / in.m) * gamma * gamma -
         (8.0 * in.alpha * d.Ln_eta2 * d.Ln_eta * d.B2 / in.m) * gamma * gamma * gamma;
}

double lyap_C3(const TheoryInputs& in, double gamma) {
  const Derived d = derive(in);
  const double dd = 2.0 * d.Ln_eta + 3.0 * (1.0 + 1.0 / in.beta);
  const double A3 = 4.0 * in.alpha * d.Ln_eta2 * d.B2;
  return gamma * (in.alpha * d.c - dd * gamma - A3 * gamma * gamma);
}

double lyap_C4(const TheoryInputs& in, double gamma) {
  const Derived d = derive(in);
  const double rho2 = in.rho * in.rho;
  const double mix = 1.0 + 8.0 * (1.0 + rho2) / ((1.0 - rho2) * (1.0 - rho2));
  const double second_moment =
      in.L0 * in.L0 * in.n * in.n +
      4.0 * in.L0_tilde * in.L0_tilde * in.n * in.n * in.eps0 / (in.eta * in.eta);
  const double drift = 2.0 * d.Ln_eta * gamma * gamma +
                       6.0 * (1.0 + 1.0 / in.beta) * gamma * gamma +
                       4.0 * d.Ln_eta2 * d.B2 * gamma * gamma;
  return drift * 2.0 * in.m * second_moment * mix;
}

double lyap_theta(const TheoryInputs& in) {
  return 16.0 * in.L0_tilde * in.L0_tilde * in.n * in.n / (in.beta * in.eta * in.eta);
}

TheoryConstants theory_constants(const TheoryInputs& in) {
  validate_theory_inputs(in);
  const Derived d = derive(in);

  TheoryConstants out;

  // T1: positive root of C1, i.e. of
  //   -(8 alpha (L0 n/eta)^2 B2) g^2 - (2 L0 n/eta) g + (2 - 3 beta/2) = 0.
  out.T1 = positive_root(-8.0 * in.alpha * d.Ln_eta2 * d.B2, -2.0 * d.Ln_eta,
                         2.0 - 1.5 * in.beta);

  // T2: positive root of the quadratic lower bound of C2 (the cubic term is
  // absorbed into the quadratic one via gamma^3 <= gamma^2 * gamma_limit).
  const double a2 =
      -(d.Ln_eta2 / in.m) * (2.0 + 4.0 * in.alpha * d.B2 * (1.0 - 1.5 * in.beta));
  const double b2 = -d.Ln_eta2 / (2.0 * in.beta * in.m) + d.Ln_eta * (2.0 - in.beta) / in.m -
                    4.0 * in.alpha * d.Ln_eta2 * d.B2 -
                    in.alpha * d.Ln_eta2 * in.rho * in.rho * (1.0 + in.beta) *
                        (1.0 + 1.0 / in.beta);
  out.T2 = positive_root(a2, b2, d.c);

  // T3: positive root of C3(g)/g = alpha c - d g - A3 g^2.
  const double dd = 2.0 * d.Ln_eta + 3.0 * (1.0 + 1.0 / in.beta);
  const double A3 = 4.0 * in.alpha * d.Ln_eta2 * d.B2;
  out.T3 = positive_root(-A3, -dd, in.alpha * d.c);

  out.C0 = std::min({out.T1, out.T2, out.T3});
  out.gamma_limit = (1.0 - 1.5 * in.beta) * in.eta / (2.0 * in.L0 * in.n);
  out.gamma_max = std::min(out.C0, out.gamma_limit);
  const double ratio = out.C0 / out.gamma_limit;
  out.K_min = ratio * ratio;
  out.theta = lyap_theta(in);

  out.gamma_eval = out.C0 / std::sqrt(std::max(out.K_min, 1.0));
  out.C1 = lyap_C1(in, out.gamma_eval);
  out.C2 = lyap_C2(in, out.gamma_eval);
  out.C3 = lyap_C3(in, out.gamma_eval);
  out.C4 = lyap_C4(in, out.gamma_eval);
  return out;
}

}  // namespace dzgt
