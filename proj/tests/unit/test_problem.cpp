// Problem instances: the bilevel benchmark's hand-solved values, the synthetic
// quadratic family's closed forms against independent solves, and the numeric
// modulus estimators.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "dzgt/problem.hpp"
#include "dzgt/random.hpp"
#include "support/oracles.hpp"

using dzgt::Matrix;
using dzgt::NoiseModel;
using dzgt::Rng;
using dzgt::SmpecInstance;
using dzgt::SyntheticQuadratic;
using dzgt::Vector;

namespace {

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

SmpecInstance zero_noise_benchmark(int m = 1) {
  return dzgt::builtin_benchmark(m, NoiseModel::normal(1.0, 0.0), NoiseModel::normal(1.0, 0.0));
}

}  // namespace

TEST_CASE("benchmark lower map point values") {
  const SmpecInstance inst = zero_noise_benchmark();
  // F~(x, y, zeta) = (2 y1, 2 y2 - zeta), independent of x.
  const Vector at_origin = inst.lower_map(vec2(0, 0), vec2(0, 0), 0.0);
  CHECK(at_origin(0) == 0.0);
  CHECK(at_origin(1) == 0.0);
  const Vector at_12 = inst.lower_map(vec2(5, -5), vec2(1, 2), 1.0);
  CHECK(at_12(0) == 2.0);
  CHECK(at_12(1) == 3.0);
}

TEST_CASE("benchmark objective sample formula") {
  const SmpecInstance inst = zero_noise_benchmark(3);
  // h~(x, y, xi) = -x1^2 - 3 x2 - xi y1 + y2^2; identical across agents.
  const double expect = -1.0 - 6.0 - 2.0 * 3.0 + 16.0;  // x=(1,2), y=(3,4), xi=2
  for (const auto& h : inst.local_objectives)
    CHECK(h(vec2(1, 2), vec2(3, 4), 2.0) == expect);
  CHECK(static_cast<int>(inst.local_objectives.size()) == 3);
}

TEST_CASE("benchmark metadata and moduli") {
  const SmpecInstance inst = zero_noise_benchmark();
  CHECK(inst.n == 2);
  CHECK(inst.p == 2);
  CHECK(inst.m == 1);
  CHECK(inst.mu_F == 2.0);
  CHECK(inst.L_F == 2.0);
  CHECK(inst.L0 > 0.0);
  CHECK(inst.L0_tilde > 0.0);
  CHECK(std::isfinite(inst.L0));
  CHECK(std::isfinite(inst.L0_tilde));
  CHECK_NOTHROW(inst.validate());
}

TEST_CASE("benchmark lower-level solution at the origin") {
  // With noise frozen at its mean (zeta = 1) the VI solution at x = 0 is the
  // projection of (0, 1/2) onto Z(0), which lands at (1.35, 0.05) on the facet
  // 3 y1 - y2 = 4 (hand-solved; the multiplier is nonnegative).
  const SmpecInstance inst = zero_noise_benchmark();
  const Vector z = dzgt::deterministic_lower_solve(inst, vec2(0, 0), 400);
  CHECK(z(0) == doctest::Approx(1.35).epsilon(1e-10));
  CHECK(z(1) == doctest::Approx(0.05).epsilon(1e-10));

  // Cross-check against the grid-refinement projector on the same polygon.
  Matrix N(4, 2);
  N << 1, 0, 0, 1, -2, 1, 3, -1;
  Vector b(4);
  b << 0, 0, -3, 4;
  const Vector target = vec2(0, 0.5);
  const Vector g = dzgt::test::grid_project_2d(N, b, target, z, 1.0);
  CHECK((z - g).norm() < 1e-6);
  CHECK(dzgt::test::projection_kkt_gap(N, b, target, z) < 1e-8);
}

TEST_CASE("benchmark solution responds to x through the feasible set") {
  const SmpecInstance inst = zero_noise_benchmark();
  // At x = (0, 4) the constraint 3 y1 - y2 >= 4 - x2 relaxes to >= 0, which
  // moves the active geometry, so the solution must leave (1.35, 0.05).
  const Vector z0 = dzgt::deterministic_lower_solve(inst, vec2(0, 0), 400);
  const Vector z4 = dzgt::deterministic_lower_solve(inst, vec2(0, 4), 400);
  CHECK((z0 - z4).norm() > 1e-3);
  CHECK(inst.feasible_set.contains(vec2(0, 4), z4, 1e-9));
}

TEST_CASE("benchmark empirical moduli recover mu_F = L_F = 2") {
  const SmpecInstance inst = zero_noise_benchmark();
  Rng rng = dzgt::make_stream(55, {1});
  const double mu = dzgt::empirical_monotonicity_modulus(inst, vec2(0, 0), 2.0, 200, 1, rng);
  const double L = dzgt::empirical_map_lipschitz(inst, vec2(0, 0), 2.0, 200, 1, rng);
  // The mean map is exactly 2(z - (0, 1/2)): both moduli are exactly 2 up to
  // sampling arithmetic.
  CHECK(mu == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(L == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("mean_lower_map averages the zeta noise away") {
  SmpecInstance inst = dzgt::builtin_benchmark(1, NoiseModel::normal(1.0, 0.0),
                                               NoiseModel::normal(1.0, 0.5));
  Rng rng = dzgt::make_stream(55, {2});
  const Vector mean = dzgt::mean_lower_map(inst, vec2(0, 0), vec2(1, 1), 200000, rng);
  // E[F~] = (2, 2 - 1) = (2, 1); zeta noise has std 0.5 -> SE ~ 0.5/sqrt(2e5).
  CHECK(mean(0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(mean(1) - 1.0) < 4.0 * 0.5 / std::sqrt(200000.0));
}

TEST_CASE("estimate_lipschitz is deterministic in its seed and positive") {
  const SmpecInstance inst = zero_noise_benchmark();
  const auto a = dzgt::estimate_lipschitz(inst, 2.0, 32, 8, 99);
  const auto b = dzgt::estimate_lipschitz(inst, 2.0, 32, 8, 99);
  CHECK(a.L0 == b.L0);
  CHECK(a.L0_tilde == b.L0_tilde);
  CHECK(a.L0 > 0.0);
  CHECK(a.L0_tilde > 0.0);
  const auto c = dzgt::estimate_lipschitz(inst, 2.0, 32, 8, 100);
  CHECK(c.L0 != a.L0);  // different probe draws
}

TEST_CASE("synthetic family: identity map solves to zero") {
  SyntheticQuadratic sq;
  sq.n = 2;
  sq.p = 2;
  sq.m = 1;
  sq.A = Matrix::Identity(2, 2);
  sq.B = Matrix::Zero(2, 2);
  sq.b = Vector::Zero(2);
  sq.P = {Matrix::Identity(2, 2)};
  sq.q = {Vector::Zero(2)};
  sq.s = {Vector::Zero(2)};
  sq.t = {Vector::Zero(2)};
  sq.noise_dir = Vector::Unit(2, 0);
  sq.mu_F = 1.0;
  sq.L_F = 1.0;
  const Vector z = sq.solution(vec2(3, -4));
  CHECK(z(0) == 0.0);
  CHECK(z(1) == 0.0);
}

TEST_CASE("synthetic family: A = 2I, B = I gives z = -x/2") {
  SyntheticQuadratic sq;
  sq.n = 2;
  sq.p = 2;
  sq.m = 1;
  sq.A = 2.0 * Matrix::Identity(2, 2);
  sq.B = Matrix::Identity(2, 2);
  sq.b = Vector::Zero(2);
  sq.P = {Matrix::Identity(2, 2)};
  sq.q = {Vector::Zero(2)};
  sq.s = {Vector::Ones(2)};
  sq.t = {Vector::Zero(2)};
  sq.noise_dir = Vector::Unit(2, 0);
  sq.mu_F = 2.0;
  sq.L_F = 2.0;
  const Vector z = sq.solution(vec2(1, 1));
  CHECK(z(0) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(z(1) == doctest::Approx(-0.5).epsilon(1e-15));
}

TEST_CASE("generated synthetic instances match an independent linear solve") {
  const SyntheticQuadratic sq = dzgt::make_synthetic_quadratic(3, 3, 4, 2024);
  Rng rng = dzgt::make_stream(55, {3});
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    Vector x(3);
    for (int j = 0; j < 3; ++j) x(j) = unif(rng);
    const Vector z_lib = sq.solution(x);
    // Independent route: QR factorization instead of whatever the library uses.
    const Vector z_ref = sq.A.colPivHouseholderQr().solve(-(sq.B * x + sq.b));
    CHECK((z_lib - z_ref).norm() < 1e-12 * (1.0 + z_ref.norm()));
  }

  // A is SPD with spectrum inside [1, 2] as documented.
  Eigen::SelfAdjointEigenSolver<Matrix> es(sq.A);
  CHECK(es.eigenvalues().minCoeff() >= 1.0 - 1e-9);
  CHECK(es.eigenvalues().maxCoeff() <= 2.0 + 1e-9);
  CHECK(sq.mu_F == doctest::Approx(es.eigenvalues().minCoeff()).epsilon(1e-9));
  CHECK(sq.L_F == doctest::Approx(es.eigenvalues().maxCoeff()).epsilon(1e-9));
}

TEST_CASE("synthetic gradient matches finite differences of the objective") {
  const SyntheticQuadratic sq = dzgt::make_synthetic_quadratic(2, 3, 2, 7);
  Rng rng = dzgt::make_stream(55, {4});
  std::uniform_real_distribution<double> unif(-1.5, 1.5);
  for (int trial = 0; trial < 10; ++trial) {
    Vector x(2);
    x << unif(rng), unif(rng);
    const Vector g = sq.gradient(x);
    const double step = 1e-6;
    for (int j = 0; j < 2; ++j) {
      Vector xp = x, xm = x;
      xp(j) += step;
      xm(j) -= step;
      const double fd = (sq.objective(xp) - sq.objective(xm)) / (2.0 * step);
      CHECK(g(j) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("synthetic smoothed objective has the closed-form offset") {
  const SyntheticQuadratic sq = dzgt::make_synthetic_quadratic(3, 2, 3, 11);
  Vector x(3);
  x << 0.5, -1.0, 0.25;
  const double eta = 0.3;
  // f is quadratic with Hessian P_bar = (1/m) sum_i P_i (the lower-level part
  // is affine in x and contributes nothing to the Hessian beyond P_bar's
  // definition inside the library), so f^eta - f = eta^2 tr(Hess)/(2(n+2)).
  const double step = 1e-4;
  double trace = 0.0;
  for (int j = 0; j < 3; ++j) {
    Vector xp = x, xm = x;
    xp(j) += step;
    xm(j) -= step;
    trace += (sq.objective(xp) - 2.0 * sq.objective(x) + sq.objective(xm)) / (step * step);
  }
  const double expect = sq.objective(x) + eta * eta * trace / (2.0 * (3 + 2));
  CHECK(sq.smoothed_objective(x, eta) == doctest::Approx(expect).epsilon(1e-6));

  // And the smoothed objective converges to f as eta -> 0.
  CHECK(sq.smoothed_objective(x, 1e-9) == doctest::Approx(sq.objective(x)).epsilon(1e-12));
}

TEST_CASE("synthetic instance() packages consistent sample access") {
  const SyntheticQuadratic sq = dzgt::make_synthetic_quadratic(2, 2, 3, 77);
  const SmpecInstance inst = sq.instance();
  CHECK_NOTHROW(inst.validate());
  CHECK(inst.n == 2);
  CHECK(inst.p == 2);
  CHECK(inst.m == 3);

  // The mean lower map at (x, z) is A z + B x + b (zeta at its mean).
  const Vector x = vec2(0.7, -0.2);
  const Vector z = vec2(0.1, 0.4);
  const Vector direct = sq.A * z + sq.B * x + sq.b;
  const Vector sampled = inst.lower_map(x, z, inst.noise_zeta.mean);
  CHECK((direct - sampled).norm() < 1e-14);

  // Off-mean zeta shifts along noise_dir exactly.
  const Vector shifted = inst.lower_map(x, z, inst.noise_zeta.mean + 0.25);
  CHECK((shifted - sampled - 0.25 * sq.noise_dir).norm() < 1e-14);

  // L0_tilde is exactly the largest ||s_i||.
  double smax = 0.0;
  for (const auto& s : sq.s) smax = std::max(smax, s.norm());
  CHECK(inst.L0_tilde == doctest::Approx(smax).epsilon(1e-15));

  // Objective samples match the closed form at the mean noise.
  const double direct_h = 0.5 * x.dot(sq.P[1] * x) + sq.q[1].dot(x) + sq.s[1].dot(z);
  CHECK(inst.local_objectives[1](x, z, inst.noise_xi.mean) ==
        doctest::Approx(direct_h).epsilon(1e-14));

  // deterministic_lower_solve on the packaged instance reaches the closed form.
  const Vector z_solved = dzgt::deterministic_lower_solve(inst, x, 300);
  CHECK((z_solved - sq.solution(x)).norm() < 1e-10);
}

TEST_CASE("instance validation rejects inconsistent data") {
  SmpecInstance inst = zero_noise_benchmark(2);
  inst.local_objectives.pop_back();  // now size 1 != m = 2
  CHECK_THROWS_AS(inst.validate(), std::invalid_argument);

  SmpecInstance bad_mu = zero_noise_benchmark();
  bad_mu.mu_F = 0.0;
  CHECK_THROWS_AS(bad_mu.validate(), std::invalid_argument);

  SmpecInstance bad_L = zero_noise_benchmark();
  bad_L.L_F = bad_L.mu_F / 2.0;  // L_F < mu_F is impossible
  CHECK_THROWS_AS(bad_L.validate(), std::invalid_argument);
}
