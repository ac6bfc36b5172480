// Exact projection onto the parametric lower-level feasible sets, checked
// against a grid-refinement oracle and the projection KKT conditions.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <random>

#include "dzgt/errors.hpp"
#include "dzgt/feasible_set.hpp"
#include "dzgt/random.hpp"
#include "support/oracles.hpp"

using dzgt::FeasibleSet;
using dzgt::Matrix;
using dzgt::Vector;

namespace {

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

// Halfspace description of the benchmark's lower-level set at a fixed x:
//   y1 >= 0, y2 >= 0, -2 y1 + y2 >= -3 - x1^2 + 2 x1 - x2^2, 3 y1 - y2 >= 4 - x2.
Matrix benchmark_normals() {
  Matrix n(4, 2);
  n << 1, 0, 0, 1, -2, 1, 3, -1;
  return n;
}

Vector benchmark_offsets(const Vector& x) {
  Vector b(4);
  b << 0, 0, -3 - x(0) * x(0) + 2 * x(0) - x(1) * x(1), 4 - x(1);
  return b;
}

FeasibleSet benchmark_set_at(const Vector& x) {
  return FeasibleSet::polygon2d_fixed(benchmark_normals(), benchmark_offsets(x));
}

}  // namespace

TEST_CASE("free space projects to the identity") {
  FeasibleSet set = FeasibleSet::free_space(3);
  Vector x(0), u(3);
  u << 1.5, -2.25, 1e8;
  const Vector z = set.project(x, u);
  CHECK(z == u);  // exact, including sign of zero
  CHECK(set.contains(x, u));
  CHECK(set.violation(x, u) <= 0.0);
  CHECK(set.dim() == 3);
}

TEST_CASE("box projection clamps coordinatewise") {
  Vector lo(2), hi(2);
  lo << 0, 0;
  hi << 2, 3;
  FeasibleSet set = FeasibleSet::box(lo, hi);
  Vector x(0);

  CHECK(set.project(x, vec2(-1, 5)) == vec2(0, 3));
  CHECK(set.project(x, vec2(1, 1)) == vec2(1, 1));
  CHECK(set.project(x, vec2(3, -7)) == vec2(2, 0));
  CHECK(set.violation(x, vec2(3, 1)) == doctest::Approx(1.0));
  CHECK(set.contains(x, vec2(2, 3)));
  CHECK_FALSE(set.contains(x, vec2(2.1, 3)));
}

TEST_CASE("nonnegative orthant: (-1,-1) clamps to the origin by both routes") {
  const double inf = std::numeric_limits<double>::infinity();
  Vector lo(2), hi(2);
  lo << 0, 0;
  hi << inf, inf;
  FeasibleSet box = FeasibleSet::box(lo, hi);

  Matrix n(2, 2);
  n << 1, 0, 0, 1;
  FeasibleSet halfspaces = FeasibleSet::polygon2d_fixed(n, Vector::Zero(2));

  Vector x(0);
  CHECK(box.project(x, vec2(-1, -1)) == vec2(0, 0));
  CHECK(halfspaces.project(x, vec2(-1, -1)) == vec2(0, 0));
}

TEST_CASE("feasible points are returned unchanged, bit for bit") {
  Vector x(0);
  FeasibleSet set = benchmark_set_at(vec2(0, 0));
  // (1.35, 0.05) lies exactly on the facet 3 y1 - y2 = 4.
  const Vector on_facet = vec2(1.35, 0.05);
  const Vector interior = vec2(2.0, 1.0);
  CHECK(set.project(x, on_facet) == on_facet);
  CHECK(set.project(x, interior) == interior);
}

TEST_CASE("benchmark polygon at x = 0: hand-solved projections") {
  Vector x(0);
  FeasibleSet set = benchmark_set_at(vec2(0, 0));

  SUBCASE("single-facet case lands on -2 y1 + y2 = -3") {
    // (10, 10) violates only that facet; closest point is
    // u + ((b - a.u)/|a|^2) a = (10,10) + (7/5)(-2,1) = (7.2, 11.4).
    const Vector z = set.project(x, vec2(10, 10));
    CHECK(z(0) == doctest::Approx(7.2).epsilon(1e-12));
    CHECK(z(1) == doctest::Approx(11.4).epsilon(1e-12));
  }

  SUBCASE("vertex case lands on the corner (4/3, 0)") {
    const Vector z = set.project(x, vec2(-1, -1));
    CHECK(z(0) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
    CHECK(z(1) == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("projections agree with the grid-refinement oracle") {
    const Matrix N = benchmark_normals();
    const Vector b = benchmark_offsets(vec2(0, 0));
    for (const Vector& u :
         {vec2(10, 10), vec2(-1, -1), vec2(0, 0.5), vec2(5, -3), vec2(-4, 9)}) {
      const Vector z = set.project(x, u);
      const Vector g = dzgt::test::grid_project_2d(N, b, u, z, 2.0);
      CHECK((z - g).norm() < 1e-6);
      CHECK(dzgt::test::projection_kkt_gap(N, b, u, z) < 1e-9);
    }
  }
}

TEST_CASE("x-dependent offsets move the set") {
  FeasibleSet set = FeasibleSet::polygon2d(benchmark_normals(), &benchmark_offsets);
  const Vector x = vec2(1, 2);
  const Vector b = set.offsets_at(x);
  CHECK(b(0) == 0.0);
  CHECK(b(1) == 0.0);
  CHECK(b(2) == doctest::Approx(-3 - 1 + 2 - 4).epsilon(1e-15));  // = -6
  CHECK(b(3) == doctest::Approx(2.0).epsilon(1e-15));             // 4 - x2

  // Projection at this x agrees with grid + KKT oracles.
  const Matrix N = benchmark_normals();
  for (const Vector& u : {vec2(-3, -3), vec2(6, -1), vec2(0.2, 0.1)}) {
    const Vector z = set.project(x, u);
    CHECK(set.contains(x, z, 1e-9));
    const Vector g = dzgt::test::grid_project_2d(N, b, u, z, 2.0);
    CHECK((z - g).norm() < 1e-6);
    CHECK(dzgt::test::projection_kkt_gap(N, b, u, z) < 1e-9);
  }
}

TEST_CASE("random queries: projection is feasible, KKT-stationary, and grid-optimal") {
  Vector x(0);
  FeasibleSet set = benchmark_set_at(vec2(0, 0));
  const Matrix N = benchmark_normals();
  const Vector b = benchmark_offsets(vec2(0, 0));

  dzgt::Rng rng = dzgt::make_stream(77, {1});
  std::uniform_real_distribution<double> unif(-12.0, 12.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector u = vec2(unif(rng), unif(rng));
    const Vector z = set.project(x, u);
    CHECK(set.contains(x, z, 1e-9));
    CHECK(dzgt::test::projection_kkt_gap(N, b, u, z) < 1e-9);
    // No grid candidate may beat the returned point by more than grid slack.
    const Vector g = dzgt::test::grid_project_2d(N, b, u, z, 3.0);
    CHECK((u - z).norm() <= (u - g).norm() + 1e-9);
  }
}

TEST_CASE("projection distance is monotone under set membership scaling") {
  // The projector is 1-Lipschitz: |P(u) - P(w)| <= |u - w|.
  Vector x(0);
  FeasibleSet set = benchmark_set_at(vec2(0, 0));
  dzgt::Rng rng = dzgt::make_stream(78, {2});
  std::uniform_real_distribution<double> unif(-8.0, 8.0);
  for (int trial = 0; trial < 40; ++trial) {
    const Vector u = vec2(unif(rng), unif(rng));
    const Vector w = vec2(unif(rng), unif(rng));
    const Vector pu = set.project(x, u);
    const Vector pw = set.project(x, w);
    CHECK((pu - pw).norm() <= (u - w).norm() + 1e-12);
  }
}

TEST_CASE("empty polygon raises InfeasibleSetError") {
  // y1 >= 1 and -y1 >= 0 cannot both hold.
  Matrix n(2, 2);
  n << 1, 0, -1, 0;
  Vector b(2);
  b << 1, 0;
  FeasibleSet set = FeasibleSet::polygon2d_fixed(n, b);
  Vector x(0);
  CHECK_THROWS_AS((void)set.project(x, vec2(0, 0)), dzgt::InfeasibleSetError);
}

TEST_CASE("violation reports the worst constraint breach") {
  Vector x(0);
  FeasibleSet set = benchmark_set_at(vec2(0, 0));
  // At the origin: facet 4 reads 3*0 - 0 >= 4, breached by 4 (the worst).
  CHECK(set.violation(x, vec2(0, 0)) == doctest::Approx(4.0).epsilon(1e-12));
  // On the boundary the violation is ~0; inside it is negative.  (1.5, 0.3)
  // has slack 0.3 on -2y1+y2 >= -3 and 0.2 on 3y1-y2 >= 4.
  CHECK(set.violation(x, vec2(1.35, 0.05)) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(set.violation(x, vec2(1.5, 0.3)) == doctest::Approx(-0.2).epsilon(1e-12));
  CHECK(set.contains(x, vec2(0, 0), 4.0));
  CHECK_FALSE(set.contains(x, vec2(0, 0), 3.999));
}
