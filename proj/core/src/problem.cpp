#include "dzgt/problem.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace dzgt {

namespace {

double spectral_norm_sym(const Matrix& S) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Vector normal_vector(int dim, Rng& rng) {
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = standard_normal(rng);
  return v;
}

}  // namespace

void SmpecInstance::validate() const {
  if (n < 1) throw std::invalid_argument("SmpecInstance: n must be >= 1");
  if (p < 1) throw std::invalid_argument("SmpecInstance: p must be >= 1");
  if (m < 1) throw std::invalid_argument("SmpecInstance: m must be >= 1");
  if (static_cast<int>(local_objectives.size()) != m)
    throw std::invalid_argument("SmpecInstance: need exactly m local objectives");
  for (const auto& h : local_objectives)
    if (!h) throw std::invalid_argument("SmpecInstance: null objective sampler");
  if (!lower_map) throw std::invalid_argument("SmpecInstance: null lower map sampler");
  if (feasible_set.dim() != p)
    throw std::invalid_argument("SmpecInstance: feasible set dimension != p");
  if (!(mu_F > 0)) throw std::invalid_argument("SmpecInstance: mu_F must be > 0");
  if (!(L_F >= mu_F)) throw std::invalid_argument("SmpecInstance: need L_F >= mu_F");
  if (!(noise_xi.std_dev >= 0) || !(noise_zeta.std_dev >= 0))
    throw std::invalid_argument("SmpecInstance: negative noise std");
}

Vector deterministic_lower_solve(const SmpecInstance& inst, const Vector& x, int iters) {
  if (iters < 1) throw std::invalid_argument("deterministic_lower_solve: iters must be >= 1");
  const double step = 2.0 / (inst.mu_F + inst.L_F);
  Vector z = inst.feasible_set.project(x, Vector::Zero(inst.p));
  for (int t = 0; t < iters; ++t) {
    const Vector F = inst.lower_map(x, z, inst.noise_zeta.mean);
    z = inst.feasible_set.project(x, z - step * F);
  }
  return z;
}

LipschitzEstimate estimate_lipschitz(const SmpecInstance& inst, double box_radius, int pairs,
                                     int noise_draws, std::uint64_t seed) {
  if (!(box_radius > 0)) throw std::invalid_argument("estimate_lipschitz: box_radius must be > 0");
  if (pairs < 1 || noise_draws < 1)
    throw std::invalid_argument("estimate_lipschitz: pairs and noise_draws must be >= 1");

  Rng point_rng = make_stream(seed, {static_cast<std::uint64_t>(StreamRole::kLipschitzProbe), 1});
  Rng noise_rng = make_stream(seed, {static_cast<std::uint64_t>(StreamRole::kLipschitzProbe), 2});

  auto box_point = [&](int dim) {
    Vector v(dim);
    std::uniform_real_distribution<double> unif(-box_radius, box_radius);
    for (int i = 0; i < dim; ++i) v[i] = unif(point_rng);
    return v;
  };

  // Pairs for x-slopes: half box-scale separations, half short-range probes so
  // local steep spots are not averaged away.
  std::vector<Vector> xa(pairs), xb(pairs), za(pairs), zb(pairs);
  for (int k = 0; k < pairs; ++k) {
    xa[k] = box_point(inst.n);
    if (k % 2 == 0) {
      xb[k] = box_point(inst.n);
    } else {
      Vector dir = normal_vector(inst.n, point_rng);
      xb[k] = xa[k] + (1e-3 * box_radius / dir.norm()) * dir;
    }
    if (xa[k] == xb[k]) xb[k].array() += 1e-3 * box_radius;
    za[k] = box_point(inst.p);
    Vector zdir = normal_vector(inst.p, point_rng);
    zb[k] = (k % 2 == 0) ? box_point(inst.p) : (za[k] + (1e-3 * box_radius / zdir.norm()) * zdir);
    if (za[k] == zb[k]) zb[k].array() += 1e-3 * box_radius;
  }

  // Lower solutions once per probe point (shared across noise draws / agents).
  std::vector<Vector> sol_a(pairs), sol_b(pairs);
  for (int k = 0; k < pairs; ++k) {
    sol_a[k] = deterministic_lower_solve(inst, xa[k]);
    sol_b[k] = deterministic_lower_solve(inst, xb[k]);
  }

  LipschitzEstimate out;
  for (int i = 0; i < inst.m; ++i) {
    const auto& h = inst.local_objectives[i];
    double mean_sq_x = 0.0, mean_sq_z = 0.0;
    Rng agent_noise(noise_rng());  // one sub-engine per agent, same draw count each
    for (int s = 0; s < noise_draws; ++s) {
      const double xi = inst.noise_xi.draw(agent_noise);
      double worst_x = 0.0, worst_z = 0.0;
      for (int k = 0; k < pairs; ++k) {
        const double num_x = std::abs(h(xa[k], sol_a[k], xi) - h(xb[k], sol_b[k], xi));
        worst_x = std::max(worst_x, num_x / (xa[k] - xb[k]).norm());
        const double num_z = std::abs(h(xa[k], za[k], xi) - h(xa[k], zb[k], xi));
        worst_z = std::max(worst_z, num_z / (za[k] - zb[k]).norm());
      }
      mean_sq_x += worst_x * worst_x;
      mean_sq_z += worst_z * worst_z;
    }
    out.L0 = std::max(out.L0, std::sqrt(mean_sq_x / noise_draws));
    out.L0_tilde = std::max(out.L0_tilde, std::sqrt(mean_sq_z / noise_draws));
  }
  return out;
}

SmpecInstance builtin_benchmark(int m, NoiseModel noise_xi, NoiseModel noise_zeta,
                                double lipschitz_box, int lipschitz_pairs, int lipschitz_draws) {
  if (m < 1) throw std::invalid_argument("builtin_benchmark: m must be >= 1");

  SmpecInstance inst;
  inst.n = 2;
  inst.p = 2;
  inst.m = m;
  inst.noise_xi = noise_xi;
  inst.noise_zeta = noise_zeta;
  inst.mu_F = 2.0;
  inst.L_F = 2.0;

  // Z(x): y >= 0, -2 y1 + y2 >= -3 - x1^2 + 2 x1 - x2^2, 3 y1 - y2 >= 4 - x2.
  Matrix normals(4, 2);
  normals << 1, 0, 0, 1, -2, 1, 3, -1;
  inst.feasible_set = FeasibleSet::polygon2d(normals, [](const Vector& x) {
    Vector b(4);
    b << 0.0, 0.0, -3.0 - x[0] * x[0] + 2.0 * x[0] - x[1] * x[1], 4.0 - x[1];
    return b;
  });

  ObjectiveSampler h = [](const Vector& x, const Vector& y, double xi) {
    return -x[0] * x[0] - 3.0 * x[1] - xi * y[0] + y[1] * y[1];
  };
  inst.local_objectives.assign(m, h);

  inst.lower_map = [](const Vector&, const Vector& y, double zeta) {
    Vector F(2);
    F << 2.0 * y[0], 2.0 * y[1] - zeta;
    return F;
  };

  // Numeric moduli over the reference box; fixed internal seed so every
  // construction of the same benchmark reports the same constants.
  const LipschitzEstimate est =
      estimate_lipschitz(inst, lipschitz_box, lipschitz_pairs, lipschitz_draws, 0xB3ULL);
  inst.L0 = est.L0;
  inst.L0_tilde = est.L0_tilde;
  return inst;
}

Vector SyntheticQuadratic::solution(const Vector& x) const {
  return -A.ldlt().solve(B * x + b);
}

double SyntheticQuadratic::objective(const Vector& x) const {
  const Vector z = solution(x);
  double val = 0.0;
  for (int i = 0; i < m; ++i)
    val += 0.5 * x.dot(P[i] * x) + q[i].dot(x) + s[i].dot(z);
  return val / m;
}

Vector SyntheticQuadratic::gradient(const Vector& x) const {
  Matrix P_bar = Matrix::Zero(n, n);
  Vector q_bar = Vector::Zero(n);
  Vector s_bar = Vector::Zero(p);
  for (int i = 0; i < m; ++i) {
    P_bar += P[i];
    q_bar += q[i];
    s_bar += s[i];
  }
  P_bar /= m;
  q_bar /= m;
  s_bar /= m;
  // f(x) = 0.5 x'P_bar x + q_bar'x - s_bar'A^{-1}(B x + b).
  return P_bar * x + q_bar - B.transpose() * A.ldlt().solve(s_bar);
}

double SyntheticQuadratic::smoothed_objective(const Vector& x, double eta) const {
  double tr = 0.0;
  for (int i = 0; i < m; ++i) tr += P[i].trace();
  tr /= m;
  // Ball smoothing of a quadratic adds eta^2 tr(P)/(2(n+2)); affine parts add nothing.
  return objective(x) + eta * eta * tr / (2.0 * (n + 2));
}

SmpecInstance SyntheticQuadratic::instance(double box_radius) const {
  SmpecInstance inst;
  inst.n = n;
  inst.p = p;
  inst.m = m;
  inst.noise_xi = noise_xi;
  inst.noise_zeta = noise_zeta;
  inst.feasible_set = FeasibleSet::free_space(p);
  inst.mu_F = mu_F;
  inst.L_F = L_F;

  const Matrix A_ = A, B_ = B;
  const Vector b_ = b, dir_ = noise_dir;
  const double zeta_mean = noise_zeta.mean;
  inst.lower_map = [A_, B_, b_, dir_, zeta_mean](const Vector& x, const Vector& z, double zeta) {
    return Vector(A_ * z + B_ * x + b_ + (zeta - zeta_mean) * dir_);
  };

  const double xi_mean = noise_xi.mean;
  inst.local_objectives.reserve(m);
  for (int i = 0; i < m; ++i) {
    const Matrix Pi = P[i];
    const Vector qi = q[i], si = s[i], ti = t[i];
    inst.local_objectives.push_back(
        [Pi, qi, si, ti, xi_mean](const Vector& x, const Vector& z, double xi) {
          return 0.5 * x.dot(Pi * x) + qi.dot(x) + si.dot(z) + (xi - xi_mean) * ti.dot(x);
        });
  }

  // L0: per agent, grad_x h~_i(x, z(x), xi) = P_i x + r_i + (xi - mean) t_i with
  // r_i = q_i - B'A^{-1} s_i; bound the deterministic part over the box and take
  // E[(D_i + |delta| T_i)^2]^{1/2} with delta ~ N(0, sigma^2).
  const double sigma = noise_xi.std_dev;
  double L0 = 0.0, L0t = 0.0;
  for (int i = 0; i < m; ++i) {
    const Vector ri = q[i] - B.transpose() * A.ldlt().solve(s[i]);
    const double Di = spectral_norm_sym(P[i]) * box_radius * std::sqrt(double(n)) + ri.norm();
    const double Ti = t[i].norm();
    const double e_abs = sigma * std::sqrt(2.0 / std::numbers::pi);
    L0 = std::max(L0, std::sqrt(Di * Di + 2.0 * Di * Ti * e_abs + Ti * Ti * sigma * sigma));
    L0t = std::max(L0t, s[i].norm());
  }
  inst.L0 = L0;
  inst.L0_tilde = L0t;
  return inst;
}

SyntheticQuadratic make_synthetic_quadratic(int n, int p, int m, std::uint64_t seed,
                                            NoiseModel noise_xi, NoiseModel noise_zeta) {
  if (n < 1 || p < 1 || m < 1)
    throw std::invalid_argument("make_synthetic_quadratic: dimensions must be >= 1");

  SyntheticQuadratic s;
  s.n = n;
  s.p = p;
  s.m = m;
  s.noise_xi = noise_xi;
  s.noise_zeta = noise_zeta;

  Rng rng = make_stream(seed, {0x53594eULL});  // "SYN"

  Matrix G(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) G(i, j) = standard_normal(rng);
  Matrix GG = G * G.transpose();
  s.A = Matrix::Identity(p, p) + GG / spectral_norm_sym(GG);

  s.B = Matrix(p, n);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < n; ++j) s.B(i, j) = 0.3 * standard_normal(rng);
  s.b = 0.3 * normal_vector(p, rng);

  std::uniform_real_distribution<double> base(0.5, 1.5);
  for (int i = 0; i < m; ++i) {
    Matrix S(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) S(r, c) = standard_normal(rng);
    Matrix SS = S * S.transpose();
    s.P.push_back(base(rng) * Matrix::Identity(n, n) + 0.25 * SS / spectral_norm_sym(SS));
    s.q.push_back(0.5 * normal_vector(n, rng));
    s.s.push_back(0.5 * normal_vector(p, rng));
    s.t.push_back(0.3 * normal_vector(n, rng));
  }

  Vector dir = normal_vector(p, rng);
  s.noise_dir = dir / dir.norm();

  Eigen::SelfAdjointEigenSolver<Matrix> es(s.A, Eigen::EigenvaluesOnly);
  s.mu_F = es.eigenvalues().minCoeff();
  s.L_F = es.eigenvalues().maxCoeff();
  return s;
}

Vector mean_lower_map(const SmpecInstance& inst, const Vector& x, const Vector& z, int draws,
                      Rng& rng) {
  if (draws < 1) throw std::invalid_argument("mean_lower_map: draws must be >= 1");
  Vector acc = Vector::Zero(inst.p);
  for (int s = 0; s < draws; ++s) acc += inst.lower_map(x, z, inst.noise_zeta.draw(rng));
  return acc / draws;
}

namespace {

double pair_scan(const SmpecInstance& inst, const Vector& x, double region_radius, int pair_count,
                 int noise_draws, Rng& rng, bool want_min_monotone) {
  if (pair_count < 1) throw std::invalid_argument("pair scan: pair_count must be >= 1");
  std::uniform_real_distribution<double> unif(-region_radius, region_radius);
  double best = want_min_monotone ? std::numeric_limits<double>::infinity() : 0.0;
  for (int k = 0; k < pair_count; ++k) {
    Vector za(inst.p), zb(inst.p);
    for (int i = 0; i < inst.p; ++i) {
      za[i] = unif(rng);
      zb[i] = unif(rng);
    }
    if (za == zb) continue;
    const Vector Fa = mean_lower_map(inst, x, za, noise_draws, rng);
    const Vector Fb = mean_lower_map(inst, x, zb, noise_draws, rng);
    const Vector dz = za - zb;
    if (want_min_monotone) {
      best = std::min(best, (Fa - Fb).dot(dz) / dz.squaredNorm());
    } else {
      best = std::max(best, (Fa - Fb).norm() / dz.norm());
    }
  }
  return best;
}

}  // namespace

double empirical_monotonicity_modulus(const SmpecInstance& inst, const Vector& x,
                                      double region_radius, int pair_count, int noise_draws,
                                      Rng& rng) {
  return pair_scan(inst, x, region_radius, pair_count, noise_draws, rng, true);
}

double empirical_map_lipschitz(const SmpecInstance& inst, const Vector& x, double region_radius,
                               int pair_count, int noise_draws, Rng& rng) {
  return pair_scan(inst, x, region_radius, pair_count, noise_draws, rng, false);
}

}  // namespace dzgt
