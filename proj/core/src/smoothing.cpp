#include "dzgt/smoothing.hpp"

#include <cmath>
#include <stdexcept>

namespace dzgt {

SphereSample sample_sphere(int n, double eta, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_sphere: n must be >= 1");
  if (eta < 0) throw std::invalid_argument("sample_sphere: eta must be >= 0");
  if (eta == 0) throw ZeroRadiusError("sample_sphere: zero smoothing radius");

  Vector v(n);
  double norm = 0.0;
  do {
    for (int i = 0; i < n; ++i) v[i] = standard_normal(rng);
    norm = v.norm();
  } while (norm == 0.0);  // probability-zero guard
  return SphereSample{(eta / norm) * v, eta};
}

Vector sample_ball(int n, double eta, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_ball: n must be >= 1");
  if (eta < 0) throw std::invalid_argument("sample_ball: eta must be >= 0");
  if (eta == 0) return Vector::Zero(n);
  SphereSample s = sample_sphere(n, 1.0, rng);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double radius = eta * std::pow(unif(rng), 1.0 / n);
  return radius * s.v;
}

ZoGradient zo_estimate(double h_at_x, double h_at_x_plus_v, const SphereSample& v, int n,
                       GradientProvenance provenance, double inner_accuracy) {
  if (n < 1) throw std::invalid_argument("zo_estimate: n must be >= 1");
  if (v.eta < 0) throw std::invalid_argument("zo_estimate: negative radius");
  if (v.eta == 0) throw ZeroRadiusError("zo_estimate: zero smoothing radius");
  if (v.v.size() != n) throw std::invalid_argument("zo_estimate: direction has wrong dimension");

  const double quotient = static_cast<double>(n) * (h_at_x_plus_v - h_at_x) / v.eta;
  ZoGradient out;
  out.g = quotient * (v.v / v.v.norm());
  out.provenance = provenance;
  out.eta = v.eta;
  out.inner_accuracy = inner_accuracy;
  return out;
}

McValue smoothed_value_mc(const std::function<double(const Vector&)>& h, const Vector& x,
                          double eta, int draws, Rng& rng) {
  if (draws < 1) throw std::invalid_argument("smoothed_value_mc: draws must be >= 1");
  double sum = 0.0, sum_sq = 0.0;
  for (int s = 0; s < draws; ++s) {
    const double val = h(x + sample_ball(static_cast<int>(x.size()), eta, rng));
    sum += val;
    sum_sq += val * val;
  }
  const double mean = sum / draws;
  const double var = std::max(0.0, sum_sq / draws - mean * mean);
  return McValue{mean, std::sqrt(var / draws)};
}

McGradient smoothed_gradient_mc(const std::function<double(const Vector&)>& h, const Vector& x,
                                double eta, int draws, Rng& rng) {
  if (draws < 1) throw std::invalid_argument("smoothed_gradient_mc: draws must be >= 1");
  const int n = static_cast<int>(x.size());
  Vector sum = Vector::Zero(n), sum_sq = Vector::Zero(n);
  for (int s = 0; s < draws; ++s) {
    const SphereSample v = sample_sphere(n, eta, rng);
    const ZoGradient g = zo_estimate(h(x), h(x + v.v), v, n);
    sum += g.g;
    sum_sq += g.g.cwiseProduct(g.g);
  }
  McGradient out;
  out.mean = sum / draws;
  out.std_error =
      ((sum_sq / draws - out.mean.cwiseProduct(out.mean)).cwiseMax(0.0) / draws).cwiseSqrt();
  return out;
}

}  // namespace dzgt
