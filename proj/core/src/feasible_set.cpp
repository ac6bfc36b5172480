#include "dzgt/feasible_set.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace dzgt {

namespace {

void check_dim(const char* who, int expected, const Vector& v, const char* name) {
  if (v.size() != expected) {
    throw std::invalid_argument(std::string(who) + ": " + name + " has size " +
                                std::to_string(v.size()) + ", expected " +
                                std::to_string(expected));
  }
}

}  // namespace

FeasibleSet FeasibleSet::free_space(int p) {
  if (p < 0) throw std::invalid_argument("FeasibleSet::free_space: negative dimension");
  FeasibleSet s;
  s.kind_ = Kind::Free;
  s.dim_ = p;
  return s;
}

FeasibleSet FeasibleSet::box(Vector lower, Vector upper) {
  if (lower.size() != upper.size())
    throw std::invalid_argument("FeasibleSet::box: bound sizes differ");
  if (lower.size() == 0) throw std::invalid_argument("FeasibleSet::box: empty bounds");
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (!(lower[i] <= upper[i]))
      throw std::invalid_argument("FeasibleSet::box: lower bound exceeds upper bound");
  }
  FeasibleSet s;
  s.kind_ = Kind::Box;
  s.dim_ = static_cast<int>(lower.size());
  s.lower_ = std::move(lower);
  s.upper_ = std::move(upper);
  return s;
}

FeasibleSet FeasibleSet::polygon2d(Matrix normals, OffsetFn offsets) {
  if (normals.cols() != 2)
    throw std::invalid_argument("FeasibleSet::polygon2d: normals must have 2 columns");
  if (normals.rows() < 1)
    throw std::invalid_argument("FeasibleSet::polygon2d: at least one halfspace required");
  for (Eigen::Index i = 0; i < normals.rows(); ++i) {
    if (normals.row(i).norm() == 0.0)
      throw std::invalid_argument("FeasibleSet::polygon2d: zero normal row");
  }
  if (!offsets) throw std::invalid_argument("FeasibleSet::polygon2d: null offset function");
  FeasibleSet s;
  s.kind_ = Kind::Polygon2D;
  s.dim_ = 2;
  s.normals_ = std::move(normals);
  s.offsets_ = std::move(offsets);
  return s;
}

FeasibleSet FeasibleSet::polygon2d_fixed(Matrix normals, Vector offsets) {
  if (offsets.size() != normals.rows())
    throw std::invalid_argument("FeasibleSet::polygon2d_fixed: offsets/normals size mismatch");
  Vector b = std::move(offsets);
  return polygon2d(std::move(normals), [b](const Vector&) { return b; });
}

Vector FeasibleSet::offsets_at(const Vector& x) const {
  if (kind_ != Kind::Polygon2D)
    throw std::invalid_argument("FeasibleSet::offsets_at: set has no halfspace offsets");
  Vector b = offsets_(x);
  if (b.size() != normals_.rows())
    throw std::invalid_argument("FeasibleSet::offsets_at: offset function returned wrong size");
  return b;
}

double FeasibleSet::violation(const Vector& x, const Vector& u) const {
  switch (kind_) {
    case Kind::Free:
      check_dim("FeasibleSet::violation", dim_, u, "u");
      return -std::numeric_limits<double>::infinity();
    case Kind::Box: {
      check_dim("FeasibleSet::violation", dim_, u, "u");
      double worst = -std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < u.size(); ++i) {
        worst = std::max(worst, lower_[i] - u[i]);
        worst = std::max(worst, u[i] - upper_[i]);
      }
      return worst;
    }
    case Kind::Polygon2D: {
      check_dim("FeasibleSet::violation", dim_, u, "u");
      const Vector b = offsets_at(x);
      // Constraint form a_i . u >= b_i, so violation is b_i - a_i . u.
      return (b - normals_ * u).maxCoeff();
    }
  }
  throw std::logic_error("FeasibleSet::violation: unknown kind");
}

bool FeasibleSet::contains(const Vector& x, const Vector& u, double tol) const {
  if (tol < 0) throw std::invalid_argument("FeasibleSet::contains: negative tolerance");
  return violation(x, u) <= tol;
}

Vector FeasibleSet::project(const Vector& x, const Vector& u) const {
  switch (kind_) {
    case Kind::Free:
      check_dim("FeasibleSet::project", dim_, u, "u");
      return u;
    case Kind::Box: {
      check_dim("FeasibleSet::project", dim_, u, "u");
      return u.cwiseMax(lower_).cwiseMin(upper_);
    }
    case Kind::Polygon2D:
      break;
    default:
      throw std::logic_error("FeasibleSet::project: unknown kind");
  }

  check_dim("FeasibleSet::project", 2, u, "u");
  const Vector b = offsets_at(x);
  const Eigen::Index r = normals_.rows();

  // Fast path: feasible points project to themselves, bit-for-bit.
  if (((normals_ * u) - b).minCoeff() >= 0.0) return u;

  // Candidate feasibility slack: true candidates are computed to near machine
  // precision, so a scale-relative 1e-12 accepts them while keeping the
  // returned point's constraint violation far below the 1e-10 contract.
  const double scale = 1.0 + u.template lpNorm<Eigen::Infinity>() +
                       (r > 0 ? b.cwiseAbs().maxCoeff() : 0.0);
  const double slack = 1e-12 * scale;

  double best_dist = std::numeric_limits<double>::infinity();
  Vector best;

  auto consider = [&](const Vector& w) {
    if (((normals_ * w) - b).minCoeff() < -slack) return;
    const double d = (w - u).squaredNorm();
    if (d < best_dist) {
      best_dist = d;
      best = w;
    }
  };

  // One active facet: w = u + ((b_i - a_i.u)/||a_i||^2) a_i.
  for (Eigen::Index i = 0; i < r; ++i) {
    const auto a = normals_.row(i);
    const double step = (b[i] - a.dot(u)) / a.squaredNorm();
    consider(u + step * a.transpose());
  }

  // Two active facets: vertex at the intersection of a pair of boundary lines.
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = i + 1; j < r; ++j) {
      Eigen::Matrix2d A;
      A.row(0) = normals_.row(i);
      A.row(1) = normals_.row(j);
      const double det = A.determinant();
      if (std::abs(det) <= 1e-14 * normals_.row(i).norm() * normals_.row(j).norm()) continue;
      consider(A.inverse() * Eigen::Vector2d(b[i], b[j]));
    }
  }

  if (!std::isfinite(best_dist)) {
    throw InfeasibleSetError(
        "FeasibleSet::project: no feasible facet or vertex candidate; Z(x) is empty at "
        "this upper-level iterate");
  }
  return best;
}

}  // namespace dzgt
