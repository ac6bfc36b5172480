#pragma once

#include <Eigen/Dense>
#include <functional>

#include "dzgt/errors.hpp"

namespace dzgt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Parametric convex feasible set Z(x) for the lower-level problem, with an
/// exact Euclidean projector. Three shapes cover the library's instances:
///
///  - Free:      all of R^p (projection is the identity),
///  - Box:       axis-aligned [lo, hi] (projection clamps coordinatewise),
///  - Polygon2D: intersection of halfspaces  a_i . z >= b_i(x)  in p = 2,
///               where the normals a_i are fixed and the offsets b(x) may
///               depend on the upper-level iterate.
///
/// Polygon2D projection enumerates the finitely many candidates of the KKT
/// system (interior point, one active facet, or an active vertex pair) and
/// returns the feasible candidate nearest the query. An empty candidate list
/// certifies Z(x) = {} and raises InfeasibleSetError.
class FeasibleSet {
 public:
  enum class Kind { Free, Box, Polygon2D };

  /// Maps x to the offset vector b(x), one entry per halfspace row.
  using OffsetFn = std::function<Vector(const Vector&)>;

  FeasibleSet() = default;

  static FeasibleSet free_space(int p);
  static FeasibleSet box(Vector lower, Vector upper);
  /// normals: one halfspace per row, exactly 2 columns; offsets: b(x).
  static FeasibleSet polygon2d(Matrix normals, OffsetFn offsets);
  /// Convenience for x-independent polygons.
  static FeasibleSet polygon2d_fixed(Matrix normals, Vector offsets);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  int num_halfspaces() const { return static_cast<int>(normals_.rows()); }
  const Matrix& normals() const { return normals_; }

  /// Offset vector b(x); Polygon2D only.
  Vector offsets_at(const Vector& x) const;

  /// Exact Euclidean projection of u onto Z(x). Feasible u is returned
  /// unchanged. Throws InfeasibleSetError when Z(x) is empty.
  Vector project(const Vector& x, const Vector& u) const;

  /// Whether u satisfies every constraint of Z(x) within slack tol (>= 0).
  bool contains(const Vector& x, const Vector& u, double tol = 0.0) const;

  /// Worst violation of u against Z(x); <= 0 means feasible.
  double violation(const Vector& x, const Vector& u) const;

 private:
  Kind kind_ = Kind::Free;
  int dim_ = 0;
  Vector lower_, upper_;  // Box
  Matrix normals_;        // Polygon2D
  OffsetFn offsets_;      // Polygon2D
};

}  // namespace dzgt
