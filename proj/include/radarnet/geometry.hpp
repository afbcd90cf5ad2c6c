#pragma once

#include <utility>

namespace radarnet {

/// Point or displacement in the Cartesian ground frame (meters).
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2, Vec2) = default;

  double norm() const;
};

double cross(Vec2 a, Vec2 b);
double dot(Vec2 a, Vec2 b);

/// Symmetric positive-definite 2x2 covariance (meters^2).
///
/// Construction rejects non-finite, indefinite, or near-singular matrices
/// (condition number above kMaxCondition).
class Cov2 {
 public:
  static constexpr double kMaxCondition = 1e8;

  Cov2(double xx, double xy, double yy);

  /// Accepts a full matrix; off-diagonals must agree to 1e-9 of the largest entry.
  static Cov2 from_matrix(double m00, double m01, double m10, double m11);

  double xx() const { return xx_; }
  double xy() const { return xy_; }
  double yy() const { return yy_; }
  double det() const { return xx_ * yy_ - xy_ * xy_; }
  double trace() const { return xx_ + yy_; }

  /// Eigenvalues, largest first.
  std::pair<double, double> eigenvalues() const;
  /// Angle of the major axis in radians.
  double major_axis_angle() const;

  friend bool operator==(const Cov2&, const Cov2&) = default;

 private:
  double xx_;
  double xy_;
  double yy_;
};

/// Confidence region {p : (p-c)^T cov^{-1} (p-c) <= k^2}.
struct CovEllipse {
  Vec2 center;
  Cov2 cov;
  double k = 1.0;

  CovEllipse(Vec2 center, Cov2 cov, double k = 1.0);

  CovEllipse recentered(Vec2 c) const { return CovEllipse(c, cov, k); }
  bool contains(Vec2 p) const;

  friend bool operator==(const CovEllipse&, const CovEllipse&) = default;
};

/// Rotates a range/cross-range aligned Gaussian into the ground frame:
/// R(theta) diag(sigma_r^2, (r sigma_theta)^2) R(theta)^T.
Cov2 polar_cov_to_cartesian(double r, double theta, double sigma_r, double sigma_theta);

double ellipse_area(const CovEllipse& e);

/// Overlap area of two k-scaled ellipses.
///
/// Boundary crossings are located by sampling each parametrized boundary and
/// refining sign changes by bisection; the overlap is then integrated exactly
/// over the bounding elliptic arcs with Green's theorem. The result does not
/// depend on argument order.
double ellipse_intersection_area(const CovEllipse& a, const CovEllipse& b);

}  // namespace radarnet
