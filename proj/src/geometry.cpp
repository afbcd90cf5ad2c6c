#include "radarnet/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <tuple>
#include <vector>

#include "radarnet/errors.hpp"

namespace radarnet {

double Vec2::norm() const { return std::hypot(x, y); }

double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

Cov2::Cov2(double xx, double xy, double yy) : xx_(xx), xy_(xy), yy_(yy) {
  if (!std::isfinite(xx) || !std::isfinite(xy) || !std::isfinite(yy)) {
    throw DomainError("Cov2: non-finite entry");
  }
  if (!(trace() > 0.0) || !(det() > 0.0)) {
    throw DomainError("Cov2: matrix is not positive definite");
  }
  const auto [hi, lo] = eigenvalues();
  if (!(lo > 0.0) || hi / lo > kMaxCondition) {
    throw DomainError("Cov2: condition number exceeds " + std::to_string(kMaxCondition));
  }
}

Cov2 Cov2::from_matrix(double m00, double m01, double m10, double m11) {
  const double scale = std::max({std::abs(m00), std::abs(m01), std::abs(m10), std::abs(m11)});
  if (std::abs(m01 - m10) > 1e-9 * scale) {
    throw DomainError("Cov2: matrix is not symmetric");
  }
  return Cov2(m00, 0.5 * (m01 + m10), m11);
}

std::pair<double, double> Cov2::eigenvalues() const {
  const double mean = 0.5 * (xx_ + yy_);
  const double radius = std::hypot(0.5 * (xx_ - yy_), xy_);
  const double hi = mean + radius;
  // Smaller root via the determinant to avoid cancellation.
  const double lo = det() / hi;
  return {hi, lo};
}

double Cov2::major_axis_angle() const { return 0.5 * std::atan2(2.0 * xy_, xx_ - yy_); }

CovEllipse::CovEllipse(Vec2 c, Cov2 m, double scale) : center(c), cov(m), k(scale) {
  if (!std::isfinite(c.x) || !std::isfinite(c.y)) {
    throw DomainError("CovEllipse: non-finite center");
  }
  if (!(k > 0.0) || !std::isfinite(k)) {
    throw DomainError("CovEllipse: confidence scale must be positive");
  }
}

bool CovEllipse::contains(Vec2 p) const {
  const Vec2 d = p - center;
  const double k2 = k * k;
  const double a = cov.xx() * k2, b = cov.xy() * k2, c = cov.yy() * k2;
  const double det = a * c - b * b;
  const double q = (c * d.x * d.x - 2.0 * b * d.x * d.y + a * d.y * d.y) / det;
  return q <= 1.0;
}

Cov2 polar_cov_to_cartesian(double r, double theta, double sigma_r, double sigma_theta) {
  if (!(r > 0.0) || !(sigma_r > 0.0) || !(sigma_theta > 0.0)) {
    throw DomainError("polar_cov_to_cartesian: r, sigma_r and sigma_theta must be positive");
  }
  const double radial = sigma_r * sigma_r;
  const double cross_range = (r * sigma_theta) * (r * sigma_theta);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return Cov2(c * c * radial + s * s * cross_range,
              c * s * (radial - cross_range),
              s * s * radial + c * c * cross_range);
}

double ellipse_area(const CovEllipse& e) {
  return std::numbers::pi * e.k * e.k * std::sqrt(e.cov.det());
}

namespace {

constexpr int kBoundarySamples = 256;
constexpr int kBisectionSteps = 80;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Boundary p(t) = center + major*cos(t) + minor*sin(t), counter-clockwise.
struct Param {
  Vec2 center;
  Vec2 major;
  Vec2 minor;
  double a;
  double b;
};

Param parametrize(const CovEllipse& e) {
  const auto [hi, lo] = e.cov.eigenvalues();
  const double phi = e.cov.major_axis_angle();
  const Vec2 u{std::cos(phi), std::sin(phi)};
  const Vec2 v{-u.y, u.x};
  const double a = e.k * std::sqrt(hi);
  const double b = e.k * std::sqrt(lo);
  return {e.center, a * u, b * v, a, b};
}

// Inverse of k^2 * cov as (m00, m01, m11).
std::array<double, 3> shape_inverse(const CovEllipse& e) {
  const double k2 = e.k * e.k;
  const double a = e.cov.xx() * k2, b = e.cov.xy() * k2, c = e.cov.yy() * k2;
  const double det = a * c - b * b;
  return {c / det, -b / det, a / det};
}

double quad(const std::array<double, 3>& m, Vec2 p, Vec2 q) {
  return m[0] * p.x * q.x + m[1] * (p.x * q.y + p.y * q.x) + m[2] * p.y * q.y;
}

// g(t) = (level of the other ellipse at p(t)) - 1, a trigonometric
// polynomial of degree two. Negative inside the other ellipse.
struct Level {
  double c0, c1, s1, c2, s2;

  double value(double t) const { return value_cs(std::cos(t), std::sin(t)); }
  double slope(double t) const { return slope_cs(std::cos(t), std::sin(t)); }
  double value_cs(double c, double s) const {
    return c0 + c1 * c + s1 * s + c2 * (c * c - s * s) + s2 * (2.0 * s * c);
  }
  double slope_cs(double c, double s) const {
    return -c1 * s + s1 * c - 2.0 * c2 * (2.0 * s * c) + 2.0 * s2 * (c * c - s * s);
  }
  bool degenerate() const {
    constexpr double eps = 1e-12;
    return std::abs(c0) < eps && std::abs(c1) < eps && std::abs(s1) < eps &&
           std::abs(c2) < eps && std::abs(s2) < eps;
  }
};

Level level_along(const Param& p, const CovEllipse& other) {
  const auto m = shape_inverse(other);
  const Vec2 d = p.center - other.center;
  const double ama = quad(m, p.major, p.major);
  const double bmb = quad(m, p.minor, p.minor);
  return {quad(m, d, d) + 0.5 * (ama + bmb) - 1.0, 2.0 * quad(m, d, p.major),
          2.0 * quad(m, d, p.minor), 0.5 * (ama - bmb), quad(m, p.major, p.minor)};
}

template <typename F>
double bisect(F&& f, double lo, double hi) {
  const bool lo_neg = f(lo) < 0.0;
  for (int it = 0; it < kBisectionSteps && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if ((f(mid) < 0.0) == lo_neg) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Root of f in a sign-changing bracket: Newton steps, falling back to
// bisection whenever a step leaves the bracket or stalls.
template <typename F, typename D>
double bracketed_newton(F&& f, D&& df, double lo, double hi) {
  const bool lo_neg = f(lo) < 0.0;
  double t = 0.5 * (lo + hi);
  double prev_step = hi - lo;
  for (int it = 0; it < kBisectionSteps; ++it) {
    const double ft = f(t);
    if (ft == 0.0) return t;
    if ((ft < 0.0) == lo_neg) {
      lo = t;
    } else {
      hi = t;
    }
    const double d = df(t);
    double next = d != 0.0 ? t - ft / d : lo - 1.0;
    if (!(next > lo && next < hi) || std::abs(next - t) > 0.5 * prev_step) next = 0.5 * (lo + hi);
    prev_step = std::abs(next - t);
    if (next == t || prev_step <= 1e-15 * (1.0 + std::abs(t))) return next;
    t = next;
  }
  return t;
}

struct SampleTable {
  std::array<double, kBoundarySamples + 1> t, c, s;
  SampleTable() {
    for (int i = 0; i <= kBoundarySamples; ++i) {
      t[i] = kTwoPi * i / kBoundarySamples;
      c[i] = std::cos(t[i]);
      s[i] = std::sin(t[i]);
    }
  }
};

const SampleTable& samples() {
  static const SampleTable table;
  return table;
}

std::vector<double> crossings(const Level& g) {
  std::vector<double> roots;
  const auto value = [&](double t) { return g.value(t); };
  const auto slope = [&](double t) { return g.slope(t); };
  const SampleTable& tab = samples();
  // |g''| bound: an extremum between samples moves g by at most curvature * h^2 / 2.
  const double h = tab.t[1];
  const double reach = 0.5 * h * h *
                       (std::abs(g.c1) + std::abs(g.s1) + 4.0 * (std::abs(g.c2) + std::abs(g.s2)));
  double t0 = 0.0;
  double g0 = g.value_cs(tab.c[0], tab.s[0]);
  double d0 = g.slope_cs(tab.c[0], tab.s[0]);
  for (int i = 1; i <= kBoundarySamples; ++i) {
    const double t1 = tab.t[i];
    const double g1 = g.value_cs(tab.c[i], tab.s[i]);
    const double d1 = g.slope_cs(tab.c[i], tab.s[i]);
    if ((g0 < 0.0) != (g1 < 0.0)) {
      roots.push_back(bracketed_newton(value, slope, t0, t1));
    } else if ((d0 < 0.0) != (d1 < 0.0) && std::min(std::abs(g0), std::abs(g1)) <= reach) {
      // An extremum between samples may hide a pair of grazing crossings.
      const double te = bisect(slope, t0, t1);
      if ((g.value(te) < 0.0) != (g0 < 0.0)) {
        roots.push_back(bisect(value, t0, te));
        roots.push_back(bisect(value, te, t1));
      }
    }
    t0 = t1;
    g0 = g1;
    d0 = d1;
  }
  return roots;
}

// Green's-theorem area contribution of the arc t in [t0, t1], relative to origin.
double arc_integral(const Param& p, Vec2 origin, double t0, double t1) {
  const Vec2 c = p.center - origin;
  return 0.5 * (cross(c, p.major) * (std::cos(t1) - std::cos(t0)) +
                cross(c, p.minor) * (std::sin(t1) - std::sin(t0)) + p.a * p.b * (t1 - t0));
}

// Sum of arcs of `p` that lie inside the region where g < 0.
double inside_arcs(const Param& p, const Level& g, const std::vector<double>& roots, Vec2 origin) {
  const std::size_t n = roots.size();
  if (n == 0) return g.value(0.0) < 0.0 ? arc_integral(p, origin, 0.0, kTwoPi) : 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t0 = roots[i];
    const double t1 = (i + 1 < n) ? roots[i + 1] : roots[0] + kTwoPi;
    if (g.value(0.5 * (t0 + t1)) < 0.0) {
      total += arc_integral(p, origin, t0, t1);
    }
  }
  return total;
}

auto ordering_key(const CovEllipse& e) {
  return std::make_tuple(e.center.x, e.center.y, e.cov.xx(), e.cov.xy(), e.cov.yy(), e.k);
}

}  // namespace

double ellipse_intersection_area(const CovEllipse& first, const CovEllipse& second) {
  const bool swap = ordering_key(second) < ordering_key(first);
  const CovEllipse& a = swap ? second : first;
  const CovEllipse& b = swap ? first : second;

  const double area_a = ellipse_area(a);
  const double area_b = ellipse_area(b);
  const double smaller = std::min(area_a, area_b);
  if (a == b) return smaller;

  const Param pa = parametrize(a);
  const Param pb = parametrize(b);
  if ((a.center - b.center).norm() > pa.a + pb.a) return 0.0;

  const Level ga = level_along(pa, b);
  const Level gb = level_along(pb, a);
  if (ga.degenerate() || gb.degenerate()) return smaller;

  const std::vector<double> ra = crossings(ga);
  const std::vector<double> rb = crossings(gb);

  if (ra.empty() && rb.empty()) {
    // No boundary crossings: nested or disjoint.
    if (ga.value(0.0) < 0.0 || gb.value(0.0) < 0.0) return smaller;
    return 0.0;
  }

  const Vec2 origin = a.center;
  double area = inside_arcs(pa, ga, ra, origin) + inside_arcs(pb, gb, rb, origin);
  return std::clamp(area, 0.0, smaller);
}

}  // namespace radarnet
