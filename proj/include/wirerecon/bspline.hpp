#pragma once

// B-spline basis (Cox-de Boor), curve evaluation, arclength
// parameterisation of polylines and interpolating fits.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "wirerecon/error.hpp"
#include "wirerecon/types.hpp"

namespace wirerecon {

/// Nondecreasing knots t_0..t_m for basis functions of a given degree.
/// The number of basis functions (control points) is m - degree.
struct KnotVector {
  std::vector<double> knots;
  int degree = 3;

  /// Clamped knots on [lo, hi] with uniformly spaced interior knots.
  static KnotVector clamped_uniform(std::size_t n_ctrl, int degree, double lo = 0.0,
                                    double hi = 1.0) {
    if (degree < 0 || n_ctrl < static_cast<std::size_t>(degree) + 1) {
      throw Error(Errc::TooFewPoints, "clamped knot vector needs at least degree+1 control points");
    }
    KnotVector kv;
    kv.degree = degree;
    const std::size_t p = static_cast<std::size_t>(degree);
    const std::size_t interior = n_ctrl - p - 1;
    kv.knots.assign(p + 1, lo);
    for (std::size_t j = 1; j <= interior; ++j) {
      kv.knots.push_back(lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(interior + 1));
    }
    kv.knots.insert(kv.knots.end(), p + 1, hi);
    return kv;
  }

  void validate() const {
    if (degree < 0) throw Error(Errc::InvalidArgument, "negative degree");
    if (knots.size() < 2 * static_cast<std::size_t>(degree) + 2) {
      throw Error(Errc::InvalidArgument, "knot vector too short for its degree");
    }
    for (std::size_t i = 0; i < knots.size(); ++i) {
      if (!std::isfinite(knots[i])) throw Error(Errc::InvalidArgument, "knots must be finite");
      if (i > 0 && knots[i] < knots[i - 1]) {
        throw Error(Errc::InvalidArgument, "knots must be nondecreasing");
      }
    }
    if (!(domain_end() > domain_begin())) {
      throw Error(Errc::InvalidArgument, "knot vector has an empty evaluation domain");
    }
  }

  std::size_t num_basis() const { return knots.size() - static_cast<std::size_t>(degree) - 1; }
  double domain_begin() const { return knots[static_cast<std::size_t>(degree)]; }
  double domain_end() const { return knots[knots.size() - 1 - static_cast<std::size_t>(degree)]; }

  /// Index j of the knot interval holding t, or -1 when no degree-0 basis is
  /// active. Intervals are half-open except the one closing the evaluation
  /// domain, so t == domain_end() maps to the last nonempty interval.
  std::ptrdiff_t span(double t) const {
    const double end = domain_end();
    if (t == end) {
      auto it = std::lower_bound(knots.begin(), knots.end(), end);
      return std::distance(knots.begin(), it) - 1;
    }
    auto it = std::upper_bound(knots.begin(), knots.end(), t);
    const std::ptrdiff_t j = std::distance(knots.begin(), it) - 1;
    if (j < 0 || j >= static_cast<std::ptrdiff_t>(knots.size()) - 1) return -1;
    return j;
  }
};

namespace detail {

inline double cox_de_boor(std::size_t i, int p, double t, const KnotVector& kv,
                          std::ptrdiff_t active) {
  if (p == 0) return static_cast<std::ptrdiff_t>(i) == active ? 1.0 : 0.0;
  const auto& k = kv.knots;
  const std::size_t pp = static_cast<std::size_t>(p);
  double value = 0.0;
  const double left_den = k[i + pp] - k[i];
  if (left_den != 0.0) value += (t - k[i]) / left_den * cox_de_boor(i, p - 1, t, kv, active);
  const double right_den = k[i + pp + 1] - k[i + 1];
  if (right_den != 0.0) {
    value += (k[i + pp + 1] - t) / right_den * cox_de_boor(i + 1, p - 1, t, kv, active);
  }
  return value;
}

}  // namespace detail

/// B_{i,p}(t) by the Cox-de Boor recursion (0/0 taken as 0).
inline double basis(std::size_t i, int p, double t, const KnotVector& kv) {
  if (p < 0 || kv.knots.size() < static_cast<std::size_t>(p) + 2 ||
      i + static_cast<std::size_t>(p) + 1 >= kv.knots.size()) {
    throw Error(Errc::IndexOutOfRange, "basis index " + std::to_string(i) + " out of range");
  }
  // The closing rule is tied to the domain of degree p, not kv.degree.
  KnotVector view{kv.knots, p};
  return detail::cox_de_boor(i, p, t, view, view.span(t));
}

/// The degree+1 basis values that can be nonzero in knot interval `span`,
/// i.e. B_{span-p}..B_{span}, computed with the triangular Cox-de Boor scheme.
inline std::vector<double> nonzero_basis(std::ptrdiff_t span, double t, const KnotVector& kv) {
  const int p = kv.degree;
  const auto& k = kv.knots;
  std::vector<double> N(static_cast<std::size_t>(p) + 1, 0.0);
  std::vector<double> left(N.size()), right(N.size());
  N[0] = 1.0;
  const std::size_t s = static_cast<std::size_t>(span);
  for (int j = 1; j <= p; ++j) {
    const std::size_t uj = static_cast<std::size_t>(j);
    left[uj] = t - k[s + 1 - uj];
    right[uj] = k[s + uj] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const std::size_t ur = static_cast<std::size_t>(r);
      const double den = right[ur + 1] + left[uj - ur];
      const double tmp = den != 0.0 ? N[ur] / den : 0.0;
      N[ur] = saved + right[ur + 1] * tmp;
      saved = left[uj - ur] * tmp;
    }
    N[uj] = saved;
  }
  return N;
}

/// C(t) = sum_i P_i B_{i,p}(t).
template <int Dim>
struct BSplineCurve {
  std::vector<Point<Dim>> control_points;
  KnotVector knots;

  int degree() const { return knots.degree; }
  double domain_begin() const { return knots.domain_begin(); }
  double domain_end() const { return knots.domain_end(); }

  void validate() const {
    knots.validate();
    if (control_points.size() < static_cast<std::size_t>(knots.degree) + 1) {
      throw Error(Errc::TooFewPoints, "curve needs at least degree+1 control points");
    }
    if (knots.num_basis() != control_points.size()) {
      throw Error(Errc::InvalidArgument, "knot count must equal control points + degree + 1");
    }
    for (const auto& c : control_points) {
      if (!c.allFinite()) throw Error(Errc::InvalidArgument, "control points must be finite");
    }
  }
};

using SpatialCurve = BSplineCurve<3>;
using PlanarSpline = BSplineCurve<2>;

template <int Dim>
Point<Dim> eval_curve(const BSplineCurve<Dim>& curve, double t) {
  const double lo = curve.domain_begin();
  const double hi = curve.domain_end();
  // Rounding slack for parameters computed from the domain bounds.
  const double slack = 1e-12 * (1.0 + std::abs(hi - lo));
  if (!(t >= lo - slack && t <= hi + slack)) {
    throw Error(Errc::OutOfDomain, "parameter " + std::to_string(t) + " outside [" +
                                       std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  t = std::clamp(t, lo, hi);
  const std::ptrdiff_t s = curve.knots.span(t);
  const auto N = nonzero_basis(s, t, curve.knots);
  Point<Dim> out = Point<Dim>::Zero();
  const std::size_t first = static_cast<std::size_t>(s - curve.degree());
  for (std::size_t j = 0; j < N.size(); ++j) out += N[j] * curve.control_points[first + j];
  return out;
}

/// Drops consecutive vertices closer than tol to the last kept vertex.
template <int Dim>
Polyline<Dim> remove_duplicate_vertices(std::span<const Point<Dim>> points, double tol = 1e-9) {
  Polyline<Dim> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    if (out.empty() || (p - out.back()).norm() > tol) out.push_back(p);
  }
  return out;
}

/// Normalised cumulative chord length per vertex: u_0 = 0, u_last = 1.
template <int Dim>
std::vector<double> parameterize_arclength(std::span<const Point<Dim>> points) {
  if (points.size() < 2) throw Error(Errc::DegenerateCurve, "need at least two points");
  std::vector<double> u(points.size(), 0.0);
  for (std::size_t k = 1; k < points.size(); ++k) {
    u[k] = u[k - 1] + (points[k] - points[k - 1]).norm();
  }
  const double total = u.back();
  if (!(total > 1e-12)) throw Error(Errc::DegenerateCurve, "polyline has zero length");
  for (auto& v : u) v /= total;
  u.back() = 1.0;
  return u;
}

/// Clamped knots for interpolation at parameters u by knot averaging.
inline KnotVector averaged_knots(std::span<const double> u, int degree) {
  const std::size_t n = u.size();
  const std::size_t p = static_cast<std::size_t>(degree);
  KnotVector kv;
  kv.degree = degree;
  kv.knots.assign(p + 1, u.front());
  for (std::size_t j = 1; j + p < n; ++j) {
    double sum = 0.0;
    for (std::size_t i = j; i < j + p; ++i) sum += u[i];
    kv.knots.push_back(sum / static_cast<double>(p));
  }
  kv.knots.insert(kv.knots.end(), p + 1, u.back());
  return kv;
}

/// Interpolating B-spline through points at the given strictly increasing
/// parameters.
template <int Dim>
BSplineCurve<Dim> interpolate(std::span<const Point<Dim>> points, std::span<const double> u,
                              int degree) {
  const std::size_t n = points.size();
  if (degree < 1) throw Error(Errc::InvalidArgument, "degree must be >= 1");
  if (n < static_cast<std::size_t>(degree) + 1) {
    throw Error(Errc::TooFewPoints, "need at least degree+1 distinct points, got " +
                                        std::to_string(n));
  }
  if (u.size() != n) throw Error(Errc::InvalidArgument, "parameter count mismatch");
  BSplineCurve<Dim> curve;
  curve.knots = averaged_knots(u, degree);

  const Eigen::Index N = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N, N);
  Eigen::MatrixXd rhs(N, Dim);
  for (std::size_t k = 0; k < n; ++k) {
    const std::ptrdiff_t s = curve.knots.span(u[k]);
    const auto basis_vals = nonzero_basis(s, u[k], curve.knots);
    const std::ptrdiff_t first = s - degree;
    for (std::size_t j = 0; j < basis_vals.size(); ++j) {
      A(static_cast<Eigen::Index>(k), first + static_cast<Eigen::Index>(j)) = basis_vals[j];
    }
    rhs.row(static_cast<Eigen::Index>(k)) = points[k].transpose();
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  lu.setThreshold(1e-13);
  if (!lu.isInvertible()) throw Error(Errc::SolveFailure, "singular interpolation system");
  const Eigen::MatrixXd ctrl = lu.solve(rhs);
  if (!ctrl.allFinite() || (A * ctrl - rhs).norm() > 1e-9 * (1.0 + rhs.norm())) {
    throw Error(Errc::SolveFailure, "interpolation system solve is inaccurate");
  }
  curve.control_points.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    curve.control_points[i] = ctrl.row(static_cast<Eigen::Index>(i)).transpose();
  }
  return curve;
}

template <int Dim>
struct FittedCurve {
  Polyline<Dim> points;   // deduplicated input vertices
  std::vector<double> u;  // normalised arclength per vertex
  BSplineCurve<Dim> spline;
};

/// Interpolating B-spline through a polyline at its normalised arclength
/// parameters (clamped, averaged knots).
template <int Dim>
FittedCurve<Dim> fit_curve_detailed(std::span<const Point<Dim>> polyline, int degree = 3) {
  FittedCurve<Dim> out;
  out.points = remove_duplicate_vertices<Dim>(polyline);
  if (out.points.size() < static_cast<std::size_t>(std::max(degree, 1)) + 1) {
    throw Error(Errc::TooFewPoints, "need at least " + std::to_string(degree + 1) +
                                        " distinct points, got " +
                                        std::to_string(out.points.size()));
  }
  out.u = parameterize_arclength<Dim>(out.points);
  out.spline = interpolate<Dim>(out.points, out.u, degree);
  return out;
}

template <int Dim>
BSplineCurve<Dim> fit_curve(std::span<const Point<Dim>> polyline, int degree = 3) {
  return fit_curve_detailed<Dim>(polyline, degree).spline;
}

/// A 2D annotation polyline with its arclength parameters and interpolating
/// spline. The spline is cubic unless fewer than four distinct vertices
/// exist, in which case the degree drops to vertices - 1.
struct PlanarCurve {
  Polyline<2> points;
  std::vector<double> u;
  PlanarSpline spline;

  static PlanarCurve from_polyline(std::span<const Vec2> polyline) {
    const auto distinct = remove_duplicate_vertices<2>(polyline);
    if (distinct.size() < 2) throw Error(Errc::DegenerateCurve, "need at least two distinct points");
    const int degree = static_cast<int>(std::min<std::size_t>(3, distinct.size() - 1));
    auto fitted = fit_curve_detailed<2>(distinct, degree);
    return PlanarCurve{std::move(fitted.points), std::move(fitted.u), std::move(fitted.spline)};
  }

  Vec2 operator()(double u_param) const { return eval_curve(spline, u_param); }
};

template <int Dim>
struct CurveSample {
  double t = 0.0;
  Point<Dim> point;
};

/// n samples at t_k = t_p + k/(n-1) * (t_{m-p} - t_p), endpoints included.
template <int Dim>
std::vector<CurveSample<Dim>> sample_uniform(const BSplineCurve<Dim>& curve, std::size_t n) {
  if (n < 2) throw Error(Errc::InvalidArgument, "sample_uniform needs n >= 2");
  const double lo = curve.domain_begin();
  const double hi = curve.domain_end();
  std::vector<CurveSample<Dim>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = k + 1 == n ? hi
                                : lo + (static_cast<double>(k) / static_cast<double>(n - 1)) * (hi - lo);
    out[k] = {t, eval_curve(curve, t)};
  }
  return out;
}

}  // namespace wirerecon
