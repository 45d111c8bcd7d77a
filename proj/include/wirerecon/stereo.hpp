#pragma once

// Epipolar curve matching, linear triangulation and the reprojection gate.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "wirerecon/bspline.hpp"
#include "wirerecon/cameras.hpp"
#include "wirerecon/error.hpp"
#include "wirerecon/pchip.hpp"

namespace wirerecon {

inline constexpr std::size_t kDefaultDenseSamples = 2048;
inline constexpr std::size_t kDefaultMatchSamples = 64;
inline constexpr double kReprojectionGatePx = 25.0;

/// A planar curve sampled at uniformly spaced parameters in [0, 1].
struct DenseSampling {
  std::vector<double> u;
  Polyline<2> points;

  static DenseSampling of(const PlanarCurve& curve, std::size_t n = kDefaultDenseSamples) {
    if (n < 2) throw Error(Errc::InvalidArgument, "dense sampling needs n >= 2");
    DenseSampling s;
    s.u.resize(n);
    s.points.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      s.u[k] = k + 1 == n ? 1.0 : static_cast<double>(k) / static_cast<double>(n - 1);
      s.points[k] = curve(s.u[k]);
    }
    return s;
  }
};

/// Parameters where the line crosses the curve, in increasing order. Sign
/// changes of the signed distance between dense samples are refined by
/// bisection until |distance| < tol_px.
inline std::vector<double> intersect_epiline(const PlanarCurve& curve, const DenseSampling& dense,
                                             const Line2& line, double tol_px = 1e-6) {
  std::vector<double> roots;
  const std::size_t n = dense.u.size();
  std::vector<double> d(n);
  for (std::size_t k = 0; k < n; ++k) d[k] = line.signed_distance(dense.points[k]);

  bool prev_was_root = false;
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(d[k]) < tol_px) {
      if (!prev_was_root) roots.push_back(dense.u[k]);
      prev_was_root = true;
      continue;
    }
    prev_was_root = false;
    if (k + 1 == n || std::abs(d[k + 1]) < tol_px || (d[k] > 0.0) == (d[k + 1] > 0.0)) continue;

    double lo = dense.u[k];
    double hi = dense.u[k + 1];
    const bool lo_positive = d[k] > 0.0;
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
      mid = 0.5 * (lo + hi);
      const double dm = line.signed_distance(curve(mid));
      if (std::abs(dm) < tol_px || hi - lo <= 1e-16) break;
      if ((dm > 0.0) == lo_positive) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    roots.push_back(mid);
  }
  return roots;
}

inline std::vector<double> intersect_epiline(const PlanarCurve& curve, const Line2& line,
                                             std::size_t n_dense = kDefaultDenseSamples) {
  return intersect_epiline(curve, DenseSampling::of(curve, n_dense), line);
}

/// Correspondence u_A -> u_B between two planar curves. Missing samples
/// have no epiline intersection that keeps the ordering monotone.
struct ParamMatch {
  std::vector<double> u_a;
  std::vector<std::optional<double>> u_b;
  Pchip map;

  double operator()(double u) const { return map(u); }

  std::size_t present() const {
    return static_cast<std::size_t>(std::count_if(u_b.begin(), u_b.end(),
                                                  [](const auto& v) { return v.has_value(); }));
  }
};

struct MatchOptions {
  std::size_t n_samples = kDefaultMatchSamples;
  std::size_t n_dense = kDefaultDenseSamples;
  /// Pin (0,0) / (1,1) when the first / last sample has no intersection;
  /// both annotations start at the tool tip and run to the same end.
  bool anchor_endpoints = true;
};

namespace detail {

// Among candidates keeping u_B nondecreasing, the one nearest the value
// extrapolated from the accepted pairs.
inline std::optional<double> select_candidate(const std::vector<double>& roots, double u_a,
                                              const std::vector<double>& acc_a,
                                              const std::vector<double>& acc_b) {
  double floor_b = -std::numeric_limits<double>::infinity();
  double predicted = u_a;
  if (!acc_b.empty()) {
    floor_b = acc_b.back();
    const std::size_t n = acc_b.size();
    if (n >= 2 && acc_a[n - 1] > acc_a[n - 2]) {
      const double slope = (acc_b[n - 1] - acc_b[n - 2]) / (acc_a[n - 1] - acc_a[n - 2]);
      predicted = acc_b[n - 1] + slope * (u_a - acc_a[n - 1]);
    } else {
      predicted = acc_b.back() + (u_a - acc_a.back());
    }
  }
  std::optional<double> best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (double r : roots) {
    if (r < floor_b) continue;
    const double dist = std::abs(r - predicted);
    if (dist < best_dist) {
      best = r;
      best_dist = dist;
    }
  }
  return best;
}

}  // namespace detail

inline ParamMatch match_curves(const PlanarCurve& curve_a, const PlanarCurve& curve_b,
                               const FundamentalMatrix& F, const MatchOptions& opts = {}) {
  if (opts.n_samples < 4) throw Error(Errc::InvalidArgument, "n_samples must be >= 4");
  const DenseSampling dense_b = DenseSampling::of(curve_b, opts.n_dense);

  std::vector<double> u_a(opts.n_samples);
  std::vector<std::optional<double>> u_b(opts.n_samples);
  std::vector<double> acc_a, acc_b;
  for (std::size_t k = 0; k < opts.n_samples; ++k) {
    u_a[k] = k + 1 == opts.n_samples ? 1.0
                                     : static_cast<double>(k) / static_cast<double>(opts.n_samples - 1);
    Line2 line;
    try {
      line = epiline(F, curve_a(u_a[k]));
    } catch (const Error& e) {
      if (e.code() != Errc::ZeroLine) throw;
      continue;
    }
    const auto roots = intersect_epiline(curve_b, dense_b, line);
    u_b[k] = detail::select_candidate(roots, u_a[k], acc_a, acc_b);
    if (u_b[k]) {
      acc_a.push_back(u_a[k]);
      acc_b.push_back(*u_b[k]);
    }
  }
  if (acc_a.size() < 2) {
    throw Error(Errc::NoMatches, "fewer than two epipolar matches between the curves");
  }
  if (opts.anchor_endpoints) {
    if (acc_a.front() > 0.0) {
      acc_a.insert(acc_a.begin(), 0.0);
      acc_b.insert(acc_b.begin(), 0.0);
    }
    if (acc_a.back() < 1.0) {
      acc_a.push_back(1.0);
      acc_b.push_back(1.0);
    }
  }
  return ParamMatch{std::move(u_a), std::move(u_b), Pchip(acc_a, acc_b)};
}

/// Rows x × (P X) = 0, two per view.
inline Eigen::Matrix4d triangulation_system(const ProjectiveCamera& cam_a,
                                            const ProjectiveCamera& cam_b, const Vec2& x_a,
                                            const Vec2& x_b) {
  Eigen::Matrix4d A;
  A.row(0) = x_a.x() * cam_a.P.row(2) - cam_a.P.row(0);
  A.row(1) = x_a.y() * cam_a.P.row(2) - cam_a.P.row(1);
  A.row(2) = x_b.x() * cam_b.P.row(2) - cam_b.P.row(0);
  A.row(3) = x_b.y() * cam_b.P.row(2) - cam_b.P.row(1);
  return A;
}

/// Unit homogeneous X minimising |A X|.
inline Vec4 triangulate_homogeneous(const ProjectiveCamera& cam_a, const ProjectiveCamera& cam_b,
                                    const Vec2& x_a, const Vec2& x_b) {
  const Eigen::Matrix4d A = triangulation_system(cam_a, cam_b, x_a, x_b);
  Eigen::JacobiSVD<Eigen::Matrix4d> svd(A, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (!(s(0) > 0.0) || s(2) <= 1e-10 * s(0)) {
    throw Error(Errc::DegenerateConfiguration, "rays are coincident; point not determined");
  }
  return canonical_homogeneous(svd.matrixV().col(3));
}

inline Vec3 triangulate_point(const ProjectiveCamera& cam_a, const ProjectiveCamera& cam_b,
                              const Vec2& x_a, const Vec2& x_b) {
  const Vec4 X = triangulate_homogeneous(cam_a, cam_b, x_a, x_b);
  if (std::abs(X(3)) <= 1e-10) throw Error(Errc::PointAtInfinity, "triangulated point at infinity");
  return X.head<3>() / X(3);
}

/// Distance from x to the closest point of the curve: nearest dense sample,
/// then golden-section refinement over the neighbouring parameter interval.
inline double distance_to_curve(const PlanarCurve& curve, const DenseSampling& dense, const Vec2& x) {
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < dense.points.size(); ++k) {
    const double d2 = (dense.points[k] - x).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = k;
    }
  }
  double lo = dense.u[best > 0 ? best - 1 : 0];
  double hi = dense.u[std::min(best + 1, dense.u.size() - 1)];
  const auto f = [&](double u) { return (curve(u) - x).squaredNorm(); };
  constexpr double kInvPhi = 0.6180339887498949;
  double c = hi - kInvPhi * (hi - lo);
  double d = lo + kInvPhi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 100 && hi - lo > 1e-15; ++it) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - kInvPhi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + kInvPhi * (hi - lo);
      fd = f(d);
    }
  }
  const double refined = std::min({fc, fd, best_d2});
  return std::sqrt(refined);
}

struct ReconstructionReport {
  SpatialCurve curve;
  std::vector<Vec3> points;  // triangulated samples the curve interpolates
  std::vector<std::array<double, 2>> per_point_reproj_px;
  double mean_reproj_px = 0.0;
  bool accepted = false;
};

/// Matches the two annotations, triangulates M sample pairs, fits a cubic
/// through them and scores reprojection against both annotations.
/// A reconstruction whose pooled mean error exceeds 25 px is reported with
/// accepted = false.
inline ReconstructionReport reconstruct_curve(const ProjectiveCamera& cam_a,
                                              const ProjectiveCamera& cam_b,
                                              const PlanarCurve& curve_a,
                                              const PlanarCurve& curve_b,
                                              const MatchOptions& opts = {}) {
  const FundamentalMatrix F = fundamental_matrix(cam_a, cam_b);
  const ParamMatch match = match_curves(curve_a, curve_b, F, opts);

  ReconstructionReport report;
  report.points.reserve(match.u_a.size());
  for (double ua : match.u_a) {
    const double ub = match(ua);
    try {
      report.points.push_back(triangulate_point(cam_a, cam_b, curve_a(ua), curve_b(ub)));
    } catch (const Error& e) {
      if (e.code() != Errc::PointAtInfinity && e.code() != Errc::DegenerateConfiguration) throw;
    }
  }
  if (report.points.size() < 4) {
    throw Error(Errc::NoMatches, "too few triangulated samples to fit a curve");
  }
  report.curve = fit_curve<3>(report.points, 3);

  const DenseSampling dense_a = DenseSampling::of(curve_a, opts.n_dense);
  const DenseSampling dense_b = DenseSampling::of(curve_b, opts.n_dense);
  double total = 0.0;
  for (const auto& X : report.points) {
    std::array<double, 2> err{};
    try {
      err[0] = distance_to_curve(curve_a, dense_a, project(cam_a, X));
      err[1] = distance_to_curve(curve_b, dense_b, project(cam_b, X));
    } catch (const Error& e) {
      if (e.code() != Errc::DegenerateProjection) throw;
      err = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    }
    report.per_point_reproj_px.push_back(err);
    total += err[0] + err[1];
  }
  report.mean_reproj_px = total / (2.0 * static_cast<double>(report.points.size()));
  report.accepted = report.mean_reproj_px <= kReprojectionGatePx;
  return report;
}

}  // namespace wirerecon
