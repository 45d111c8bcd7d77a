#pragma once

// Shared generators and independent oracles for the test suites. Nothing
// here calls into the code paths it is used to check.

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "wirerecon/bspline.hpp"
#include "wirerecon/cameras.hpp"

namespace wirerecon::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vec3 random_vec3(Rng& rng, double scale = 1.0) {
  return Vec3(uniform(rng, -scale, scale), uniform(rng, -scale, scale), uniform(rng, -scale, scale));
}

inline Eigen::Quaterniond random_rotation(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  return q.normalized();
}

inline Mat34 random_matrix34(Rng& rng) {
  Mat34 P;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) P(r, c) = uniform(rng, -1.0, 1.0);
  return P;
}

/// Pinhole camera roughly aimed at the origin from 250-600 mm away.
inline ProjectiveCamera random_camera(Rng& rng) {
  const Vec3 dir = random_vec3(rng).normalized();
  const double dist = uniform(rng, 250.0, 600.0);
  const Vec3 centre = -dist * dir;
  // Camera z axis along dir, with a little jitter.
  const Vec3 z = (dir + 0.05 * random_vec3(rng)).normalized();
  Vec3 x = z.unitOrthogonal();
  const double roll = uniform(rng, -M_PI, M_PI);
  x = Eigen::AngleAxisd(roll, z) * x;
  const Vec3 y = z.cross(x);
  Mat3 R;
  R.row(0) = x.transpose();
  R.row(1) = y.transpose();
  R.row(2) = z.transpose();
  Mat3 K = Mat3::Identity();
  K(0, 0) = uniform(rng, 800.0, 2000.0);
  K(1, 1) = K(0, 0) * uniform(rng, 0.95, 1.05);
  K(0, 2) = uniform(rng, 400.0, 600.0);
  K(1, 2) = uniform(rng, 400.0, 600.0);
  ProjectiveCamera cam;
  cam.P.leftCols<3>() = K * R;
  cam.P.col(3) = -K * R * centre;
  return cam;
}

/// Direct 3x4 multiply and divide.
inline Vec2 project_oracle(const Mat34& P, const Vec3& X) {
  double h[3];
  for (int r = 0; r < 3; ++r) h[r] = P(r, 0) * X.x() + P(r, 1) * X.y() + P(r, 2) * X.z() + P(r, 3);
  return Vec2(h[0] / h[2], h[1] / h[2]);
}

inline Vec3 cross_oracle(const Vec3& a, const Vec3& b) {
  return Vec3(a.y() * b.z() - a.z() * b.y(), a.z() * b.x() - a.x() * b.z(), a.x() * b.y() - a.y() * b.x());
}

/// Midpoint of the closest approach of the two back-projected rays.
inline Vec3 ray_midpoint_oracle(const Mat34& Pa, const Mat34& Pb, const Vec2& xa, const Vec2& xb) {
  auto ray = [](const Mat34& P, const Vec2& x) {
    const Mat3 M = P.leftCols<3>();
    const Vec3 c = -M.inverse() * P.col(3);
    const Vec3 d = (M.inverse() * Vec3(x.x(), x.y(), 1.0)).normalized();
    return std::pair<Vec3, Vec3>(c, d);
  };
  const auto [c1, d1] = ray(Pa, xa);
  const auto [c2, d2] = ray(Pb, xb);
  const Vec3 w = c1 - c2;
  const double a = d1.dot(d1), b = d1.dot(d2), c = d2.dot(d2), d = d1.dot(w), e = d2.dot(w);
  const double den = a * c - b * b;
  const double s = (b * e - c * d) / den;
  const double t = (a * e - b * d) / den;
  return 0.5 * ((c1 + s * d1) + (c2 + t * d2));
}

/// Cox-de Boor straight from the definition with half-open indicators.
inline double naive_basis(std::size_t i, int p, double t, const std::vector<double>& k) {
  if (p == 0) return (k[i] <= t && t < k[i + 1]) ? 1.0 : 0.0;
  const std::size_t pp = static_cast<std::size_t>(p);
  double left = 0.0, right = 0.0;
  if (k[i + pp] != k[i]) left = (t - k[i]) / (k[i + pp] - k[i]) * naive_basis(i, p - 1, t, k);
  if (k[i + pp + 1] != k[i + 1]) {
    right = (k[i + pp + 1] - t) / (k[i + pp + 1] - k[i + 1]) * naive_basis(i + 1, p - 1, t, k);
  }
  return left + right;
}

/// de Boor's triangular scheme on the control points.
template <int Dim>
Point<Dim> de_boor_oracle(const BSplineCurve<Dim>& c, double t) {
  const auto& k = c.knots.knots;
  const int p = c.knots.degree;
  // Interval index: last knot <= t, limited to the domain's last nonempty span.
  std::size_t s = static_cast<std::size_t>(p);
  while (s + 1 < c.control_points.size() && k[s + 1] <= t) ++s;
  std::vector<Point<Dim>> d(static_cast<std::size_t>(p) + 1);
  for (int j = 0; j <= p; ++j) d[static_cast<std::size_t>(j)] = c.control_points[s - static_cast<std::size_t>(p) + static_cast<std::size_t>(j)];
  for (int r = 1; r <= p; ++r) {
    for (int j = p; j >= r; --j) {
      const std::size_t i = s - static_cast<std::size_t>(p) + static_cast<std::size_t>(j);
      const double den = k[i + static_cast<std::size_t>(p - r) + 1] - k[i];
      const double alpha = den == 0.0 ? 0.0 : (t - k[i]) / den;
      d[static_cast<std::size_t>(j)] = (1.0 - alpha) * d[static_cast<std::size_t>(j - 1)] + alpha * d[static_cast<std::size_t>(j)];
    }
  }
  return d[static_cast<std::size_t>(p)];
}

/// Frechet distance by memoised recursion over the coupling lattice.
template <int Dim>
double frechet_memo_oracle(const Polyline<Dim>& a, const Polyline<Dim>& b) {
  std::map<std::pair<std::size_t, std::size_t>, double> memo;
  auto rec = [&](auto&& self, std::size_t i, std::size_t j) -> double {
    const auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const double d = (a[i] - b[j]).norm();
    double v;
    if (i == 0 && j == 0) {
      v = d;
    } else if (i == 0) {
      v = std::max(self(self, 0, j - 1), d);
    } else if (j == 0) {
      v = std::max(self(self, i - 1, 0), d);
    } else {
      v = std::max(std::min({self(self, i - 1, j), self(self, i - 1, j - 1), self(self, i, j - 1)}), d);
    }
    memo[key] = v;
    return v;
  };
  return rec(rec, a.size() - 1, b.size() - 1);
}

/// Helix along +y: radius, vertical span and number of turns.
inline Polyline<3> helix(std::size_t n, double radius, double span, double turns) {
  Polyline<3> pts;
  for (std::size_t k = 0; k < n; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(n - 1);
    const double a = 2.0 * M_PI * turns * s;
    pts.emplace_back(radius * std::cos(a), span * (s - 0.5), radius * std::sin(a));
  }
  return pts;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("wirerecon_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace wirerecon::testing
