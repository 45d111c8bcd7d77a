#pragma once

// Tip-anchored chains of fixed-length steps, each step stored as absolute
// spherical angles in the world frame.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "wirerecon/error.hpp"
#include "wirerecon/types.hpp"

namespace wirerecon {

struct Spherical {
  double r = 0.0;
  double theta = 0.0;  // polar angle from +z, [0, pi]
  double phi = 0.0;    // azimuth, (-pi, pi]
};

inline Vec3 sph_to_cart(double r, double theta, double phi) {
  return {r * std::sin(theta) * std::cos(phi), r * std::sin(theta) * std::sin(phi),
          r * std::cos(theta)};
}

inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

inline Spherical cart_to_sph(const Vec3& v) {
  const double r = v.norm();
  if (r == 0.0) return {};
  const double theta = std::acos(std::clamp(v.z() / r, -1.0, 1.0));
  double phi = std::atan2(v.y(), v.x());
  if (phi <= -std::numbers::pi) phi = std::numbers::pi;
  return {r, theta, phi};
}

struct StepAngles {
  double theta = 0.0;
  double phi = 0.0;
};

struct SphericalChain {
  Vec3 tip = Vec3::Zero();
  double r = 1.0;
  std::vector<StepAngles> offsets;
};

inline constexpr double kDefaultChainSpacing = 2.0;  // mm

/// Points along the polyline whose consecutive chord length is exactly
/// `spacing`, starting at the first vertex. The remainder shorter than
/// one step is dropped.
inline Polyline<3> resample_polyline(std::span<const Vec3> points, double spacing = kDefaultChainSpacing) {
  if (!(spacing > 0.0)) throw Error(Errc::InvalidArgument, "spacing must be positive");
  if (points.empty()) return {};
  Polyline<3> out{points.front()};
  std::size_t seg = 0;  // current polyline segment [seg, seg+1]
  double seg_t = 0.0;   // position within it, [0, 1]
  while (seg + 1 < points.size()) {
    const Vec3 centre = out.back();
    bool found = false;
    // First point beyond (seg, seg_t) at distance `spacing` from centre.
    for (std::size_t s = seg; s + 1 < points.size() && !found; ++s) {
      const Vec3 a = points[s];
      const Vec3 d = points[s + 1] - a;
      const double dd = d.squaredNorm();
      if (dd == 0.0) continue;
      const Vec3 f = a - centre;
      const double b = f.dot(d);
      const double c = f.squaredNorm() - spacing * spacing;
      const double disc = b * b - dd * c;
      if (disc < 0.0) continue;
      const double t = (-b + std::sqrt(disc)) / dd;
      const double t_min = s == seg ? seg_t : 0.0;
      if (t >= t_min && t <= 1.0) {
        out.push_back(a + t * d);
        seg = s;
        seg_t = t;
        found = true;
      }
    }
    if (!found) break;
  }
  return out;
}

/// Chain encoding of points spaced uniformly (each step within 1% of the
/// mean step length).
inline SphericalChain encode_chain(std::span<const Vec3> points) {
  if (points.size() < 2) throw Error(Errc::TooFewPoints, "chain needs at least two points");
  double mean = 0.0;
  for (std::size_t k = 1; k < points.size(); ++k) mean += (points[k] - points[k - 1]).norm();
  mean /= static_cast<double>(points.size() - 1);
  if (!(mean > 0.0)) throw Error(Errc::NonUniformSpacing, "zero step length");
  SphericalChain chain;
  chain.tip = points.front();
  chain.r = mean;
  chain.offsets.reserve(points.size() - 1);
  for (std::size_t k = 1; k < points.size(); ++k) {
    const Vec3 step = points[k] - points[k - 1];
    if (std::abs(step.norm() - mean) > 0.01 * mean) {
      throw Error(Errc::NonUniformSpacing, "step " + std::to_string(k - 1) +
                                               " deviates more than 1% from the mean spacing");
    }
    const Spherical s = cart_to_sph(step);
    chain.offsets.push_back({s.theta, s.phi});
  }
  return chain;
}

inline Polyline<3> decode_chain(const SphericalChain& chain) {
  if (!(chain.r > 0.0)) throw Error(Errc::InvalidArgument, "chain step must be positive");
  Polyline<3> out;
  out.reserve(chain.offsets.size() + 1);
  out.push_back(chain.tip);
  for (const auto& o : chain.offsets) out.push_back(out.back() + sph_to_cart(chain.r, o.theta, o.phi));
  return out;
}

}  // namespace wirerecon
