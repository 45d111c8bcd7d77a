#pragma once

#include <Eigen/Geometry>
#include <cmath>

#include "wirerecon/cameras.hpp"
#include "wirerecon/types.hpp"

namespace wirerecon {

using Quat = Eigen::Quaterniond;

/// Unit quaternion rotating by |v| radians about v.
inline Quat quat_exp(const Vec3& v) {
  const double angle = v.norm();
  if (angle < 1e-8) {
    // sin(a/2)/a ~ 1/2 - a^2/48
    const double s = 0.5 - angle * angle / 48.0;
    Quat q(1.0 - angle * angle / 8.0, s * v.x(), s * v.y(), s * v.z());
    return q.normalized();
  }
  const double s = std::sin(0.5 * angle) / angle;
  return Quat(std::cos(0.5 * angle), s * v.x(), s * v.y(), s * v.z());
}

/// Rotation vector of a unit quaternion, angle in [0, pi] (the sign of q is
/// fixed so that its scalar part is nonnegative).
inline Vec3 quat_log(Quat q) {
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const Vec3 v = q.vec();
  const double n = v.norm();
  if (n < 1e-12) return 2.0 * v / q.w();
  return v * (2.0 * std::atan2(n, q.w()) / n);
}

/// Right Jacobian of the rotation exponential: Exp(v + e) ~ Exp(v) Exp(Jr(v) e).
inline Mat3 so3_right_jacobian(const Vec3& v) {
  const double a = v.norm();
  const Mat3 K = skew(v);
  if (a < 1e-6) return Mat3::Identity() - 0.5 * K + K * K / 6.0;
  const double a2 = a * a;
  return Mat3::Identity() - (1.0 - std::cos(a)) / a2 * K + (a - std::sin(a)) / (a2 * a) * K * K;
}

}  // namespace wirerecon
