#pragma once

// Projective two-view geometry: pinhole projection, camera centres,
// fundamental matrices, epilines and DLT calibration.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "wirerecon/error.hpp"
#include "wirerecon/types.hpp"

namespace wirerecon {

/// A 3x4 projection matrix mapping homogeneous world points (mm) to
/// homogeneous pixel coordinates, plus the image size in pixels.
struct ProjectiveCamera {
  Mat34 P = Mat34::Zero();
  std::array<int, 2> image_size{1024, 1024};
};

/// A fundamental matrix with unit Frobenius norm whose first nonzero entry
/// (row-major) is positive. Construct through from_matrix() to get the
/// normalisation.
class FundamentalMatrix {
 public:
  static FundamentalMatrix from_matrix(const Mat3& m) {
    const double norm = m.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw Error(Errc::InvalidArgument, "fundamental matrix must be finite and nonzero");
    }
    Mat3 f = m / norm;
    // Entries below this are treated as numerical zeros for the sign rule.
    constexpr double kSignEps = 1e-12;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        if (std::abs(f(r, c)) > kSignEps) {
          if (f(r, c) < 0.0) f = -f;
          return FundamentalMatrix(f);
        }
      }
    }
    return FundamentalMatrix(f);
  }

  const Mat3& matrix() const noexcept { return f_; }

 private:
  explicit FundamentalMatrix(const Mat3& f) : f_(f) {}
  Mat3 f_;
};

/// A world/pixel pair used for calibration.
struct Correspondence {
  Vec3 world;
  Vec2 pixel;
};

/// Line a*u + b*v + c = 0 with (a, b) of unit length.
struct Line2 {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  double signed_distance(const Vec2& x) const { return a * x.x() + b * x.y() + c; }
};

inline Vec4 homogeneous(const Vec3& x) { return Vec4(x.x(), x.y(), x.z(), 1.0); }
inline Eigen::Vector3d homogeneous(const Vec2& x) { return Eigen::Vector3d(x.x(), x.y(), 1.0); }

inline Vec2 project(const ProjectiveCamera& cam, const Vec3& X) {
  if (!X.allFinite()) throw Error(Errc::InvalidArgument, "point must be finite");
  const Eigen::Vector3d h = cam.P * homogeneous(X);
  if (std::abs(h.z()) <= 1e-12) {
    throw Error(Errc::DegenerateProjection, "point lies on the principal plane");
  }
  return Vec2(h.x() / h.z(), h.y() / h.z());
}

/// Homogeneous vectors are reported with unit norm and a nonnegative last
/// component.
inline Vec4 canonical_homogeneous(Vec4 v) {
  v.normalize();
  if (v(3) < 0.0) v = -v;
  return v;
}

/// Right null vector of P (unit norm, last component >= 0).
inline Vec4 camera_center(const ProjectiveCamera& cam) {
  Eigen::JacobiSVD<Mat34> svd(cam.P, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (!(s(0) > 0.0) || s(2) <= 1e-12 * s(0)) {
    throw Error(Errc::RankDeficient, "projection matrix has rank < 3");
  }
  return canonical_homogeneous(svd.matrixV().col(3));
}

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

/// Moore-Penrose pseudoinverse of a projection matrix; singular values
/// below 1e-12 * max are treated as zero.
inline Eigen::Matrix<double, 4, 3> pseudo_inverse(const Mat34& m) {
  Eigen::JacobiSVD<Mat34> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double cutoff = 1e-12 * s(0);
  Eigen::Matrix<double, 4, 3> result = Eigen::Matrix<double, 4, 3>::Zero();
  for (int i = 0; i < 3; ++i) {
    if (s(i) > cutoff) {
      result += svd.matrixV().col(i) * (1.0 / s(i)) * svd.matrixU().col(i).transpose();
    }
  }
  return result;
}

namespace detail {

inline bool same_center(const Vec4& a, const Vec4& b) {
  constexpr double kFiniteEps = 1e-12;
  if (std::abs(a(3)) > kFiniteEps && std::abs(b(3)) > kFiniteEps) {
    const Vec3 ca = a.head<3>() / a(3);
    const Vec3 cb = b.head<3>() / b(3);
    return (ca - cb).norm() <= 1e-9;
  }
  // At least one centre at infinity: compare directions.
  return 1.0 - std::abs(a.dot(b)) <= 1e-15;
}

}  // namespace detail

/// F = [e_B]x P_B P_A^+ with e_B = P_B C_A; maps points of view A to epilines
/// in view B (x_B^T F x_A = 0).
inline FundamentalMatrix fundamental_matrix(const ProjectiveCamera& cam_a,
                                            const ProjectiveCamera& cam_b) {
  const Vec4 ca = camera_center(cam_a);
  const Vec4 cb = camera_center(cam_b);
  if (detail::same_center(ca, cb)) {
    throw Error(Errc::CoincidentCenters, "camera centres coincide");
  }
  const Vec3 epipole_b = cam_b.P * ca;
  const Mat3 f = skew(epipole_b) * cam_b.P * pseudo_inverse(cam_a.P);
  if (!(f.norm() > 0.0)) throw Error(Errc::CoincidentCenters, "epipolar geometry undefined");
  return FundamentalMatrix::from_matrix(f);
}

/// Epipole in view A (right null vector of F), canonical homogeneous form.
inline Eigen::Vector3d epipole_a(const FundamentalMatrix& F) {
  Eigen::JacobiSVD<Mat3> svd(F.matrix(), Eigen::ComputeFullV);
  Eigen::Vector3d e = svd.matrixV().col(2);
  if (e.z() < 0.0) e = -e;
  return e;
}

/// Epipole in view B (left null vector of F), canonical homogeneous form.
inline Eigen::Vector3d epipole_b(const FundamentalMatrix& F) {
  Eigen::JacobiSVD<Mat3> svd(F.matrix(), Eigen::ComputeFullU);
  Eigen::Vector3d e = svd.matrixU().col(2);
  if (e.z() < 0.0) e = -e;
  return e;
}

inline Line2 epiline(const FundamentalMatrix& F, const Vec2& x_a) {
  if (!x_a.allFinite()) throw Error(Errc::InvalidArgument, "point must be finite");
  const Eigen::Vector3d xh = homogeneous(x_a);
  const Eigen::Vector3d l = F.matrix() * xh;
  const double n = std::hypot(l.x(), l.y());
  if (n <= 1e-10 * xh.norm()) {
    throw Error(Errc::ZeroLine, "point maps to the null line (epipole)");
  }
  return {l.x() / n, l.y() / n, l.z() / n};
}

struct CalibrationResult {
  ProjectiveCamera camera;
  double mean_reprojection_px = 0.0;
};

namespace detail {

// Similarity that moves the centroid to the origin and scales the RMS
// distance to target_rms.
template <int Dim>
Eigen::Matrix<double, Dim + 1, Dim + 1> isotropic_normalization(
    const std::vector<Eigen::Matrix<double, Dim, 1>>& pts, double target_rms) {
  Eigen::Matrix<double, Dim, 1> centroid = Eigen::Matrix<double, Dim, 1>::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  double sq = 0.0;
  for (const auto& p : pts) sq += (p - centroid).squaredNorm();
  const double rms = std::sqrt(sq / static_cast<double>(pts.size()));
  if (!(rms > 0.0)) {
    throw Error(Errc::DegenerateConfiguration, "all calibration points coincide");
  }
  const double s = target_rms / rms;
  Eigen::Matrix<double, Dim + 1, Dim + 1> T = Eigen::Matrix<double, Dim + 1, Dim + 1>::Identity();
  T.template topLeftCorner<Dim, Dim>() *= s;
  T.template topRightCorner<Dim, 1>() = -s * centroid;
  return T;
}

}  // namespace detail

/// Normalised DLT estimate of P from >= 6 world/pixel pairs. The result has
/// unit Frobenius norm and positive depth for the calibration points.
inline CalibrationResult calibrate_dlt(std::span<const Correspondence> corr,
                                       std::array<int, 2> image_size = {1024, 1024}) {
  if (corr.size() < 6) {
    throw Error(Errc::InsufficientPoints, "DLT needs at least 6 correspondences");
  }
  std::vector<Vec3> world;
  std::vector<Vec2> pixel;
  world.reserve(corr.size());
  pixel.reserve(corr.size());
  for (const auto& c : corr) {
    if (!c.world.allFinite() || !c.pixel.allFinite()) {
      throw Error(Errc::InvalidArgument, "correspondence coordinates must be finite");
    }
    world.push_back(c.world);
    pixel.push_back(c.pixel);
  }

  const Eigen::Matrix4d U = detail::isotropic_normalization<3>(world, std::sqrt(3.0));
  const Eigen::Matrix3d T = detail::isotropic_normalization<2>(pixel, std::sqrt(2.0));

  // Coplanar world points leave the DLT null space more than one-dimensional.
  {
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& w : world) {
      const Vec3 nw = (U * homogeneous(w)).head<3>();
      cov += nw * nw.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    if (eig.eigenvalues()(0) <= 1e-10 * eig.eigenvalues()(2)) {
      throw Error(Errc::DegenerateConfiguration, "world points are coplanar or collinear");
    }
  }

  const Eigen::Index n = static_cast<Eigen::Index>(corr.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * n, 12);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::RowVector4d X = (U * homogeneous(world[i])).transpose();
    const Eigen::Vector3d x = T * homogeneous(pixel[i]);
    const double u = x.x() / x.z();
    const double v = x.y() / x.z();
    A.block<1, 4>(2 * i, 4) = -X;
    A.block<1, 4>(2 * i, 8) = v * X;
    A.block<1, 4>(2 * i + 1, 0) = X;
    A.block<1, 4>(2 * i + 1, 8) = -u * X;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (s.size() < 12 || s(10) <= 1e-10 * s(0)) {
    throw Error(Errc::DegenerateConfiguration, "DLT system has a degenerate null space");
  }
  const Eigen::VectorXd p = svd.matrixV().col(11);
  Mat34 P_norm;
  P_norm << p(0), p(1), p(2), p(3), p(4), p(5), p(6), p(7), p(8), p(9), p(10), p(11);

  Mat34 P = T.inverse() * P_norm * U;
  P /= P.norm();
  Vec3 centroid = Vec3::Zero();
  for (const auto& w : world) centroid += w;
  centroid /= static_cast<double>(world.size());
  if ((P * homogeneous(centroid)).z() < 0.0) P = -P;

  CalibrationResult result;
  result.camera.P = P;
  result.camera.image_size = image_size;
  double total = 0.0;
  for (std::size_t i = 0; i < world.size(); ++i) {
    total += (project(result.camera, world[i]) - pixel[i]).norm();
  }
  result.mean_reprojection_px = total / static_cast<double>(world.size());
  return result;
}

}  // namespace wirerecon
