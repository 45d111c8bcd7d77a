#pragma once

// Discrete rod made of rigid segments. Joint curvature is the rotation
// vector of q_i^-1 q_{i+1}; the only energy is bending,
// E_bend = 1/2 E sum_j |kappa_j - omega0_j|^2.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "wirerecon/error.hpp"
#include "wirerecon/quaternion.hpp"
#include "wirerecon/types.hpp"

namespace wirerecon {

/// Segment axis in each segment's body frame.
inline const Vec3 kSegmentAxis = Vec3::UnitZ();

struct RodState {
  double segment_length = 1.0;   // mm
  std::vector<Quat> orientations;  // one per segment
  Vec3 base = Vec3::Zero();      // start of segment 0, mm
  double stiffness = 1.0;        // energy per rad^2
  std::vector<Vec3> rest_curvature;  // one per joint, body frame of the lower segment

  std::size_t segments() const { return orientations.size(); }
  std::size_t joints() const { return orientations.empty() ? 0 : orientations.size() - 1; }

  /// Straight rod along the base orientation. The rest curvature has its
  /// twist (axial) component removed.
  static RodState straight(std::size_t n_segments, double segment_length, double stiffness,
                           std::vector<Vec3> rest_curvature = {}, const Quat& base_orientation = Quat::Identity(),
                           const Vec3& base = Vec3::Zero()) {
    RodState rod;
    rod.segment_length = segment_length;
    rod.stiffness = stiffness;
    rod.base = base;
    rod.orientations.assign(n_segments, base_orientation.normalized());
    if (rest_curvature.empty()) rest_curvature.assign(n_segments > 0 ? n_segments - 1 : 0, Vec3::Zero());
    rod.rest_curvature = std::move(rest_curvature);
    rod.remove_rest_twist();
    rod.validate();
    return rod;
  }

  void remove_rest_twist() {
    for (auto& w : rest_curvature) w -= w.dot(kSegmentAxis) * kSegmentAxis;
  }

  void validate() const {
    if (orientations.empty()) throw Error(Errc::InvalidArgument, "rod needs at least one segment");
    if (!(segment_length > 0.0)) throw Error(Errc::InvalidArgument, "segment length must be positive");
    if (!(stiffness > 0.0)) throw Error(Errc::InvalidArgument, "stiffness must be positive");
    if (rest_curvature.size() != joints()) {
      throw Error(Errc::InvalidArgument, "rest curvature needs one vector per joint");
    }
    for (const auto& q : orientations) {
      if (std::abs(q.norm() - 1.0) > 1e-12) throw Error(Errc::InvalidArgument, "orientation not unit");
    }
  }

  /// N+1 points: base, then the end of each segment.
  Polyline<3> centerline() const {
    Polyline<3> pts;
    pts.reserve(orientations.size() + 1);
    pts.push_back(base);
    for (const auto& q : orientations) pts.push_back(pts.back() + segment_length * (q * kSegmentAxis));
    return pts;
  }

  Vec3 tip() const { return centerline().back(); }
};

inline Vec3 relative_curvature(const Quat& q_i, const Quat& q_next) {
  return quat_log(q_i.conjugate() * q_next);
}

inline std::vector<Vec3> joint_curvatures(const RodState& rod) {
  std::vector<Vec3> k(rod.joints());
  for (std::size_t j = 0; j < k.size(); ++j) {
    k[j] = relative_curvature(rod.orientations[j], rod.orientations[j + 1]);
  }
  return k;
}

inline double bending_energy(const RodState& rod) {
  double e = 0.0;
  for (std::size_t j = 0; j < rod.joints(); ++j) {
    const Vec3 d = relative_curvature(rod.orientations[j], rod.orientations[j + 1]) - rod.rest_curvature[j];
    e += 0.5 * rod.stiffness * d.squaredNorm();
  }
  return e;
}

/// Rebuilds orientations from the base orientation and joint rotation
/// vectors: q_{j+1} = q_j Exp(kappa_j), renormalised.
inline RodState with_joint_rotations(const RodState& rod, const std::vector<Vec3>& joints) {
  RodState out = rod;
  for (std::size_t j = 0; j < joints.size(); ++j) {
    out.orientations[j + 1] = (out.orientations[j] * quat_exp(joints[j])).normalized();
  }
  return out;
}

/// Gradient of bending_energy with respect to the joint rotation vectors.
inline Eigen::VectorXd bending_energy_gradient(const RodState& rod) {
  const auto kappa = joint_curvatures(rod);
  Eigen::VectorXd g(3 * static_cast<Eigen::Index>(kappa.size()));
  for (std::size_t j = 0; j < kappa.size(); ++j) {
    g.segment<3>(3 * static_cast<Eigen::Index>(j)) = rod.stiffness * (kappa[j] - rod.rest_curvature[j]);
  }
  return g;
}

/// d(tip)/d(joint rotation vectors), 3 x 3(N-1).
inline Eigen::MatrixXd tip_jacobian(const RodState& rod) {
  const auto pts = rod.centerline();
  const auto kappa = joint_curvatures(rod);
  const Vec3 tip = pts.back();
  Eigen::MatrixXd J(3, 3 * static_cast<Eigen::Index>(kappa.size()));
  for (std::size_t j = 0; j < kappa.size(); ++j) {
    // Segments above joint j swing about the joint point pts[j+1].
    const Mat3 R = rod.orientations[j + 1].toRotationMatrix();
    J.block<3, 3>(0, 3 * static_cast<Eigen::Index>(j)) =
        -skew(tip - pts[j + 1]) * R * so3_right_jacobian(kappa[j]);
  }
  return J;
}

struct RelaxOptions {
  std::optional<Vec3> tip_target;  // pinned tip position, mm
  double initial_penalty = 1.0;    // tip penalty weight, energy per mm^2
  double penalty_growth = 10.0;
  int outer_iterations = 5;
  double gradient_tol = 1e-8;  // infinity norm
  int max_iterations = 10000;
};

struct RelaxResult {
  RodState rod;
  double bending_energy = 0.0;
  double penalty_weight = 0.0;
  double gradient_inf_norm = 0.0;  // of the final (penalised) objective
  double tip_residual = 0.0;       // mm, zero without a tip target
  int iterations = 0;
  bool converged = false;
  // Line search stalled at the rounding floor of the penalty term, with the
  // gradient below gradient_tol * max(1, w).
  bool precision_limited = false;
  std::vector<double> objective_trace;  // accepted steps, last outer loop
};

/// Thrown when the iteration budget runs out; carries the best iterate.
class RelaxNonConvergence : public Error {
 public:
  explicit RelaxNonConvergence(RelaxResult best)
      : Error(Errc::NonConvergence, "rod relaxation did not reach the gradient tolerance"),
        best_(std::move(best)) {}
  const RelaxResult& best() const { return best_; }

 private:
  RelaxResult best_;
};

namespace detail {

inline double penalised_objective(const RodState& rod, const std::optional<Vec3>& target, double w) {
  double f = bending_energy(rod);
  if (target) f += 0.5 * w * (rod.tip() - *target).squaredNorm();
  return f;
}

inline Eigen::VectorXd penalised_gradient(const RodState& rod, const std::optional<Vec3>& target,
                                          double w) {
  Eigen::VectorXd g = bending_energy_gradient(rod);
  if (target) g += w * tip_jacobian(rod).transpose() * (rod.tip() - *target);
  return g;
}

}  // namespace detail

/// Penalised objective and its gradient, exposed for checking.
inline double relax_objective(const RodState& rod, const std::optional<Vec3>& target, double w) {
  return detail::penalised_objective(rod, target, w);
}
inline Eigen::VectorXd relax_gradient(const RodState& rod, const std::optional<Vec3>& target, double w) {
  return detail::penalised_gradient(rod, target, w);
}

/// Minimises bending energy over the joint rotation vectors with the base
/// segment held fixed. An optional tip target is enforced by a quadratic
/// penalty whose weight grows by penalty_growth over outer_iterations
/// rounds. Each step descends along the gradient scaled by the
/// Gauss-Newton metric E*I + w*J^T J (plain gradient descent with step 1/E
/// when no tip is pinned), with Armijo backtracking.
inline RelaxResult relax(const RodState& input, const RelaxOptions& opts = {}) {
  input.validate();
  const double reach = input.segment_length * static_cast<double>(input.segments());
  if (opts.tip_target && (*opts.tip_target - input.base).norm() > reach) {
    throw Error(Errc::UnreachableConstraint, "tip target beyond the rod's reach");
  }

  RelaxResult result;
  result.rod = input;
  RodState rod = input;
  const double E = input.stiffness;
  const int outer = opts.tip_target ? std::max(1, opts.outer_iterations) : 1;
  double w = opts.tip_target ? opts.initial_penalty : 0.0;
  bool converged = false;
  bool precision_limited = false;
  int total_iterations = 0;
  double g_inf = 0.0;

  for (int round = 0; round < outer; ++round) {
    if (round > 0) w *= opts.penalty_growth;
    converged = false;
    precision_limited = false;
    result.objective_trace.clear();
    double f = detail::penalised_objective(rod, opts.tip_target, w);
    result.objective_trace.push_back(f);
    for (int it = 0; it < opts.max_iterations; ++it) {
      const Eigen::VectorXd g = detail::penalised_gradient(rod, opts.tip_target, w);
      g_inf = g.size() ? g.cwiseAbs().maxCoeff() : 0.0;
      if (g_inf < opts.gradient_tol) {
        converged = true;
        break;
      }
      Eigen::VectorXd dir;
      if (opts.tip_target) {
        // (E I + w J^T J)^-1 g via the 3x3 Woodbury form.
        const Eigen::MatrixXd J = tip_jacobian(rod);
        const Mat3 S = (E / w) * Mat3::Identity() + J * J.transpose();
        dir = -(g - J.transpose() * S.ldlt().solve(J * g)) / E;
      } else {
        dir = -g / E;
      }
      const double slope = g.dot(dir);
      const auto kappa = joint_curvatures(rod);
      double step = 1.0;
      bool accepted = false;
      RodState trial;
      double f_trial = f;
      for (int ls = 0; ls < 60; ++ls) {
        std::vector<Vec3> next(kappa.size());
        for (std::size_t j = 0; j < kappa.size(); ++j) {
          next[j] = kappa[j] + step * dir.segment<3>(3 * static_cast<Eigen::Index>(j));
        }
        trial = with_joint_rotations(rod, next);
        f_trial = detail::penalised_objective(trial, opts.tip_target, w);
        if (f_trial <= f + 1e-4 * step * slope) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      ++total_iterations;
      if (!accepted) {
        // No representable decrease. Tip roundoff is amplified by w in the
        // gradient, so the tolerance scales with the penalty weight here.
        converged = g_inf < opts.gradient_tol * std::max(1.0, w);
        precision_limited = converged;
        break;
      }
      rod = std::move(trial);
      f = f_trial;
      result.objective_trace.push_back(f);
    }
  }

  result.rod = rod;
  result.bending_energy = bending_energy(rod);
  result.penalty_weight = w;
  result.gradient_inf_norm = g_inf;
  result.tip_residual = opts.tip_target ? (rod.tip() - *opts.tip_target).norm() : 0.0;
  result.iterations = total_iterations;
  result.converged = converged;
  result.precision_limited = precision_limited;
  if (!converged) throw RelaxNonConvergence(std::move(result));
  return result;
}

struct SynthOptions {
  std::size_t n_segments = 50;
  double segment_length = 2.0;  // mm
  double tip_angle = 1.0;       // rad, bound on total rest bending
  double stiffness = 1.0;
  std::uint64_t seed = 0;
};

/// Straight rod with a smooth random rest curvature whose bending direction
/// winds slowly along the wire; each joint bends at most
/// tip_angle / n_segments.
inline RodState synthetic_rod(const SynthOptions& o) {
  if (o.n_segments < 2) throw Error(Errc::InvalidArgument, "need at least two segments");
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;
  const double turns = 0.5 + 0.5 * unit(rng);
  const double dir0 = two_pi * unit(rng);
  const double freq = 0.5 + unit(rng);
  const double phase = two_pi * unit(rng);

  const std::size_t n_joints = o.n_segments - 1;
  const double bound = o.tip_angle / static_cast<double>(o.n_segments);
  std::vector<Vec3> rest(n_joints);
  for (std::size_t j = 0; j < n_joints; ++j) {
    const double s = n_joints > 1 ? static_cast<double>(j) / static_cast<double>(n_joints - 1) : 0.0;
    const double mag = bound * (0.5 + 0.5 * std::sin(two_pi * freq * s + phase));
    const double dir = dir0 + two_pi * turns * s;
    rest[j] = mag * Vec3(std::cos(dir), std::sin(dir), 0.0);
  }
  return RodState::straight(o.n_segments, o.segment_length, o.stiffness, std::move(rest));
}

/// Centerline of the relaxed synthetic rod (N+1 points from the base).
inline Polyline<3> synth_guidewire(const SynthOptions& o) {
  return relax(synthetic_rod(o)).rod.centerline();
}

}  // namespace wirerecon
