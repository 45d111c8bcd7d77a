#pragma once

// Curve comparison (MaxED, METE, MERS, discrete Frechet) and navigation
// episode metrics (reward, force, path length, SPL, safety).

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "wirerecon/bspline.hpp"
#include "wirerecon/error.hpp"
#include "wirerecon/types.hpp"

namespace wirerecon {

struct CurveMetrics {
  double max_ed = 0.0;   // max pointwise distance
  double mete = 0.0;     // distance at the tip sample (k = 0)
  double mers = 0.0;     // mean pointwise distance
  double frechet = 0.0;  // discrete Frechet over the same samples
};

/// Discrete Frechet distance (Eiter-Mannila), O(n*m) time, O(m) memory.
template <int Dim>
double discrete_frechet(std::span<const Point<Dim>> a, std::span<const Point<Dim>> b) {
  if (a.empty() || b.empty()) throw Error(Errc::InvalidArgument, "Frechet distance of an empty sequence");
  std::vector<double> prev(b.size()), cur(b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double d = (a[i] - b[j]).norm();
      double reach;
      if (i == 0 && j == 0) {
        reach = d;
      } else if (i == 0) {
        reach = std::max(cur[j - 1], d);
      } else if (j == 0) {
        reach = std::max(prev[0], d);
      } else {
        reach = std::max(std::min({prev[j], prev[j - 1], cur[j - 1]}), d);
      }
      cur[j] = reach;
    }
    std::swap(prev, cur);
  }
  return prev.back();
}

inline constexpr std::size_t kDefaultMetricSamples = 64;

/// Both curves are sampled on their uniform parameter grids; sample k of
/// one is compared with sample k of the other.
inline CurveMetrics curve_metrics(const SpatialCurve& pred, const SpatialCurve& truth,
                                  std::size_t n = kDefaultMetricSamples) {
  const auto sp = sample_uniform(pred, n);
  const auto st = sample_uniform(truth, n);
  Polyline<3> pa(n), pb(n);
  CurveMetrics m;
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    pa[k] = sp[k].point;
    pb[k] = st[k].point;
    const double d = (pa[k] - pb[k]).norm();
    m.max_ed = std::max(m.max_ed, d);
    sum += d;
  }
  m.mers = sum / static_cast<double>(n);
  m.mete = (pa[0] - pb[0]).norm();
  m.frechet = discrete_frechet<3>(pa, pb);
  return m;
}

inline constexpr double kGoalThresholdMm = 8.0;
inline constexpr double kTerminalReward = 10.0;
inline constexpr double kSafeForceN = 2.0;

/// Terminal reward inside the goal ball (boundary included), otherwise the
/// negative distance to the goal.
inline double reward(const Vec3& tip, const Vec3& goal, double threshold = kGoalThresholdMm) {
  const double d = (tip - goal).norm();
  return d <= threshold ? kTerminalReward : -d;
}

inline double force_magnitude(const Vec3& f) { return f.norm(); }

struct Episode {
  std::vector<Vec3> tip_positions;  // mm
  std::vector<Vec3> forces;         // N, empty or one per step
  Vec3 goal = Vec3::Zero();
  bool success = false;

  void validate() const {
    if (tip_positions.empty()) throw Error(Errc::InvalidArgument, "episode needs at least one step");
    if (!forces.empty() && forces.size() != tip_positions.size()) {
      throw Error(Errc::InvalidArgument, "forces must be empty or match the number of steps");
    }
  }
};

struct EpisodeRow {
  double path_length = 0.0;
  double safety = 1.0;
  double f_max = 0.0;
  double f_mean = 0.0;
};

struct EpisodeMetrics {
  std::vector<EpisodeRow> episodes;
  double spl = 0.0;
  bool spl_defined = false;  // false when no episode succeeded
  double optimal_path_length = 0.0;
};

inline double path_length(std::span<const Vec3> positions) {
  double total = 0.0;
  for (std::size_t t = 1; t < positions.size(); ++t) total += (positions[t] - positions[t - 1]).norm();
  return total;
}

/// Per-episode path length, safety and force statistics plus the batch SPL,
/// whose optimal length is the shortest successful path in the batch.
inline EpisodeMetrics episode_metrics(std::span<const Episode> episodes) {
  if (episodes.empty()) throw Error(Errc::InvalidArgument, "need at least one episode");
  EpisodeMetrics out;
  double shortest = std::numeric_limits<double>::infinity();
  for (const auto& ep : episodes) {
    ep.validate();
    EpisodeRow row;
    row.path_length = path_length(ep.tip_positions);
    if (!ep.forces.empty()) {
      std::size_t unsafe = 0;
      double sum = 0.0;
      for (const auto& f : ep.forces) {
        const double mag = force_magnitude(f);
        if (mag >= kSafeForceN) ++unsafe;
        row.f_max = std::max(row.f_max, mag);
        sum += mag;
      }
      const double n = static_cast<double>(ep.forces.size());
      row.safety = 1.0 - static_cast<double>(unsafe) / n;
      row.f_mean = sum / n;
    }
    if (ep.success) shortest = std::min(shortest, row.path_length);
    out.episodes.push_back(row);
  }
  if (std::isinf(shortest)) return out;

  out.spl_defined = true;
  out.optimal_path_length = shortest;
  double sum = 0.0;
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    if (!episodes[i].success) continue;
    const double denom = std::max(out.episodes[i].path_length, shortest);
    sum += denom > 0.0 ? shortest / denom : 1.0;
  }
  out.spl = sum / static_cast<double>(episodes.size());
  return out;
}

}  // namespace wirerecon
