#pragma once

// File-level commands: synthesise a stereo dataset, reconstruct from
// annotations, evaluate curves or episodes, relax a rod.

#include <Eigen/Geometry>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "wirerecon/bspline.hpp"
#include "wirerecon/cameras.hpp"
#include "wirerecon/error.hpp"
#include "wirerecon/io.hpp"
#include "wirerecon/metrics.hpp"
#include "wirerecon/rod.hpp"
#include "wirerecon/stereo.hpp"

namespace wirerecon {

struct RigOptions {
  double focal_px = 1500.0;
  int image_px = 1024;
  double half_vergence_rad = std::numbers::pi / 6.0;  // each camera +-30 deg about +y
  double baseline_mm = 300.0;
};

/// Camera looking at the world origin from angle `yaw` about the vertical
/// (+y) axis, principal point at the image centre.
inline ProjectiveCamera look_at_origin_camera(double yaw, double distance_mm, double focal_px,
                                             int image_px) {
  const Mat3 R_world_cam = Eigen::AngleAxisd(yaw, Vec3::UnitY()).toRotationMatrix();
  const Vec3 centre = R_world_cam * Vec3(0.0, 0.0, -distance_mm);
  const Mat3 R = R_world_cam.transpose();
  Mat3 K = Mat3::Identity();
  K(0, 0) = focal_px;
  K(1, 1) = focal_px;
  K(0, 2) = 0.5 * image_px;
  K(1, 2) = 0.5 * image_px;
  ProjectiveCamera cam;
  cam.P.leftCols<3>() = K * R;
  cam.P.col(3) = -K * R * centre;
  cam.image_size = {image_px, image_px};
  return cam;
}

struct StereoRig {
  ProjectiveCamera a;
  ProjectiveCamera b;
};

/// Symmetric rig: cameras at -+half_vergence about +y, both aimed at the
/// origin, centres baseline_mm apart.
inline StereoRig default_rig(const RigOptions& o = {}) {
  const double distance = o.baseline_mm / (2.0 * std::sin(o.half_vergence_rad));
  return {look_at_origin_camera(-o.half_vergence_rad, distance, o.focal_px, o.image_px),
          look_at_origin_camera(o.half_vergence_rad, distance, o.focal_px, o.image_px)};
}

/// Places a rod centreline in the rig's field of view: the base segment
/// direction maps to +y, the wire is reversed so the free tip comes first,
/// and its bounding box is centred on the origin.
inline Polyline<3> place_wire(const Polyline<3>& rod_centerline) {
  const Mat3 R = Eigen::AngleAxisd(-0.5 * std::numbers::pi, Vec3::UnitX()).toRotationMatrix();
  Polyline<3> out(rod_centerline.rbegin(), rod_centerline.rend());
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (auto& p : out) {
    p = R * p;
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec3 centre = 0.5 * (lo + hi);
  for (auto& p : out) p -= centre;
  return out;
}

struct SynthConfig {
  std::filesystem::path out_dir = "synth";
  std::optional<std::filesystem::path> camera_a;  // default rig when unset
  std::optional<std::filesystem::path> camera_b;
  double noise_px = 0.0;
  std::uint64_t seed = 0;
  std::size_t n_segments = 50;
  double segment_length = 2.0;
  double tip_angle = 1.0;
  double stiffness = 1.0;
  int frame = 0;

  void validate() const {
    if (!(noise_px >= 0.0)) throw Error(Errc::InvalidArgument, "noise must be >= 0");
    if (n_segments < 3) throw Error(Errc::InvalidArgument, "need at least 3 segments");
    if (!(segment_length > 0.0)) throw Error(Errc::InvalidArgument, "segment length must be positive");
    if (!(stiffness > 0.0)) throw Error(Errc::InvalidArgument, "stiffness must be positive");
    if (!std::isfinite(tip_angle)) throw Error(Errc::InvalidArgument, "tip angle must be finite");
  }
};

struct SynthOutputs {
  std::filesystem::path truth;
  std::filesystem::path camera_a;
  std::filesystem::path camera_b;
  std::filesystem::path annotation_a;
  std::filesystem::path annotation_b;
};

/// Writes truth.json, camera_a.json, camera_b.json, annotation_a.json and
/// annotation_b.json into out_dir. Projection uses the cameras as written
/// (rounded to file precision).
inline SynthOutputs cmd_synth(const SynthConfig& cfg) {
  cfg.validate();
  SynthOptions so;
  so.n_segments = cfg.n_segments;
  so.segment_length = cfg.segment_length;
  so.tip_angle = cfg.tip_angle;
  so.stiffness = cfg.stiffness;
  so.seed = cfg.seed;
  const Polyline<3> wire = place_wire(synth_guidewire(so));

  StereoRig rig = default_rig();
  if (cfg.camera_a) rig.a = io::camera_from_json(io::read_json_file(*cfg.camera_a));
  if (cfg.camera_b) rig.b = io::camera_from_json(io::read_json_file(*cfg.camera_b));

  SynthOutputs out{cfg.out_dir / "truth.json", cfg.out_dir / "camera_a.json", cfg.out_dir / "camera_b.json",
                   cfg.out_dir / "annotation_a.json", cfg.out_dir / "annotation_b.json"};
  const io::json ja = io::camera_to_json(rig.a);
  const io::json jb = io::camera_to_json(rig.b);
  rig.a = io::camera_from_json(ja);
  rig.b = io::camera_from_json(jb);
  io::write_json_file(out.camera_a, ja);
  io::write_json_file(out.camera_b, jb);
  io::write_json_file(out.truth, io::curve_to_json(fit_curve<3>(wire, 3)));

  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> noise(0.0, 1.0);
  const auto annotate = [&](const ProjectiveCamera& cam, char name) {
    io::Annotation ann;
    ann.frame = cfg.frame;
    ann.camera = name;
    for (const auto& X : wire) {
      Vec2 x = project(cam, X);
      if (cfg.noise_px > 0.0) {
        const double du = noise(rng);
        const double dv = noise(rng);
        x += cfg.noise_px * Vec2(du, dv);
      }
      ann.points.push_back(x);
    }
    return ann;
  };
  io::write_json_file(out.annotation_a, io::annotation_to_json(annotate(rig.a, 'A')));
  io::write_json_file(out.annotation_b, io::annotation_to_json(annotate(rig.b, 'B')));
  return out;
}

struct ReconstructConfig {
  std::filesystem::path camera_a;
  std::filesystem::path camera_b;
  std::vector<std::filesystem::path> annotations;
  std::filesystem::path out = "report.json";
  std::size_t n_samples = kDefaultMatchSamples;
  std::size_t n_dense = kDefaultDenseSamples;
  bool anchor_endpoints = true;

  void validate() const {
    if (n_samples < 4) throw Error(Errc::InvalidArgument, "samples must be >= 4");
    if (n_dense < 2) throw Error(Errc::InvalidArgument, "dense samples must be >= 2");
    if (annotations.empty()) throw Error(Errc::InvalidArgument, "no annotation files given");
  }
};

struct FrameReport {
  int frame = 0;
  ReconstructionReport report;
};

/// Reconstructs every frame found in the annotation files (one A and one B
/// polyline per frame) and writes the report(s): a single object for one
/// frame, otherwise an array ordered by frame.
inline std::vector<FrameReport> cmd_reconstruct(const ReconstructConfig& cfg) {
  cfg.validate();
  const ProjectiveCamera cam_a = io::camera_from_json(io::read_json_file(cfg.camera_a));
  const ProjectiveCamera cam_b = io::camera_from_json(io::read_json_file(cfg.camera_b));

  std::map<int, std::map<char, Polyline<2>>> frames;
  for (const auto& path : cfg.annotations) {
    for (auto& ann : io::annotations_from_json(io::read_json_file(path))) {
      auto& slot = frames[ann.frame];
      if (slot.count(ann.camera)) {
        throw Error(Errc::ParseError, "frame " + std::to_string(ann.frame) + " has two annotations for camera " +
                                          std::string(1, ann.camera));
      }
      slot[ann.camera] = std::move(ann.points);
    }
  }

  MatchOptions mo;
  mo.n_samples = cfg.n_samples;
  mo.n_dense = cfg.n_dense;
  mo.anchor_endpoints = cfg.anchor_endpoints;
  std::vector<FrameReport> reports;
  for (const auto& [frame, views] : frames) {
    if (!views.count('A') || !views.count('B')) {
      throw Error(Errc::ParseError, "frame " + std::to_string(frame) + " needs annotations for both cameras");
    }
    const PlanarCurve ca = PlanarCurve::from_polyline(views.at('A'));
    const PlanarCurve cb = PlanarCurve::from_polyline(views.at('B'));
    reports.push_back({frame, reconstruct_curve(cam_a, cam_b, ca, cb, mo)});
  }

  io::json out;
  if (reports.size() == 1) {
    out = io::report_to_json(reports.front().frame, reports.front().report);
  } else {
    out = io::json::array();
    for (const auto& r : reports) out.push_back(io::report_to_json(r.frame, r.report));
  }
  io::write_json_file(cfg.out, out);
  return reports;
}

namespace detail {

struct LabelledCurve {
  std::string label;
  SpatialCurve curve;
};

inline std::vector<LabelledCurve> load_curves(const std::filesystem::path& path) {
  const io::json j = io::read_json_file(path);
  std::vector<io::json> items;
  if (j.is_array()) {
    items.assign(j.begin(), j.end());
  } else {
    items.push_back(j);
  }
  if (items.empty()) throw Error(Errc::ParseError, path.string() + ": no curves");
  std::vector<LabelledCurve> out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    switch (io::detect_schema(items[i])) {
      case io::Schema::Curve:
        out.push_back({std::to_string(i), io::curve_from_json<3>(items[i])});
        break;
      case io::Schema::Report: {
        auto r = io::report_from_json(items[i]);
        out.push_back({std::to_string(r.frame), std::move(r.curve)});
        break;
      }
      case io::Schema::Unknown:
        throw Error(Errc::ParseError, path.string() + ": unrecognised object");
      default:
        throw Error(Errc::SchemaMismatch, path.string() + ": expected a curve or reconstruction report");
    }
  }
  return out;
}

}  // namespace detail

inline constexpr const char* kCurveCsvHeader = "item,max_ed_mm,mete_mm,mers_mm,frechet_mm";
inline constexpr const char* kEpisodeCsvHeader =
    "episode,success,path_length_mm,spl,safety,f_max_n,f_mean_n";

/// CSV comparing predicted curves (curve or report files, one object or an
/// array) with ground-truth curves item by item. With more than one item a
/// final `mean` row averages the columns.
inline std::string cmd_evaluate_curves(const std::filesystem::path& pred_path,
                                       const std::filesystem::path& truth_path,
                                       std::size_t n = kDefaultMetricSamples) {
  const auto pred = detail::load_curves(pred_path);
  const auto truth = detail::load_curves(truth_path);
  if (pred.size() != truth.size()) {
    throw Error(Errc::SchemaMismatch, "prediction and truth hold different numbers of curves");
  }
  std::ostringstream csv;
  csv << kCurveCsvHeader << '\n';
  CurveMetrics sum;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const CurveMetrics m = curve_metrics(pred[i].curve, truth[i].curve, n);
    sum.max_ed += m.max_ed;
    sum.mete += m.mete;
    sum.mers += m.mers;
    sum.frechet += m.frechet;
    csv << pred[i].label << ',' << io::format_number(m.max_ed) << ',' << io::format_number(m.mete) << ','
        << io::format_number(m.mers) << ',' << io::format_number(m.frechet) << '\n';
  }
  if (pred.size() > 1) {
    const double k = static_cast<double>(pred.size());
    csv << "mean," << io::format_number(sum.max_ed / k) << ',' << io::format_number(sum.mete / k) << ','
        << io::format_number(sum.mers / k) << ',' << io::format_number(sum.frechet / k) << '\n';
  }
  return csv.str();
}

/// CSV with one row per episode; the batch SPL is repeated on each row and
/// left empty when no episode succeeded.
inline std::string cmd_evaluate_episodes(const std::filesystem::path& path) {
  const io::json j = io::read_json_file(path);
  std::vector<io::json> items;
  if (j.is_array()) {
    items.assign(j.begin(), j.end());
  } else {
    items.push_back(j);
  }
  std::vector<Episode> episodes;
  for (const auto& item : items) {
    const auto schema = io::detect_schema(item);
    if (schema != io::Schema::Episode) {
      throw Error(schema == io::Schema::Unknown ? Errc::ParseError : Errc::SchemaMismatch,
                  path.string() + ": expected episode objects");
    }
    episodes.push_back(io::episode_from_json(item));
  }
  const EpisodeMetrics m = episode_metrics(episodes);
  std::ostringstream csv;
  csv << kEpisodeCsvHeader << '\n';
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    const auto& r = m.episodes[i];
    csv << i << ',' << (episodes[i].success ? 1 : 0) << ',' << io::format_number(r.path_length) << ','
        << (m.spl_defined ? io::format_number(m.spl) : std::string()) << ',' << io::format_number(r.safety)
        << ',' << io::format_number(r.f_max) << ',' << io::format_number(r.f_mean) << '\n';
  }
  return csv.str();
}

struct RelaxConfig {
  std::filesystem::path out = "rod.json";
  std::size_t n_segments = 50;
  double segment_length = 2.0;
  double tip_angle = 1.0;
  double stiffness = 1.0;
  std::uint64_t seed = 0;
  std::optional<Vec3> tip_target;  // rod frame, base at the origin
};

/// Relaxes the synthetic rod (optionally with a pinned tip) and writes its
/// centreline as an interpolating cubic curve in the rod frame.
inline RelaxResult cmd_relax(const RelaxConfig& cfg) {
  SynthOptions so;
  so.n_segments = cfg.n_segments;
  so.segment_length = cfg.segment_length;
  so.tip_angle = cfg.tip_angle;
  so.stiffness = cfg.stiffness;
  so.seed = cfg.seed;
  RelaxOptions ro;
  ro.tip_target = cfg.tip_target;
  RelaxResult result = relax(synthetic_rod(so), ro);
  io::write_json_file(cfg.out, io::curve_to_json(fit_curve<3>(result.rod.centerline(), 3)));
  return result;
}

}  // namespace wirerecon
