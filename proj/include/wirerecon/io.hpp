#pragma once

// JSON file schemas (cameras, curves, annotations, chains, episodes,
// reconstruction reports) and locale-independent number formatting.

#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "wirerecon/bspline.hpp"
#include "wirerecon/cameras.hpp"
#include "wirerecon/error.hpp"
#include "wirerecon/metrics.hpp"
#include "wirerecon/spherical.hpp"
#include "wirerecon/stereo.hpp"

namespace wirerecon::io {

using json = nlohmann::ordered_json;

inline constexpr int kSignificantDigits = 9;

/// Shortest decimal text for x rounded to 9 significant digits.
inline std::string format_number(double x) {
  if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::general,
                                 kSignificantDigits);
  std::string s(buf.data(), res.ptr);
  if (s == "-0") s = "0";
  return s;
}

/// x rounded to 9 significant digits; serialised JSON numbers go through
/// this so files carry at most 9 significant digits.
inline double round_sig(double x) {
  if (!std::isfinite(x) || x == 0.0) return x == 0.0 ? 0.0 : x;
  const std::string s = format_number(x);
  double out = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), out);
  return out;
}

namespace detail {

inline void require_object(const json& j, std::string_view what) {
  if (!j.is_object()) throw Error(Errc::ParseError, std::string(what) + ": expected a JSON object");
}

inline void check_keys(const json& j, std::initializer_list<std::string_view> allowed,
                       std::string_view what) {
  require_object(j, what);
  for (const auto& item : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || item.key() == a;
    if (!known) {
      throw Error(Errc::ParseError, std::string(what) + ": unknown field '" + item.key() + "'");
    }
  }
}

inline const json& field(const json& j, const char* key, std::string_view what) {
  const auto it = j.find(key);
  if (it == j.end()) throw Error(Errc::ParseError, std::string(what) + ": missing field '" + key + "'");
  return *it;
}

inline double number(const json& j, std::string_view what) {
  if (!j.is_number()) throw Error(Errc::ParseError, std::string(what) + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw Error(Errc::ParseError, std::string(what) + ": non-finite number");
  return v;
}

template <int Dim>
Point<Dim> point(const json& j, std::string_view what) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(Dim)) {
    throw Error(Errc::ParseError, std::string(what) + ": expected an array of " + std::to_string(Dim) +
                                      " numbers");
  }
  Point<Dim> p;
  for (int i = 0; i < Dim; ++i) p(i) = number(j[static_cast<std::size_t>(i)], what);
  return p;
}

template <typename Derived>
json vector_json(const Eigen::MatrixBase<Derived>& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(round_sig(v(i)));
  return a;
}

template <int Dim>
Polyline<Dim> points(const json& j, std::string_view what) {
  if (!j.is_array()) throw Error(Errc::ParseError, std::string(what) + ": expected an array of points");
  Polyline<Dim> out;
  out.reserve(j.size());
  for (const auto& p : j) out.push_back(point<Dim>(p, what));
  return out;
}

}  // namespace detail

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, path.string() + ": " + e.what());
  }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(Errc::IoError, "failed writing '" + path.string() + "'");
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

// Cameras: { "P": [[4 numbers] x 3], "image_size": [w, h] }

inline json camera_to_json(const ProjectiveCamera& cam) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back(detail::vector_json(cam.P.row(r).transpose()));
  return json{{"P", rows}, {"image_size", {cam.image_size[0], cam.image_size[1]}}};
}

inline ProjectiveCamera camera_from_json(const json& j) {
  constexpr std::string_view what = "camera";
  detail::check_keys(j, {"P", "image_size"}, what);
  const json& rows = detail::field(j, "P", what);
  if (!rows.is_array() || rows.size() != 3) throw Error(Errc::ParseError, "camera: P must have 3 rows");
  ProjectiveCamera cam;
  for (int r = 0; r < 3; ++r) cam.P.row(r) = detail::point<4>(rows[static_cast<std::size_t>(r)], "camera.P").transpose();
  const json& size = detail::field(j, "image_size", what);
  if (!size.is_array() || size.size() != 2 || !size[0].is_number_integer() || !size[1].is_number_integer()) {
    throw Error(Errc::ParseError, "camera: image_size must be [width, height] integers");
  }
  cam.image_size = {size[0].get<int>(), size[1].get<int>()};
  if (cam.image_size[0] <= 0 || cam.image_size[1] <= 0) {
    throw Error(Errc::ParseError, "camera: image_size must be positive");
  }
  return cam;
}

// Curves: { "degree": p, "knots": [...], "control_points": [[x, y(, z)], ...] }

template <int Dim>
json curve_to_json(const BSplineCurve<Dim>& curve) {
  json knots = json::array();
  for (double k : curve.knots.knots) knots.push_back(round_sig(k));
  json ctrl = json::array();
  for (const auto& c : curve.control_points) ctrl.push_back(detail::vector_json(c));
  return json{{"degree", curve.knots.degree}, {"knots", knots}, {"control_points", ctrl}};
}

template <int Dim>
BSplineCurve<Dim> curve_from_json(const json& j) {
  constexpr std::string_view what = "curve";
  detail::check_keys(j, {"degree", "knots", "control_points"}, what);
  const json& degree = detail::field(j, "degree", what);
  if (!degree.is_number_integer()) throw Error(Errc::ParseError, "curve: degree must be an integer");
  BSplineCurve<Dim> curve;
  curve.knots.degree = degree.get<int>();
  const json& knots = detail::field(j, "knots", what);
  if (!knots.is_array()) throw Error(Errc::ParseError, "curve: knots must be an array");
  for (const auto& k : knots) curve.knots.knots.push_back(detail::number(k, "curve.knots"));
  curve.control_points = detail::points<Dim>(detail::field(j, "control_points", what), "curve.control_points");
  try {
    curve.validate();
  } catch (const Error& e) {
    throw Error(Errc::ParseError, std::string("curve: ") + e.what());
  }
  return curve;
}

// Annotations: { "frame": int, "camera": "A" | "B", "points": [[u, v], ...] }

struct Annotation {
  int frame = 0;
  char camera = 'A';
  Polyline<2> points;
};

inline json annotation_to_json(const Annotation& a) {
  json pts = json::array();
  for (const auto& p : a.points) pts.push_back(detail::vector_json(p));
  return json{{"frame", a.frame}, {"camera", std::string(1, a.camera)}, {"points", pts}};
}

inline Annotation annotation_from_json(const json& j) {
  constexpr std::string_view what = "annotation";
  detail::check_keys(j, {"frame", "camera", "points"}, what);
  Annotation a;
  const json& frame = detail::field(j, "frame", what);
  if (!frame.is_number_integer()) throw Error(Errc::ParseError, "annotation: frame must be an integer");
  a.frame = frame.get<int>();
  const json& cam = detail::field(j, "camera", what);
  if (!cam.is_string() || (cam != "A" && cam != "B")) {
    throw Error(Errc::ParseError, "annotation: camera must be \"A\" or \"B\"");
  }
  a.camera = cam.get<std::string>()[0];
  a.points = detail::points<2>(detail::field(j, "points", what), "annotation.points");
  if (a.points.size() < 2) throw Error(Errc::ParseError, "annotation: at least 2 points required");
  return a;
}

/// A file holds one annotation object or an array of them.
inline std::vector<Annotation> annotations_from_json(const json& j) {
  std::vector<Annotation> out;
  if (j.is_array()) {
    for (const auto& item : j) out.push_back(annotation_from_json(item));
  } else {
    out.push_back(annotation_from_json(j));
  }
  return out;
}

// Spherical chains: { "tip": [x, y, z], "r": s, "offsets": [[theta, phi], ...] }

inline json chain_to_json(const SphericalChain& c) {
  json offsets = json::array();
  for (const auto& o : c.offsets) offsets.push_back({round_sig(o.theta), round_sig(o.phi)});
  return json{{"tip", detail::vector_json(c.tip)}, {"r", round_sig(c.r)}, {"offsets", offsets}};
}

inline SphericalChain chain_from_json(const json& j) {
  constexpr std::string_view what = "chain";
  detail::check_keys(j, {"tip", "r", "offsets"}, what);
  SphericalChain c;
  c.tip = detail::point<3>(detail::field(j, "tip", what), "chain.tip");
  c.r = detail::number(detail::field(j, "r", what), "chain.r");
  if (!(c.r > 0.0)) throw Error(Errc::ParseError, "chain: r must be positive");
  for (const auto& p : detail::points<2>(detail::field(j, "offsets", what), "chain.offsets")) {
    c.offsets.push_back({p.x(), p.y()});
  }
  return c;
}

// Episodes: { "tip": [[x, y, z], ...], "forces": [[fx, fy, fz], ...], "goal": [x, y, z], "success": bool }

inline json episode_to_json(const Episode& e) {
  json tip = json::array();
  for (const auto& p : e.tip_positions) tip.push_back(detail::vector_json(p));
  json forces = json::array();
  for (const auto& f : e.forces) forces.push_back(detail::vector_json(f));
  return json{{"tip", tip}, {"forces", forces}, {"goal", detail::vector_json(e.goal)}, {"success", e.success}};
}

inline Episode episode_from_json(const json& j) {
  constexpr std::string_view what = "episode";
  detail::check_keys(j, {"tip", "forces", "goal", "success"}, what);
  Episode e;
  e.tip_positions = detail::points<3>(detail::field(j, "tip", what), "episode.tip");
  if (j.contains("forces")) e.forces = detail::points<3>(j.at("forces"), "episode.forces");
  e.goal = detail::point<3>(detail::field(j, "goal", what), "episode.goal");
  const json& success = detail::field(j, "success", what);
  if (!success.is_boolean()) throw Error(Errc::ParseError, "episode: success must be a boolean");
  e.success = success.get<bool>();
  try {
    e.validate();
  } catch (const Error& err) {
    throw Error(Errc::ParseError, std::string("episode: ") + err.what());
  }
  return e;
}

// Reconstruction reports: { "frame": int, "accepted": bool, "mean_reproj_px": f, "curve": <curve> }

inline json report_to_json(int frame, const ReconstructionReport& r) {
  return json{{"frame", frame},
              {"accepted", r.accepted},
              {"mean_reproj_px", round_sig(r.mean_reproj_px)},
              {"curve", curve_to_json(r.curve)}};
}

struct ReportRecord {
  int frame = 0;
  bool accepted = false;
  double mean_reproj_px = 0.0;
  SpatialCurve curve;
};

inline ReportRecord report_from_json(const json& j) {
  constexpr std::string_view what = "report";
  detail::check_keys(j, {"frame", "accepted", "mean_reproj_px", "curve"}, what);
  ReportRecord r;
  const json& frame = detail::field(j, "frame", what);
  if (!frame.is_number_integer()) throw Error(Errc::ParseError, "report: frame must be an integer");
  r.frame = frame.get<int>();
  const json& accepted = detail::field(j, "accepted", what);
  if (!accepted.is_boolean()) throw Error(Errc::ParseError, "report: accepted must be a boolean");
  r.accepted = accepted.get<bool>();
  r.mean_reproj_px = detail::number(detail::field(j, "mean_reproj_px", what), "report.mean_reproj_px");
  r.curve = curve_from_json<3>(detail::field(j, "curve", what));
  return r;
}

enum class Schema { Curve, Report, Episode, Annotation, Camera, Chain, Unknown };

/// Classifies an object by its field set.
inline Schema detect_schema(const json& j) {
  if (!j.is_object()) return Schema::Unknown;
  if (j.contains("control_points")) return Schema::Curve;
  if (j.contains("accepted") || j.contains("mean_reproj_px")) return Schema::Report;
  if (j.contains("goal") || j.contains("forces") || j.contains("success")) return Schema::Episode;
  if (j.contains("camera") && j.contains("points")) return Schema::Annotation;
  if (j.contains("P")) return Schema::Camera;
  if (j.contains("offsets")) return Schema::Chain;
  return Schema::Unknown;
}

}  // namespace wirerecon::io
