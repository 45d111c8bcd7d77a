#include <gtest/gtest.h>

#include <fstream>
#include <sstream>
#include <string>

#include "test_support.hpp"
#include "wirerecon/pipeline.hpp"

namespace wirerecon {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename Fn>
Error catch_error(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "no error raised";
  return Error(Errc::InvalidArgument, "none");
}

ReconstructConfig reconstruct_config(const SynthOutputs& s, const fs::path& out) {
  ReconstructConfig rc;
  rc.camera_a = s.camera_a;
  rc.camera_b = s.camera_b;
  rc.annotations = {s.annotation_a, s.annotation_b};
  rc.out = out;
  return rc;
}

double csv_field(const std::string& csv, std::size_t row, std::size_t col) {
  std::istringstream in(csv);
  std::string line;
  for (std::size_t r = 0; r <= row; ++r) std::getline(in, line);
  std::istringstream fields(line);
  std::string cell;
  for (std::size_t c = 0; c <= col; ++c) std::getline(fields, cell, ',');
  return std::stod(cell);
}

TEST(Io, FormatNumber) {
  EXPECT_EQ(io::format_number(0.1), "0.1");
  EXPECT_EQ(io::format_number(1.0 / 3.0), "0.333333333");
  EXPECT_EQ(io::format_number(2.0), "2");
  EXPECT_EQ(io::round_sig(1.0 / 3.0), 0.333333333);
}

TEST(Io, UnknownKeyIsNamed) {
  const io::json j = io::json::parse(R"({"frame": 0, "camera": "A", "points": [[0,0],[1,1]], "colour": 1})");
  const Error e = catch_error([&] { io::annotation_from_json(j); });
  EXPECT_EQ(e.code(), Errc::ParseError);
  EXPECT_NE(std::string(e.what()).find("colour"), std::string::npos);
}

TEST(Io, SinglePointAnnotation) {
  const io::json j = io::json::parse(R"({"frame": 0, "camera": "B", "points": [[3,4]]})");
  EXPECT_EQ(catch_error([&] { io::annotation_from_json(j); }).code(), Errc::ParseError);
}

TEST(Io, CameraRoundTrip) {
  using testing::Rng;
  Rng rng(71);
  const auto cam = testing::random_camera(rng);
  const auto back = io::camera_from_json(io::json::parse(io::camera_to_json(cam).dump()));
  EXPECT_LT((back.P - cam.P).norm(), 1e-8 * cam.P.norm());
  EXPECT_EQ(back.image_size, cam.image_size);
}

TEST(Io, CurveChainEpisodeRoundTrip) {
  const auto curve = fit_curve<3>(testing::helix(20, 10.0, 40.0, 0.5));
  const auto c2 = io::curve_from_json<3>(io::curve_to_json(curve));
  EXPECT_EQ(c2.knots.degree, 3);
  EXPECT_LT((eval_curve(c2, 0.3) - eval_curve(curve, 0.3)).norm(), 1e-5);

  const SphericalChain chain{Vec3(1, 2, 3), 2.0, {{0.5, -1.0}, {1.0, 3.0}}};
  const auto ch2 = io::chain_from_json(io::chain_to_json(chain));
  EXPECT_EQ(ch2.offsets.size(), 2u);
  EXPECT_EQ(ch2.offsets[1].phi, 3.0);

  Episode ep;
  ep.tip_positions = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
  ep.goal = Vec3(1, 0, 0);
  ep.success = true;
  const auto ep2 = io::episode_from_json(io::episode_to_json(ep));
  EXPECT_EQ(ep2.tip_positions.size(), 2u);
  EXPECT_TRUE(ep2.forces.empty());
  EXPECT_TRUE(ep2.success);
}

TEST(Io, DetectSchema) {
  EXPECT_EQ(io::detect_schema(io::json::parse(R"({"P": []})")), io::Schema::Camera);
  EXPECT_EQ(io::detect_schema(io::json::parse(R"({"goal": [0,0,0]})")), io::Schema::Episode);
  EXPECT_EQ(io::detect_schema(io::json::parse("[1]")), io::Schema::Unknown);
}

TEST(Pipeline, SynthIsDeterministic) {
  SynthConfig cfg;
  cfg.seed = 42;
  cfg.noise_px = 0.7;
  cfg.out_dir = testing::scratch_dir("synth_det_1");
  const auto a = cmd_synth(cfg);
  cfg.out_dir = testing::scratch_dir("synth_det_2");
  const auto b = cmd_synth(cfg);
  EXPECT_EQ(slurp(a.truth), slurp(b.truth));
  EXPECT_EQ(slurp(a.annotation_a), slurp(b.annotation_a));
  EXPECT_EQ(slurp(a.annotation_b), slurp(b.annotation_b));
  EXPECT_EQ(slurp(a.camera_a), slurp(b.camera_a));
}

TEST(Pipeline, AnnotationsInsideFrame) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SynthConfig cfg;
    cfg.seed = seed;
    cfg.out_dir = testing::scratch_dir("synth_frame");
    const auto out = cmd_synth(cfg);
    for (const auto& path : {out.annotation_a, out.annotation_b}) {
      for (const auto& p : io::annotation_from_json(io::read_json_file(path)).points) {
        EXPECT_GE(p.x(), 0.0);
        EXPECT_GE(p.y(), 0.0);
        EXPECT_LT(p.x(), 1024.0);
        EXPECT_LT(p.y(), 1024.0);
      }
    }
  }
}

TEST(Pipeline, TruthSpacingEqualsSegmentLength) {
  SynthConfig cfg;
  cfg.seed = 5;
  cfg.out_dir = testing::scratch_dir("synth_spacing");
  const auto truth = io::curve_from_json<3>(io::read_json_file(cmd_synth(cfg).truth));
  // Equal chords give uniform interpolation parameters k / N.
  const double n = static_cast<double>(cfg.n_segments);
  for (std::size_t k = 1; k <= cfg.n_segments; ++k) {
    const double d = (eval_curve(truth, k / n) - eval_curve(truth, (k - 1) / n)).norm();
    EXPECT_NEAR(d, cfg.segment_length, 1e-5);
  }
}

TEST(Pipeline, NoiselessRoundTrip) {
  SynthConfig cfg;
  cfg.seed = 42;
  cfg.out_dir = testing::scratch_dir("roundtrip");
  const auto s = cmd_synth(cfg);
  const auto reports = cmd_reconstruct(reconstruct_config(s, cfg.out_dir / "report.json"));
  ASSERT_EQ(reports.size(), 1u);
  EXPECT_TRUE(reports[0].report.accepted);
  const std::string csv = cmd_evaluate_curves(cfg.out_dir / "report.json", s.truth);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kCurveCsvHeader);
  EXPECT_LT(csv_field(csv, 1, 1), 0.01);
}

TEST(Pipeline, TruthAgainstItselfIsZero) {
  SynthConfig cfg;
  cfg.seed = 1;
  cfg.out_dir = testing::scratch_dir("self");
  const auto s = cmd_synth(cfg);
  EXPECT_EQ(cmd_evaluate_curves(s.truth, s.truth), std::string(kCurveCsvHeader) + "\n0,0,0,0,0\n");
}

TEST(Pipeline, SwappedCamerasAreRejected) {
  SynthConfig cfg;
  cfg.seed = 42;
  cfg.out_dir = testing::scratch_dir("swapped");
  auto s = cmd_synth(cfg);
  std::swap(s.camera_a, s.camera_b);
  try {
    const auto reports = cmd_reconstruct(reconstruct_config(s, cfg.out_dir / "report.json"));
    ASSERT_EQ(reports.size(), 1u);
    EXPECT_FALSE(reports[0].report.accepted) << "mean reprojection " << reports[0].report.mean_reproj_px << " px";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NoMatches) << e.what();
  }
}

TEST(Pipeline, EvaluateRejectsWrongSchema) {
  SynthConfig cfg;
  cfg.out_dir = testing::scratch_dir("schema");
  const auto s = cmd_synth(cfg);
  EXPECT_EQ(catch_error([&] { cmd_evaluate_curves(s.annotation_a, s.truth); }).code(), Errc::SchemaMismatch);
}

TEST(Pipeline, SingleStepEpisode) {
  const auto dir = testing::scratch_dir("episodes");
  Episode ep;
  ep.tip_positions = {Vec3(1, 1, 1)};
  ep.goal = Vec3(1, 1, 1);
  ep.success = true;
  io::write_json_file(dir / "ep.json", io::episode_to_json(ep));
  const std::string csv = cmd_evaluate_episodes(dir / "ep.json");
  EXPECT_EQ(csv, std::string(kEpisodeCsvHeader) + "\n0,1,0,1,1,0,0\n");
}

TEST(Pipeline, MissingFileIsIoError) {
  EXPECT_EQ(catch_error([&] { io::read_json_file("/nonexistent/file.json"); }).code(), Errc::IoError);
}

}  // namespace
}  // namespace wirerecon
