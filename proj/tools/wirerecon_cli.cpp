// Command-line front end: synth, reconstruct, evaluate, relax.

#include <CLI11.hpp>

#include <array>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "wirerecon/pipeline.hpp"

namespace {

int fail(const std::string& message, int status) {
  std::string line = message;
  for (auto& c : line) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  std::cerr << "error: " << line << '\n';
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace wirerecon;
  CLI::App app{"Two-view guidewire reconstruction, rod synthesis and metrics"};
  app.require_subcommand(1);

  SynthConfig synth;
  std::string synth_cam_a, synth_cam_b;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic wire, cameras and noisy annotations");
  synth_cmd->add_option("--out", synth.out_dir, "Output directory")->required();
  synth_cmd->add_option("--camera-a", synth_cam_a, "Camera A JSON (default: built-in rig)");
  synth_cmd->add_option("--camera-b", synth_cam_b, "Camera B JSON (default: built-in rig)");
  synth_cmd->add_option("--noise-px", synth.noise_px, "Gaussian annotation noise sigma, px")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--segments", synth.n_segments, "Rod segment count")->capture_default_str();
  synth_cmd->add_option("--segment-length", synth.segment_length, "Rod segment length, mm")
      ->capture_default_str();
  synth_cmd->add_option("--tip-angle", synth.tip_angle, "Bound on total rest bending, rad")
      ->capture_default_str();
  synth_cmd->add_option("--stiffness", synth.stiffness, "Bending stiffness, energy/rad^2")
      ->capture_default_str();

  ReconstructConfig recon;
  std::string recon_cam_a, recon_cam_b;
  std::vector<std::string> recon_annotations;
  auto* recon_cmd = app.add_subcommand("reconstruct", "Reconstruct 3D curves from two annotated views");
  recon_cmd->add_option("--camera-a", recon_cam_a, "Camera A JSON")->required();
  recon_cmd->add_option("--camera-b", recon_cam_b, "Camera B JSON")->required();
  recon_cmd->add_option("--annotations", recon_annotations, "Annotation JSON file(s)")->required();
  recon_cmd->add_option("--out", recon.out, "Report JSON path")->required();
  recon_cmd->add_option("--samples", recon.n_samples, "Matched samples along curve A")->capture_default_str();
  recon_cmd->add_option("--dense-samples", recon.n_dense, "Dense samples for epiline intersection")
      ->capture_default_str();
  recon_cmd->add_flag("!--no-anchor-endpoints", recon.anchor_endpoints,
                      "Do not pin unmatched end samples to the curve ends");

  std::string eval_pred, eval_truth, eval_episodes, eval_out;
  std::size_t eval_samples = kDefaultMetricSamples;
  auto* eval_cmd = app.add_subcommand("evaluate", "Curve or episode metrics as CSV on stdout");
  auto* pred_opt = eval_cmd->add_option("--pred", eval_pred, "Predicted curve or report JSON");
  auto* truth_opt = eval_cmd->add_option("--truth", eval_truth, "Ground-truth curve JSON");
  auto* episodes_opt = eval_cmd->add_option("--episodes", eval_episodes, "Episode JSON");
  eval_cmd->add_option("--samples", eval_samples, "Samples per curve")->capture_default_str();
  eval_cmd->add_option("--out", eval_out, "Also write the CSV to this file");
  pred_opt->needs(truth_opt);
  truth_opt->needs(pred_opt);
  episodes_opt->excludes(pred_opt)->excludes(truth_opt);

  RelaxConfig relax_cfg;
  std::vector<double> pin_tip;
  auto* relax_cmd = app.add_subcommand("relax", "Relax a synthetic rod and write its centreline curve");
  relax_cmd->add_option("--out", relax_cfg.out, "Curve JSON path")->required();
  relax_cmd->add_option("--seed", relax_cfg.seed, "Random seed")->capture_default_str();
  relax_cmd->add_option("--segments", relax_cfg.n_segments, "Rod segment count")->capture_default_str();
  relax_cmd->add_option("--segment-length", relax_cfg.segment_length, "Segment length, mm")
      ->capture_default_str();
  relax_cmd->add_option("--tip-angle", relax_cfg.tip_angle, "Bound on total rest bending, rad")
      ->capture_default_str();
  relax_cmd->add_option("--stiffness", relax_cfg.stiffness, "Bending stiffness")->capture_default_str();
  relax_cmd->add_option("--pin-tip", pin_tip, "Pinned tip position x y z, mm (rod frame)")->expected(3);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*synth_cmd) {
      if (!synth_cam_a.empty()) synth.camera_a = synth_cam_a;
      if (!synth_cam_b.empty()) synth.camera_b = synth_cam_b;
      cmd_synth(synth);
    } else if (*recon_cmd) {
      recon.camera_a = recon_cam_a;
      recon.camera_b = recon_cam_b;
      recon.annotations.assign(recon_annotations.begin(), recon_annotations.end());
      cmd_reconstruct(recon);
    } else if (*eval_cmd) {
      std::string csv;
      if (!eval_episodes.empty()) {
        csv = cmd_evaluate_episodes(eval_episodes);
      } else if (!eval_pred.empty()) {
        csv = cmd_evaluate_curves(eval_pred, eval_truth, eval_samples);
      } else {
        return fail("evaluate needs --pred/--truth or --episodes", 2);
      }
      std::cout << csv;
      if (!eval_out.empty()) io::write_text_file(eval_out, csv);
    } else if (*relax_cmd) {
      if (!pin_tip.empty()) relax_cfg.tip_target = Vec3(pin_tip[0], pin_tip[1], pin_tip[2]);
      cmd_relax(relax_cfg);
    }
  } catch (const Error& e) {
    const bool input_error = e.code() == Errc::ParseError || e.code() == Errc::SchemaMismatch ||
                             e.code() == Errc::IoError || e.code() == Errc::InvalidArgument;
    return fail(e.what(), input_error ? 2 : 1);
  } catch (const std::exception& e) {
    return fail(e.what(), 1);
  }
  return 0;
}
