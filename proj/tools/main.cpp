// pinspect command line: offline setup, online estimation/inspection, and
// the synthetic evaluation protocols.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pinspect/json_util.hpp"
#include "pinspect/pipeline.hpp"
#include "pinspect/png_io.hpp"

namespace {

using namespace pinspect;
using nlohmann::json;

// Exit codes: 0 success/accept, 1 reject, 2 no match, 3 setup infeasible,
// 4 I/O or bad input.
constexpr int kExitAccept = 0;
constexpr int kExitReject = 1;
constexpr int kExitNoMatch = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitIo = 4;

Config load_config_or_default(const std::string& path) {
  return path.empty() ? default_config() : load_config(path);
}

json match_to_json(const MatchResult& m) {
  return json{{"x_px", m.pose2d.x},
              {"y_px", m.pose2d.y},
              {"theta_rad", m.pose2d.theta},
              {"theta_deg", deg(m.pose2d.theta)},
              {"score", m.score},
              {"cam_T_obj", transform_to_json(m.cam_T_obj)}};
}

int cmd_setup(const std::string& mesh, const std::string& grasp, const std::string& config_path,
              const std::string& labels, const std::string& out) {
  const Config config = load_config_or_default(config_path);
  const SetupArtifact art =
      run_setup(mesh, grasp, config, out, std::filesystem::path(labels));
  std::printf("setup complete: %s\n", out.c_str());
  std::printf("  pins: %zu (insertion: %zu)\n", art.seg.instances.size(),
              art.seg.insertion_instance_ids.size());
  if (art.seg.insertion_instance_ids.empty())
    std::printf("  warning: no insertion pins found\n");
  if (art.seg.merged_pins_warning)
    std::printf("  warning: touching pins merged into one instance\n");
  std::printf("  selected pose: %s (min visibility %.3f, max over-body %.3f)\n",
              art.selected.name.c_str(), art.selected.min_visibility,
              art.selected.max_pin_over_body);
  std::printf("  timings [s]: segmentation %.2f, pose check %.2f, templates %.2f, total %.2f\n",
              art.timings.segmentation_s, art.timings.pose_check_s, art.timings.template_gen_s,
              art.timings.total_s);
  return kExitAccept;
}

int cmd_estimate(const std::string& artifact_dir, const std::string& image_path,
                 const std::string& out, const std::string& overlay_path) {
  const SetupArtifact art = load_artifact(artifact_dir);
  const ImageU8 image = read_png_gray8(image_path);
  const MatchResult result = run_estimate(art, image);
  const json j = match_to_json(result);
  std::printf("%s\n", j.dump(2).c_str());
  if (!out.empty()) {
    std::ofstream o(out);
    o << j.dump(2) << "\n";
  }
  if (!overlay_path.empty()) {
    InspectionReport empty;
    write_png_rgb8(inspection_overlay(art, image, result, empty), overlay_path);
  }
  return kExitAccept;
}

int cmd_inspect(const std::string& artifact_dir, const std::string& image_path,
                const std::string& method_name, double cutoff_flag, const std::string& out,
                const std::string& overlay_path) {
  const SetupArtifact art = load_artifact(artifact_dir);
  const ImageU8 image = read_png_gray8(image_path);
  const InspectMethod method = inspect_method_from_string(method_name);

  double cutoff = cutoff_flag;
  if (cutoff < 0.0) {
    const CutoffCalibration cal = read_calibration_from_artifact(art);
    if (cal.cutoff < 0.0)
      throw InvalidSpec("no calibrated cutoff; run 'pinspect calibrate' or pass --cutoff");
    if (cal.method != method)
      throw InvalidSpec("calibrated cutoff is for method " + to_string(cal.method));
    cutoff = cal.cutoff;
  }

  MatchResult pose;
  const InspectionReport report = run_inspect(art, image, method, cutoff, &pose);
  json scores = json::array();
  for (const auto& s : report.scores)
    scores.push_back({{"pin_id", s.pin_id}, {"score", s.score}});
  const json j{{"method", to_string(method)},    {"cutoff", report.cutoff},
               {"min_score", report.min_score},  {"accepted", report.accepted},
               {"vacuous", report.empty_pin_warning}, {"scores", scores},
               {"pose", match_to_json(pose)}};
  std::printf("%s\n", j.dump(2).c_str());
  if (report.empty_pin_warning)
    std::printf("warning: no insertion pins; accepting vacuously\n");
  if (!out.empty()) {
    std::ofstream o(out);
    o << j.dump(2) << "\n";
  }
  if (!overlay_path.empty())
    write_png_rgb8(inspection_overlay(art, image, pose, report), overlay_path);
  return report.accepted ? kExitAccept : kExitReject;
}

int cmd_calibrate(const std::string& artifact_dir, const std::string& suite,
                  const std::string& method_name, const std::string& out) {
  const SetupArtifact art = load_artifact(artifact_dir);
  const InspectMethod method = inspect_method_from_string(method_name);
  const CutoffCalibration cal = run_calibrate(art, suite, method);
  write_calibration_to_artifact(art, cal);
  if (!out.empty()) save_calibration(cal, out);
  std::printf("calibrated %s cutoff: %.4f (bent max %.4f / straight min %.4f)\n",
              to_string(method).c_str(), cal.cutoff,
              *std::max_element(cal.bent_scores.begin(), cal.bent_scores.end()),
              *std::min_element(cal.straight_scores.begin(), cal.straight_scores.end()));
  return kExitAccept;
}

int cmd_eval_pose(const std::string& artifact_dir, const std::string& suite,
                  const std::string& out) {
  const SetupArtifact art = load_artifact(artifact_dir);
  const PoseEvalResult r = run_eval_pose(art, suite);
  std::printf("pose evaluation over %zu offset scenes (noise sigma %.1f):\n",
              r.translation_errors_m.size(), r.noise_sigma);
  std::printf("  translation error: mean %.3f mm, max %.3f mm\n", r.mean_translation_m * 1e3,
              r.max_translation_m * 1e3);
  std::printf("  rotation error:    mean %.3f deg, max %.3f deg\n", deg(r.mean_rotation_rad),
              deg(r.max_rotation_rad));
  if (!out.empty()) {
    json errs = json::array();
    for (size_t i = 0; i < r.translation_errors_m.size(); ++i)
      errs.push_back({{"translation_mm", r.translation_errors_m[i] * 1e3},
                      {"rotation_deg", deg(r.rotation_errors_rad[i])}});
    const json j{{"mean_translation_mm", r.mean_translation_m * 1e3},
                 {"max_translation_mm", r.max_translation_m * 1e3},
                 {"mean_rotation_deg", deg(r.mean_rotation_rad)},
                 {"max_rotation_deg", deg(r.max_rotation_rad)},
                 {"noise_sigma", r.noise_sigma},
                 {"scenes", errs}};
    std::ofstream o(out);
    o << j.dump(2) << "\n";
  }
  const bool noisy = r.noise_sigma > 0.0;
  if (noisy && r.max_translation_m >= 1e-3) return kExitReject;
  return kExitAccept;
}

int cmd_eval_pincheck(const std::string& artifact_dir, const std::string& suite,
                      const std::string& out) {
  const SetupArtifact art = load_artifact(artifact_dir);
  const PincheckEvalResult r = run_eval_pincheck(art, suite);
  json methods = json::array();
  for (const auto& sep : r.methods) {
    const char* verdict = sep.separated ? "separates" : "does NOT separate";
    std::printf("%-18s %s  (straight: %zu scores, bent: %zu scores)\n",
                to_string(sep.method).c_str(), verdict, sep.straight_scores.size(),
                sep.bent_scores.size());
    methods.push_back({{"method", to_string(sep.method)},
                       {"separated", sep.separated},
                       {"straight_scores", sep.straight_scores},
                       {"bent_scores", sep.bent_scores}});
  }
  if (!out.empty()) {
    std::ofstream o(out);
    o << json{{"methods", methods}}.dump(2) << "\n";
  }
  return kExitAccept;
}

int cmd_eval_seg(const std::string& suite) {
  const SegEvalResult r = run_eval_seg(suite);
  std::printf("per-vertex pin precision %.4f, recall %.4f\n", r.precision, r.recall);
  std::printf("instances: %zu (expected %zu); insertion pins after TCP filter: %zu (expected %zu)\n",
              r.instance_count, r.expected_instances, r.insertion_count, r.expected_insertion);
  return kExitAccept;
}

int cmd_gen_suite(const std::string& family, const std::string& spec_path,
                  const std::string& kind, const std::string& out, double noise, uint64_t seed,
                  int straight, int bent) {
  ComponentSpec spec =
      spec_path.empty() ? default_spec(family) : load_component_spec(spec_path);
  const SuiteManifest m = generate_suite(spec, kind, out, noise, seed, straight, bent);
  std::printf("suite '%s' (%s): %zu scenes in %s\n", m.kind.c_str(), m.family.c_str(),
              m.scenes.size(), out.c_str());
  return kExitAccept;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"in-hand pose estimation and pre-insertion pin inspection"};
  app.require_subcommand(1);

  std::string mesh, grasp, config_path, labels, out, artifact, image, suite, overlay;
  std::string method = "gradient";
  std::string family = "header_grid", spec_path, kind = "pose";
  double cutoff = -1.0, noise = 0.0;
  uint64_t seed = 1;
  int straight = 5, bent = 5;

  auto* setup = app.add_subcommand("setup", "automatic setup from a CAD model and grasp pose");
  setup->add_option("--mesh", mesh, "CAD mesh (OBJ or PLY)")->required();
  setup->add_option("--grasp", grasp, "grasp file")->required();
  setup->add_option("--config", config_path, "config file");
  setup->add_option("--labels", labels, "externally produced per-point label file");
  setup->add_option("--out", out, "artifact directory")->required();

  auto* estimate = app.add_subcommand("estimate", "in-hand pose estimation on an image");
  estimate->add_option("--artifact", artifact, "artifact directory")->required();
  estimate->add_option("--image", image, "8-bit grayscale PNG")->required();
  estimate->add_option("--out", out, "write the pose as JSON");
  estimate->add_option("--overlay", overlay, "write an overlay PNG");

  auto* inspect = app.add_subcommand("inspect", "per-pin inspection and verdict");
  inspect->add_option("--artifact", artifact, "artifact directory")->required();
  inspect->add_option("--image", image, "8-bit grayscale PNG")->required();
  inspect->add_option("--method", method, "gradient | intensity_overlay | edge_overlay | distance_to_edge");
  inspect->add_option("--cutoff", cutoff, "score cutoff (default: calibrated value)");
  inspect->add_option("--out", out, "write the report as JSON");
  inspect->add_option("--overlay", overlay, "write an annotated overlay PNG");

  auto* calibrate = app.add_subcommand("calibrate", "find the cutoff from a labeled suite");
  calibrate->add_option("--artifact", artifact, "artifact directory")->required();
  calibrate->add_option("--suite", suite, "pincheck suite directory")->required();
  calibrate->add_option("--method", method, "scoring method");
  calibrate->add_option("--out", out, "also write the calibration here");

  auto* eval_pose = app.add_subcommand("eval-pose", "pose error protocol on an offset suite");
  eval_pose->add_option("--artifact", artifact, "artifact directory")->required();
  eval_pose->add_option("--suite", suite, "pose suite directory")->required();
  eval_pose->add_option("--out", out, "write the error table as JSON");

  auto* eval_pin = app.add_subcommand("eval-pincheck", "method comparison on a bent/straight suite");
  eval_pin->add_option("--artifact", artifact, "artifact directory")->required();
  eval_pin->add_option("--suite", suite, "pincheck suite directory")->required();
  eval_pin->add_option("--out", out, "write score populations as JSON");

  auto* eval_seg = app.add_subcommand("eval-seg", "segmentation quality against suite ground truth");
  eval_seg->add_option("--suite", suite, "suite directory")->required();

  auto* gen = app.add_subcommand("gen-suite", "generate a synthetic component and scene suite");
  gen->add_option("--family", family, "header_grid | dsub_like | led_like");
  gen->add_option("--spec", spec_path, "component spec file (overrides --family)");
  gen->add_option("--kind", kind, "pose | pincheck");
  gen->add_option("--out", out, "suite directory")->required();
  gen->add_option("--noise", noise, "intensity noise sigma");
  gen->add_option("--seed", seed, "suite seed");
  gen->add_option("--straight", straight, "straight scenes (pincheck)");
  gen->add_option("--bent", bent, "bent scenes (pincheck)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (setup->parsed()) return cmd_setup(mesh, grasp, config_path, labels, out);
    if (estimate->parsed()) return cmd_estimate(artifact, image, out, overlay);
    if (inspect->parsed()) return cmd_inspect(artifact, image, method, cutoff, out, overlay);
    if (calibrate->parsed()) return cmd_calibrate(artifact, suite, method, out);
    if (eval_pose->parsed()) return cmd_eval_pose(artifact, suite, out);
    if (eval_pin->parsed()) return cmd_eval_pincheck(artifact, suite, out);
    if (eval_seg->parsed()) return cmd_eval_seg(suite);
    if (gen->parsed()) return cmd_gen_suite(family, spec_path, kind, out, noise, seed, straight, bent);
  } catch (const NoMatch& e) {
    std::fprintf(stderr, "no match: %s\n", e.what());
    return kExitNoMatch;
  } catch (const NoFeasiblePose& e) {
    std::fprintf(stderr, "setup infeasible: %s\n", e.what());
    return kExitInfeasible;
  } catch (const NoSeparation& e) {
    std::fprintf(stderr, "no separation: %s\n", e.what());
    return kExitReject;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  }
  return kExitIo;
}
