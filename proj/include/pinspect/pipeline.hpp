#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pinspect/config.hpp"
#include "pinspect/insertion.hpp"
#include "pinspect/synth.hpp"

namespace pinspect {

struct SetupTimings {
  double segmentation_s = 0.0;
  double pose_check_s = 0.0;
  double template_gen_s = 0.0;
  double total_s = 0.0;
};

// Everything the online phase needs, persisted as a directory.
struct SetupArtifact {
  std::filesystem::path dir;
  Config config;
  TriMesh mesh;
  GraspSpec grasp;
  SegmentationResult seg;
  std::vector<InspectionPoseCandidate> candidates;  // evaluated, in order
  InspectionPoseCandidate selected;
  TemplateSet templates;
  SetupTimings timings;

  std::vector<PinInstance> insertion_pins() const;
};

// Offline phase: segmentation -> pose check -> template generation.
// Writes the artifact directory (mesh copy, grasp, segmentation,
// per-candidate pose report, templates, cutoff placeholder, timing report).
SetupArtifact run_setup(const std::filesystem::path& mesh_path,
                        const std::filesystem::path& grasp_path, const Config& config,
                        const std::filesystem::path& out_dir,
                        const std::filesystem::path& labels_path = {});

SetupArtifact load_artifact(const std::filesystem::path& dir);

// Online phase.
MatchResult run_estimate(const SetupArtifact& artifact, const ImageU8& image);

InspectionReport run_inspect(const SetupArtifact& artifact, const ImageU8& image,
                             InspectMethod method, double cutoff, MatchResult* pose_out = nullptr);

// Annotated overlay for reports: matched template edges plus per-pin boxes.
ImageRGB inspection_overlay(const SetupArtifact& artifact, const ImageU8& image,
                            const MatchResult& pose, const InspectionReport& report);

// ---------------------------------------------------------------------------
// Synthetic suites.

struct SuiteScene {
  std::string image_file;
  std::string truth_file;
};

struct SuiteManifest {
  std::string kind;  // "pose" | "pincheck"
  std::string family;
  double noise_sigma = 0.0;
  std::vector<SuiteScene> scenes;
};

// Writes component.obj, grasp.json, labels.json (per-vertex truth),
// instances.json, spec.json, config.json, scenes/*.png + truth_*.json and
// suite.json. kind "pose": calibration + the twelve offsets. kind
// "pincheck": n_straight + n_bent scenes with one blocking bend each.
SuiteManifest generate_suite(const ComponentSpec& spec, const std::string& kind,
                             const std::filesystem::path& out_dir, double noise_sigma,
                             uint64_t seed, int n_straight = 5, int n_bent = 5);

SuiteManifest load_suite(const std::filesystem::path& dir);

// Family config: pipeline defaults plus the family's shading and tuned
// segmentation parameters.
Config config_for_spec(const ComponentSpec& spec);

// ---------------------------------------------------------------------------
// Evaluation protocols.

struct PoseEvalResult {
  std::vector<double> translation_errors_m;  // per offset scene
  std::vector<double> rotation_errors_rad;
  double mean_translation_m = 0.0;
  double max_translation_m = 0.0;
  double mean_rotation_rad = 0.0;
  double max_rotation_rad = 0.0;
  double noise_sigma = 0.0;
};

// Calibrates in-hand pose on the suite's first scene, predicts the expected
// camera pose per offset scene and reports the deviation of the estimates.
PoseEvalResult run_eval_pose(const SetupArtifact& artifact, const std::filesystem::path& suite_dir);

struct MethodSeparation {
  InspectMethod method;
  std::vector<double> straight_scores;
  std::vector<double> bent_scores;
  bool separated = false;  // max(bent) < min(straight)
};

struct PincheckEvalResult {
  std::vector<MethodSeparation> methods;
  const MethodSeparation& of(InspectMethod m) const;
};

PincheckEvalResult run_eval_pincheck(const SetupArtifact& artifact,
                                     const std::filesystem::path& suite_dir);

struct SegEvalResult {
  double precision = 0.0;
  double recall = 0.0;
  size_t instance_count = 0;
  size_t insertion_count = 0;
  size_t expected_instances = 0;
  size_t expected_insertion = 0;
};

// Segmentation quality against the generated ground truth in a suite dir.
SegEvalResult run_eval_seg(const std::filesystem::path& suite_dir);

// Calibrates the per-object cutoff from a labeled pincheck suite.
CutoffCalibration run_calibrate(const SetupArtifact& artifact,
                                const std::filesystem::path& suite_dir, InspectMethod method);

void write_calibration_to_artifact(const SetupArtifact& artifact, const CutoffCalibration& cal);
CutoffCalibration read_calibration_from_artifact(const SetupArtifact& artifact);

}  // namespace pinspect
