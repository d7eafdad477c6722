#include "pinspect/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <random>

#include "pinspect/json_util.hpp"
#include "pinspect/png_io.hpp"

namespace pinspect {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json candidate_to_json(const InspectionPoseCandidate& c) {
  return json{{"name", c.name},
              {"cam_T_tcp", transform_to_json(c.cam_T_tcp)},
              {"min_visibility", c.min_visibility},
              {"max_pin_over_body", c.max_pin_over_body},
              {"feasible", c.feasible}};
}

InspectionPoseCandidate candidate_from_json(const json& j) {
  InspectionPoseCandidate c;
  c.name = j.at("name").get<std::string>();
  c.cam_T_tcp = transform_from_json(j.at("cam_T_tcp"));
  c.min_visibility = j.at("min_visibility").get<double>();
  c.max_pin_over_body = j.at("max_pin_over_body").get<double>();
  c.feasible = j.at("feasible").get<bool>();
  return c;
}

}  // namespace

std::vector<PinInstance> SetupArtifact::insertion_pins() const {
  std::vector<PinInstance> out;
  for (int id : seg.insertion_instance_ids)
    for (const auto& pin : seg.instances)
      if (pin.id == id) out.push_back(pin);
  return out;
}

SetupArtifact run_setup(const fs::path& mesh_path, const fs::path& grasp_path,
                        const Config& config, const fs::path& out_dir,
                        const fs::path& labels_path) {
  const auto t_total = std::chrono::steady_clock::now();
  SetupArtifact art;
  art.dir = out_dir;
  art.config = config;
  art.config.inspect.render = config.render;
  fs::create_directories(out_dir);

  art.mesh = load_mesh(mesh_path, config.mesh_unit_scale);
  art.grasp = load_grasp(grasp_path);

  // Stage 1: pin segmentation.
  const auto t_seg = std::chrono::steady_clock::now();
  std::vector<uint8_t> imported;
  const std::vector<uint8_t>* imported_ptr = nullptr;
  if (!labels_path.empty()) {
    const PointCloud cloud = sample_cloud(art.mesh, config.cloud_points, config.seed);
    imported = import_labels(labels_path, cloud);
    imported_ptr = &imported;
  }
  art.seg = segment_pins(art.mesh, art.grasp, config.classify, config.cloud_points, config.seed,
                         config.knn, imported_ptr);
  art.timings.segmentation_s = seconds_since(t_seg);

  // Stage 2: inspection pose check.
  const auto t_pose = std::chrono::steady_clock::now();
  std::vector<InspectionPoseCandidate> candidates =
      config.candidates ? *config.candidates : default_candidates(config.working_distance);
  const auto pins = art.insertion_pins();
  for (auto& cand : candidates)
    cand = evaluate_pose(cand, art.mesh, pins, art.grasp, config.camera, config.sweep,
                         config.feasibility);
  art.candidates = candidates;
  art.timings.pose_check_s = seconds_since(t_pose);

  // Persist the per-candidate report before selection can fail.
  {
    json rows = json::array();
    for (const auto& c : candidates) rows.push_back(candidate_to_json(c));
    std::ofstream out(out_dir / "posecheck.json");
    out << json{{"candidates", rows}}.dump(2) << "\n";
  }

  art.selected = select_pose(candidates);

  // Stage 3: template generation at the selected pose.
  const auto t_tpl = std::chrono::steady_clock::now();
  art.templates = generate_templates(art.mesh, art.grasp, art.selected.cam_T_tcp, config.camera,
                                     config.match, config.render);
  art.timings.template_gen_s = seconds_since(t_tpl);
  art.timings.total_s = seconds_since(t_total);

  // Persist the artifact.
  save_mesh_obj(art.mesh, out_dir / "mesh.obj");
  save_grasp(art.grasp, out_dir / "grasp.json");
  save_segmentation(art.seg, out_dir / "segmentation.json");
  save_template_set(art.templates, out_dir / "templates.bin");
  save_config(art.config, out_dir / "config.json");
  {
    const json j{{"version", 1},
                 {"selected", candidate_to_json(art.selected)},
                 {"merged_pins_warning", art.seg.merged_pins_warning},
                 {"timings",
                  {{"segmentation_s", art.timings.segmentation_s},
                   {"pose_check_s", art.timings.pose_check_s},
                   {"template_gen_s", art.timings.template_gen_s},
                   {"total_s", art.timings.total_s}}}};
    std::ofstream out(out_dir / "artifact.json");
    out << j.dump(2) << "\n";
  }
  {
    CutoffCalibration placeholder;
    placeholder.cutoff = -1.0;  // uncalibrated
    save_calibration(placeholder, out_dir / "cutoff.json");
  }
  {
    std::ofstream rep(out_dir / "report.txt");
    rep << "setup timing table (seconds)\n"
        << "segmentation:  " << art.timings.segmentation_s << "\n"
        << "pose check:    " << art.timings.pose_check_s << "\n"
        << "template gen.: " << art.timings.template_gen_s << "\n"
        << "total:         " << art.timings.total_s << "\n"
        << "pins: " << art.seg.instances.size()
        << " (insertion: " << art.seg.insertion_instance_ids.size() << ")\n"
        << "selected pose: " << art.selected.name << "\n";
    if (art.seg.insertion_instance_ids.empty())
      rep << "warning: no insertion pins found; inspection will accept vacuously\n";
    if (art.seg.merged_pins_warning) rep << "warning: touching pins merged into one instance\n";
  }
  return art;
}

SetupArtifact load_artifact(const fs::path& dir) {
  SetupArtifact art;
  art.dir = dir;
  std::ifstream meta_in(dir / "artifact.json");
  if (!meta_in) throw IoError("not an artifact directory: " + dir.string());
  json meta;
  try {
    meta_in >> meta;
  } catch (const json::exception& e) {
    throw ParseError(std::string("artifact.json: ") + e.what());
  }
  art.config = load_config(dir / "config.json");
  art.mesh = load_mesh(dir / "mesh.obj");
  art.grasp = load_grasp(dir / "grasp.json");
  art.seg = load_segmentation(dir / "segmentation.json");
  art.templates = load_template_set(dir / "templates.bin");
  art.selected = candidate_from_json(meta.at("selected"));
  std::ifstream pc_in(dir / "posecheck.json");
  if (pc_in) {
    json pc;
    pc_in >> pc;
    for (const auto& row : pc.at("candidates"))
      art.candidates.push_back(candidate_from_json(row));
  }
  const auto& t = meta.at("timings");
  art.timings.segmentation_s = t.at("segmentation_s").get<double>();
  art.timings.pose_check_s = t.at("pose_check_s").get<double>();
  art.timings.template_gen_s = t.at("template_gen_s").get<double>();
  art.timings.total_s = t.at("total_s").get<double>();
  return art;
}

MatchResult run_estimate(const SetupArtifact& artifact, const ImageU8& image) {
  return match(image, artifact.templates);
}

InspectionReport run_inspect(const SetupArtifact& artifact, const ImageU8& image,
                             InspectMethod method, double cutoff, MatchResult* pose_out) {
  const MatchResult pose = run_estimate(artifact, image);
  if (pose_out) *pose_out = pose;
  InspectConfig cfg = artifact.config.inspect;
  cfg.render = artifact.config.render;
  return inspect(image, pose.cam_T_obj, artifact.mesh, artifact.seg.instances,
                 artifact.seg.insertion_instance_ids, artifact.config.camera, method, cutoff,
                 cfg);
}

ImageRGB inspection_overlay(const SetupArtifact& artifact, const ImageU8& image,
                            const MatchResult& pose, const InspectionReport& report) {
  ImageRGB overlay = ImageRGB::from_gray(image);
  // Matched template edge points in blue.
  if (const Template* tpl = artifact.templates.find(0, pose.pose2d.theta)) {
    for (const auto& p : tpl->edge_points)
      overlay.set(static_cast<int>(pose.pose2d.x + p.dx), static_cast<int>(pose.pose2d.y + p.dy),
                  80, 120, 235);
  }
  // Per-pin verdict boxes around the projected pin span.
  for (const auto& score : report.scores) {
    const PinInstance* pin = nullptr;
    for (const auto& p : artifact.seg.instances)
      if (p.id == score.pin_id) pin = &p;
    if (!pin) continue;
    const Vec3 base_cam = pose.cam_T_obj.apply(pin->base_point);
    const Vec3 tip_cam = pose.cam_T_obj.apply(pin->tip_point);
    if (base_cam.z() <= 0 || tip_cam.z() <= 0) continue;
    const Vec2 a = project(base_cam, artifact.config.camera);
    const Vec2 b = project(tip_cam, artifact.config.camera);
    const bool ok = score.score >= report.cutoff;
    const uint8_t r = ok ? 40 : 230, g = ok ? 220 : 40;
    draw_line(overlay, a.x(), a.y(), b.x(), b.y(), r, g, 40);
    draw_circle(overlay, b.x(), b.y(), 6.0, r, g, 40);
  }
  return overlay;
}

// ---------------------------------------------------------------------------
// Suites.

Config config_for_spec(const ComponentSpec& spec) {
  Config c;
  c.render.background = spec.background;
  c.render.body = spec.body_shading;
  c.render.pin = spec.pin_shading;
  c.inspect.render = c.render;
  // The spacing-coupled default neighborhood is too tight to see the
  // elongation of these thin pins at 8192 samples; the families ship a
  // wider neighborhood instead.
  c.classify.rn_factor = 8.0;
  c.classify.r_max = 1.2e-3;
  c.seed = spec.seed + 7;
  return c;
}

SuiteManifest generate_suite(const ComponentSpec& spec, const std::string& kind,
                             const fs::path& out_dir, double noise_sigma, uint64_t seed,
                             int n_straight, int n_bent) {
  if (kind != "pose" && kind != "pincheck")
    throw InvalidSpec("suite kind must be 'pose' or 'pincheck'");
  fs::create_directories(out_dir / "scenes");

  GeneratedComponent part = generate_component(spec);
  const GraspSpec grasp = default_grasp(spec);
  const Config config = config_for_spec(spec);

  save_mesh_obj(part.mesh, out_dir / "component.obj");
  save_grasp(grasp, out_dir / "grasp.json");
  save_component_spec(spec, out_dir / "spec.json");
  save_config(config, out_dir / "config.json");
  {
    json labels = json::array();
    for (uint8_t l : part.vertex_labels) labels.push_back(static_cast<int>(l));
    std::ofstream out(out_dir / "labels.json");
    out << json{{"labels", labels}}.dump() << "\n";
  }
  {
    SegmentationResult truth_seg;
    truth_seg.per_vertex_label = part.vertex_labels;
    truth_seg.instances = part.instances;
    truth_seg.insertion_instance_ids = part.insertion_pin_ids;
    save_segmentation(truth_seg, out_dir / "instances.json");
  }

  // The suite is rendered at the pose the setup will select, so evaluate
  // candidates here the same way.
  const auto pins = [&] {
    std::vector<PinInstance> out;
    for (int id : part.insertion_pin_ids) out.push_back(part.instances[id]);
    return out;
  }();
  std::vector<InspectionPoseCandidate> candidates =
      default_candidates(config.working_distance);
  for (auto& cand : candidates)
    cand = evaluate_pose(cand, part.mesh, pins, grasp, config.camera, config.sweep,
                         config.feasibility);
  const InspectionPoseCandidate selected = select_pose(candidates);
  const SceneOptions scene_opts = scene_options_for(spec);

  SuiteManifest manifest;
  manifest.kind = kind;
  manifest.family = spec.family;
  manifest.noise_sigma = noise_sigma;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);

  auto render_one = [&](int index, const TriMesh& mesh, const SceneTruth& truth) {
    auto [image, buffers] = render_scene(mesh, part.instances, truth, grasp, config.camera,
                                         scene_opts);
    char img_name[64], truth_name[64];
    std::snprintf(img_name, sizeof img_name, "scenes/scene_%03d.png", index);
    std::snprintf(truth_name, sizeof truth_name, "scenes/truth_%03d.json", index);
    write_png_gray8(image, out_dir / img_name);
    save_scene_truth(truth, out_dir / truth_name);
    manifest.scenes.push_back({img_name, truth_name});
  };

  if (kind == "pose") {
    // Calibration scene then the twelve known offsets.
    SceneTruth calib = make_scene_truth(selected.cam_T_tcp, grasp.tcp_in_object, 0, 0, 0);
    calib.noise_sigma = noise_sigma;
    calib.noise_seed = seed;
    render_one(0, part.mesh, calib);
    int index = 1;
    for (const auto& off : pose_eval_offsets()) {
      SceneTruth truth =
          make_scene_truth(selected.cam_T_tcp, grasp.tcp_in_object, off[0], off[1], off[2]);
      truth.noise_sigma = noise_sigma;
      truth.noise_seed = seed + index;
      render_one(index, part.mesh, truth);
      ++index;
    }
  } else {
    const double blocking = spec.blocking_bend_angle();
    const Mat3 nominal_rot = (selected.cam_T_tcp * grasp.tcp_in_object).rotation;
    int index = 0;
    for (int i = 0; i < n_straight + n_bent; ++i) {
      const bool bent = i >= n_straight;
      SceneTruth truth = make_scene_truth(selected.cam_T_tcp, grasp.tcp_in_object,
                                          1.5e-3 * uni(rng), 1.5e-3 * uni(rng),
                                          rad(8.0) * uni(rng));
      truth.noise_sigma = noise_sigma;
      truth.noise_seed = seed * 31 + index;
      TriMesh mesh = part.mesh;
      if (bent) {
        const int which = part.insertion_pin_ids[static_cast<size_t>(
            std::uniform_int_distribution<int>(0, static_cast<int>(part.insertion_pin_ids.size()) -
                                                      1)(rng))];
        const double angle =
            std::min(rad(20.0), blocking * (3.0 + 3.0 * std::abs(uni(rng))));
        // Resample the azimuth until the bend has a solid image-plane
        // component; a bend straight along the view is invisible to a
        // single camera.
        double azimuth = 0.0;
        for (int attempt = 0; attempt < 64; ++attempt) {
          azimuth = kPi * uni(rng);
          const PinInstance moved = bend_instance(part.instances[which], angle, azimuth);
          Vec3 dir = moved.tip_point - part.instances[which].tip_point;
          if (dir.norm() < 1e-12) continue;
          const Vec3 dir_cam = nominal_rot * dir.normalized();
          if (std::hypot(dir_cam.x(), dir_cam.y()) >= 0.5) break;
        }
        mesh = bend_pin(part.mesh, part.instances, which, angle, azimuth);
        truth.bent_pins.push_back({which, angle, azimuth});
      }
      render_one(index, mesh, truth);
      ++index;
    }
  }

  {
    json scenes = json::array();
    for (const auto& s : manifest.scenes)
      scenes.push_back({{"image", s.image_file}, {"truth", s.truth_file}});
    const json j{{"kind", manifest.kind},
                 {"family", manifest.family},
                 {"noise_sigma", manifest.noise_sigma},
                 {"selected_pose", candidate_to_json(selected)},
                 {"scenes", scenes}};
    std::ofstream out(out_dir / "suite.json");
    out << j.dump(2) << "\n";
  }
  return manifest;
}

SuiteManifest load_suite(const fs::path& dir) {
  std::ifstream in(dir / "suite.json");
  if (!in) throw IoError("not a suite directory: " + dir.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(std::string("suite.json: ") + e.what());
  }
  SuiteManifest m;
  m.kind = j.at("kind").get<std::string>();
  m.family = j.at("family").get<std::string>();
  m.noise_sigma = j.at("noise_sigma").get<double>();
  for (const auto& s : j.at("scenes"))
    m.scenes.push_back({s.at("image").get<std::string>(), s.at("truth").get<std::string>()});
  if (m.scenes.empty()) throw InvalidSpec("suite has no scenes");
  return m;
}

// ---------------------------------------------------------------------------
// Evaluations.

PoseEvalResult run_eval_pose(const SetupArtifact& artifact, const fs::path& suite_dir) {
  const SuiteManifest suite = load_suite(suite_dir);
  if (suite.kind != "pose") throw InvalidSpec("eval-pose expects a 'pose' suite");
  PoseEvalResult result;
  result.noise_sigma = suite.noise_sigma;

  // Calibration: estimate the in-hand pose at the first scene.
  const SceneTruth calib_truth = load_scene_truth(suite_dir / suite.scenes[0].truth_file);
  const ImageU8 calib_img = read_png_gray8(suite_dir / suite.scenes[0].image_file);
  const MatchResult calib_est = run_estimate(artifact, calib_img);
  const RigidTransform tcp_T_obj_calib =
      calib_in_hand(calib_truth.cam_T_tcp, calib_est.cam_T_obj);

  for (size_t i = 1; i < suite.scenes.size(); ++i) {
    const SceneTruth truth = load_scene_truth(suite_dir / suite.scenes[i].truth_file);
    const ImageU8 img = read_png_gray8(suite_dir / suite.scenes[i].image_file);
    const MatchResult est = run_estimate(artifact, img);
    const RigidTransform expected = expected_cam_pose(truth.cam_T_tcp, tcp_T_obj_calib);
    result.translation_errors_m.push_back((expected.translation - est.cam_T_obj.translation).norm());
    result.rotation_errors_rad.push_back(rotation_angle_between(expected, est.cam_T_obj));
  }

  for (double e : result.translation_errors_m) {
    result.mean_translation_m += e;
    result.max_translation_m = std::max(result.max_translation_m, e);
  }
  for (double e : result.rotation_errors_rad) {
    result.mean_rotation_rad += e;
    result.max_rotation_rad = std::max(result.max_rotation_rad, e);
  }
  if (!result.translation_errors_m.empty()) {
    result.mean_translation_m /= static_cast<double>(result.translation_errors_m.size());
    result.mean_rotation_rad /= static_cast<double>(result.rotation_errors_rad.size());
  }
  return result;
}

const MethodSeparation& PincheckEvalResult::of(InspectMethod m) const {
  for (const auto& s : methods)
    if (s.method == m) return s;
  throw InvalidSpec("method not evaluated");
}

PincheckEvalResult run_eval_pincheck(const SetupArtifact& artifact, const fs::path& suite_dir) {
  const SuiteManifest suite = load_suite(suite_dir);
  if (suite.kind != "pincheck") throw InvalidSpec("eval-pincheck expects a 'pincheck' suite");

  PincheckEvalResult result;
  for (InspectMethod m : {InspectMethod::kGradient, InspectMethod::kIntensityOverlay,
                          InspectMethod::kEdgeOverlay, InspectMethod::kDistanceToEdge})
    result.methods.push_back({m, {}, {}, false});

  InspectConfig cfg = artifact.config.inspect;
  cfg.render = artifact.config.render;

  for (const auto& scene : suite.scenes) {
    const SceneTruth truth = load_scene_truth(suite_dir / scene.truth_file);
    const ImageU8 img = read_png_gray8(suite_dir / scene.image_file);
    const MatchResult est = run_estimate(artifact, img);
    for (int pin_id : artifact.seg.insertion_instance_ids) {
      bool is_bent = false;
      for (const auto& b : truth.bent_pins) is_bent |= b.pin_id == pin_id;
      for (auto& sep : result.methods) {
        double score = 0.0;
        try {
          score = score_pin(img, est.cam_T_obj, artifact.mesh, artifact.seg.instances, pin_id,
                            artifact.config.camera, sep.method, cfg)
                      .score;
        } catch (const PinNotVisible&) {
          score = 0.0;
        }
        (is_bent ? sep.bent_scores : sep.straight_scores).push_back(score);
      }
    }
  }

  for (auto& sep : result.methods) {
    if (sep.straight_scores.empty() || sep.bent_scores.empty()) continue;
    const double smin = *std::min_element(sep.straight_scores.begin(), sep.straight_scores.end());
    const double bmax = *std::max_element(sep.bent_scores.begin(), sep.bent_scores.end());
    sep.separated = bmax < smin;
  }
  return result;
}

SegEvalResult run_eval_seg(const fs::path& suite_dir) {
  const ComponentSpec spec = load_component_spec(suite_dir / "spec.json");
  const Config config = load_config(suite_dir / "config.json");
  const TriMesh mesh = load_mesh(suite_dir / "component.obj");
  const GraspSpec grasp = load_grasp(suite_dir / "grasp.json");
  const SegmentationResult truth = load_segmentation(suite_dir / "instances.json");

  const SegmentationResult seg = segment_pins(mesh, grasp, config.classify, config.cloud_points,
                                              config.seed, config.knn);

  SegEvalResult out;
  size_t tp = 0, fp = 0, fn = 0;
  for (size_t v = 0; v < mesh.vertices.size(); ++v) {
    const bool truth_pin = truth.per_vertex_label[v] != 0;
    const bool pred_pin = seg.per_vertex_label[v] != 0;
    tp += truth_pin && pred_pin;
    fp += !truth_pin && pred_pin;
    fn += truth_pin && !pred_pin;
  }
  out.precision = tp + fp ? static_cast<double>(tp) / (tp + fp) : 0.0;
  out.recall = tp + fn ? static_cast<double>(tp) / (tp + fn) : 0.0;
  out.instance_count = seg.instances.size();
  out.insertion_count = seg.insertion_instance_ids.size();
  out.expected_instances = truth.instances.size();
  out.expected_insertion = truth.insertion_instance_ids.size();
  return out;
}

CutoffCalibration run_calibrate(const SetupArtifact& artifact, const fs::path& suite_dir,
                                InspectMethod method) {
  const PincheckEvalResult eval = run_eval_pincheck(artifact, suite_dir);
  const MethodSeparation& sep = eval.of(method);
  CutoffCalibration cal;
  cal.method = method;
  cal.straight_scores = sep.straight_scores;
  cal.bent_scores = sep.bent_scores;
  cal.cutoff = calibrate_cutoff(sep.straight_scores, sep.bent_scores);
  return cal;
}

void write_calibration_to_artifact(const SetupArtifact& artifact, const CutoffCalibration& cal) {
  save_calibration(cal, artifact.dir / "cutoff.json");
}

CutoffCalibration read_calibration_from_artifact(const SetupArtifact& artifact) {
  return load_calibration(artifact.dir / "cutoff.json");
}

}  // namespace pinspect
