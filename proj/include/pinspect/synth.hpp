#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pinspect/render.hpp"

namespace pinspect {

// Procedural through-hole component. Families: header_grid (plate body,
// pin grid), dsub_like (plate with an end-walled skirt and top studs),
// led_like (flanged dome with two bright legs and a rim tab).
struct ComponentSpec {
  std::string family = "header_grid";
  int rows = 1;
  int cols = 4;
  double pitch = 2.54e-3;
  std::string pin_shape = "square";  // square | cylinder
  double pin_diameter = 0.35e-3;     // side length for square pins
  double pin_length = 9.0e-3;
  Vec3 body_size = Vec3(10.6e-3, 1.0e-3, 2.8e-3);
  double hole_diameter = 1.2e-3;

  // dsub_like
  double shell_depth = 3.5e-3;
  double shell_thickness = 0.8e-3;
  double shell_halfwidth = 1.8e-3;
  bool shell_front_wall = false;  // closes the skirt: no feasible view remains
  bool with_studs = true;
  double stud_diameter = 0.5e-3;
  double stud_length = 3.0e-3;

  // led_like
  double flange_diameter = 6.0e-3;
  double flange_thickness = 1.2e-3;
  double dome_radius = 2.4e-3;
  double tab_length = 1.5e-3;
  double tab_width = 2.0e-3;

  // tessellation
  int pin_segments = 8;
  double pin_ring_spacing = 1.5e-3;
  double body_tess = 0.5e-3;

  // appearance
  Shading body_shading{90.0, 0.15};
  Shading pin_shading{80.0, 0.15};
  uint8_t background = 230;

  uint64_t seed = 1;

  void validate() const;
  // Effective pin radius for clearance checks (half-diagonal for squares).
  double pin_radius_eff() const;
  // Radial clearance between hole and pin.
  double hole_clearance() const { return 0.5 * hole_diameter - pin_radius_eff(); }
  // Smallest bend angle whose lateral tip deflection blocks insertion.
  double blocking_bend_angle() const;
};

ComponentSpec default_spec(const std::string& family);
void save_component_spec(const ComponentSpec& spec, const std::filesystem::path& path);
ComponentSpec load_component_spec(const std::filesystem::path& path);

struct GeneratedComponent {
  TriMesh mesh;
  std::vector<uint8_t> vertex_labels;  // ground truth, PointLabel per vertex
  std::vector<PinInstance> instances;  // exact axis/base/tip, includes studs
  std::vector<int> insertion_pin_ids;  // instances that are actual pins (not studs)
};

GeneratedComponent generate_component(const ComponentSpec& spec);

// Default grasp for a generated family: TCP at the body center with Z along
// the pins, finger boxes gripping the body.
GraspSpec default_grasp(const ComponentSpec& spec);

// Rotates the pin's vertices rigidly about its base point, around the
// in-plane direction selected by azimuth. Body geometry is untouched.
TriMesh bend_pin(const TriMesh& mesh, const std::vector<PinInstance>& instances, int pin_id,
                 double angle, double azimuth);

// The same rotation applied to an instance's axis/tip (for ground truth).
PinInstance bend_instance(const PinInstance& pin, double angle, double azimuth);

// Lateral tip deflection of a bend: pin_length * sin(angle).
double bend_deflection(double pin_length, double angle);

struct BentPinTruth {
  int pin_id = -1;
  double angle = 0.0;
  double azimuth = 0.0;
};

struct SceneTruth {
  RigidTransform cam_T_obj;
  RigidTransform cam_T_tcp;
  double dx = 0.0, dy = 0.0;  // camera-parallel offset, meters
  double dtheta = 0.0;        // rotation about TCP Z, radians
  std::vector<BentPinTruth> bent_pins;
  double noise_sigma = 0.0;
  uint64_t noise_seed = 0;
};

// Offset composed as: translate the TCP in the camera plane, rotate the
// grasp about TCP Z. |dtheta| must stay within the template range.
SceneTruth make_scene_truth(const RigidTransform& cam_T_tcp_inspection,
                            const RigidTransform& tcp_T_obj, double dx, double dy, double dtheta);

struct SceneOptions {
  RenderOptions render;
  Shading finger{55.0, 0.2};
  bool with_fingers = true;
};

SceneOptions scene_options_for(const ComponentSpec& spec);

// Renders the grasped object with finger occluders over a uniform
// background and applies Gaussian intensity noise.
std::pair<ImageU8, RenderBuffers> render_scene(const TriMesh& mesh,
                                               const std::vector<PinInstance>& instances,
                                               const SceneTruth& truth, const GraspSpec& grasp,
                                               const PinholeCamera& cam,
                                               const SceneOptions& options);

void save_scene_truth(const SceneTruth& truth, const std::filesystem::path& path);
SceneTruth load_scene_truth(const std::filesystem::path& path);

// The evaluation offsets: a calibration pose plus the four 2.5 mm corners
// at each of {-10, 0, +10} degrees.
std::vector<std::array<double, 3>> pose_eval_offsets(double offset_m = 2.5e-3,
                                                     double angle_deg = 10.0);

}  // namespace pinspect
