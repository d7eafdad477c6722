#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "pinspect/imgproc.hpp"
#include "pinspect/render.hpp"

namespace pinspect {

// One edge template: subsampled model edge points with unit gradient
// directions, anchored at the projected object origin for its rotation.
struct EdgePoint {
  float dx = 0, dy = 0;  // offset from anchor, level pixels
  float gx = 0, gy = 0;  // unit gradient direction
};

struct Template {
  double theta = 0.0;  // in-hand rotation (about TCP Z) this was rendered at
  int level = 0;       // 0 = full resolution
  Vec2 anchor = Vec2::Zero();  // full-res pixel coords of the object-origin projection
  std::vector<EdgePoint> edge_points;
};

struct MatchConfig {
  int levels = 4;
  double theta_min_deg = -20.0;
  double theta_max_deg = 20.0;
  double coarse_theta_step_deg = 4.0;  // halves per level down to the finest
  double s_min_coarse = 0.75;
  double s_min_fine = 0.85;
  double g_min = 10.0;     // gradient magnitude floor, intensity-step units
  int max_points = 256;    // per-template edge point budget
  int min_points_finest = 32;
  int max_candidates = 32;
  double depth_edge_threshold = 0.001;  // m, depth discontinuity for edge extraction
  double finger_margin = 0.0005;        // m, dilation of finger boxes for exclusion

  double theta_step_deg(int level) const;
  std::vector<double> thetas_rad(int level) const;
};

struct TemplateSet {
  int levels = 4;
  std::vector<std::vector<Template>> per_level;  // [level][theta index]
  double grasp_plane_depth = 0.0;                // camera-frame Z of the grasp plane
  RigidTransform cam_T_tcp;                      // inspection pose
  RigidTransform tcp_T_obj;                      // grasp
  RigidTransform cam_T_obj_nominal;              // theta = 0
  Vec3 grasp_normal_cam = Vec3::UnitZ();         // TCP Z in camera frame
  PinholeCamera camera;
  MatchConfig config;
  std::vector<std::array<int, 4>> finger_regions;  // nominal finger bboxes, full-res px

  const Template* find(int level, double theta) const;
};

struct MatchResult {
  Pose2D pose2d;
  double score = 0.0;
  RigidTransform cam_T_obj;
};

// Renders the object over the constrained rotation range and extracts
// silhouette / depth-discontinuity edge templates per pyramid level.
// Points grasped by (or hidden behind) the fingers are excluded.
TemplateSet generate_templates(const TriMesh& mesh, const GraspSpec& grasp,
                               const RigidTransform& cam_T_tcp, const PinholeCamera& cam,
                               const MatchConfig& config, const RenderOptions& render_opts = {});

// Mean absolute normalized dot product between template directions and
// image gradient directions; pixels below the magnitude floor contribute 0.
enum class OobPolicy { kThrow, kZero };
double similarity(const GradientField& gradients, const Template& tpl, double anchor_x,
                  double anchor_y, double g_min, OobPolicy oob = OobPolicy::kThrow);

// Image pyramid with per-level gradients, shared by match and the scorers.
struct ImagePyramid {
  std::vector<ImageU8> images;
  std::vector<GradientField> gradients;

  static ImagePyramid build(const ImageU8& image, int levels);
};

// Coarse-to-fine template search. Throws NoMatch when nothing clears the
// score thresholds.
MatchResult match(const ImageU8& image, const TemplateSet& set);

// Sub-step refinement by separable quadratic fit over the 3x3x3
// neighborhood of the discrete optimum; falls back to the discrete
// optimum where the fit is not concave.
MatchResult refine(const ImagePyramid& pyramid, const TemplateSet& set, int px, int py,
                   int theta_index);

// Lifts an image-space pose to the camera frame on the grasp plane.
RigidTransform lift_to_3d(const Pose2D& pose, const TemplateSet& set, const PinholeCamera& cam);

void save_template_set(const TemplateSet& set, const std::filesystem::path& path);
TemplateSet load_template_set(const std::filesystem::path& path);

}  // namespace pinspect
