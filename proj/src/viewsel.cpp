#include "pinspect/viewsel.hpp"

#include <cmath>

namespace pinspect {

std::vector<double> SweepSpec::angles_rad() const {
  std::vector<double> out;
  const int n = static_cast<int>(std::round((max_deg - min_deg) / step_deg));
  for (int i = 0; i <= n; ++i) out.push_back(rad(min_deg + i * step_deg));
  return out;
}

std::vector<InspectionPoseCandidate> default_candidates(double working_distance) {
  // Frontal orientation: TCP Z (pin direction) toward the camera.
  Mat3 frontal;
  frontal.col(0) = Vec3(1, 0, 0);
  frontal.col(1) = Vec3(0, -1, 0);
  frontal.col(2) = Vec3(0, 0, -1);
  const Vec3 at(0, 0, working_distance);

  auto make = [&](const std::string& name, const Mat3& pre) {
    InspectionPoseCandidate c;
    c.name = name;
    c.cam_T_tcp = RigidTransform::from_parts(pre * frontal, at);
    return c;
  };

  std::vector<InspectionPoseCandidate> out;
  out.push_back(make("front", Mat3::Identity()));
  out.push_back(make("yaw+45", RigidTransform::rot_y(rad(45)).rotation));
  out.push_back(make("yaw-45", RigidTransform::rot_y(rad(-45)).rotation));
  out.push_back(make("yaw+90", RigidTransform::rot_y(rad(90)).rotation));
  out.push_back(make("yaw-90", RigidTransform::rot_y(rad(-90)).rotation));
  out.push_back(make("tilt45", RigidTransform::rot_x(rad(45)).rotation));
  return out;
}

InspectionPoseCandidate evaluate_pose(const InspectionPoseCandidate& candidate,
                                      const TriMesh& mesh,
                                      const std::vector<PinInstance>& pins,
                                      const GraspSpec& grasp, const PinholeCamera& cam,
                                      const SweepSpec& sweep,
                                      const FeasibilityThresholds& thresholds) {
  InspectionPoseCandidate out = candidate;
  out.min_visibility = 1.0;
  out.max_pin_over_body = 0.0;
  out.feasible = true;

  RenderOptions opts;
  opts.with_intensity = false;
  const auto face_ids = face_instance_ids(mesh, pins);
  std::vector<char> body_faces(mesh.triangles.size());
  for (size_t t = 0; t < face_ids.size(); ++t) body_faces[t] = face_ids[t] == 1;

  try {
    for (double theta : sweep.angles_rad()) {
      const RigidTransform cam_T_obj =
          candidate.cam_T_tcp * RigidTransform::rot_z(theta) * grasp.tcp_in_object;
      const auto full_tris = build_raster_triangles(mesh, face_ids, cam_T_obj, opts);
      const auto full = rasterize_triangles(full_tris, cam, opts);
      const auto body = rasterize_triangles(
          build_raster_triangles(mesh, face_ids, cam_T_obj, opts, &body_faces), cam, opts);
      for (const auto& pin : pins) {
        std::vector<char> only(mesh.triangles.size());
        for (size_t t = 0; t < face_ids.size(); ++t) only[t] = face_ids[t] == 2 + pin.id;
        const auto alone = rasterize_triangles(
            build_raster_triangles(mesh, face_ids, cam_T_obj, opts, &only), cam, opts);
        out.min_visibility = std::min(out.min_visibility, pin_visibility_from(full, alone, pin.id));
        out.max_pin_over_body =
            std::max(out.max_pin_over_body, pin_over_body_from(full, body, pin.id));
      }
    }
  } catch (const BehindCamera&) {
    out.min_visibility = 0.0;
    out.max_pin_over_body = 1.0;
    out.feasible = false;
    return out;
  } catch (const PinNotVisible&) {
    out.min_visibility = 0.0;
    out.max_pin_over_body = 1.0;
    out.feasible = false;
    return out;
  }

  out.feasible = out.min_visibility >= thresholds.v_min &&
                 out.max_pin_over_body <= thresholds.o_max;
  return out;
}

const InspectionPoseCandidate& select_pose(
    const std::vector<InspectionPoseCandidate>& candidates) {
  if (candidates.empty()) throw NoFeasiblePose("no candidates");
  const InspectionPoseCandidate* best = nullptr;
  for (const auto& c : candidates) {
    if (!c.feasible) continue;
    if (!best || c.min_visibility > best->min_visibility ||
        (c.min_visibility == best->min_visibility &&
         c.max_pin_over_body < best->max_pin_over_body))
      best = &c;
  }
  if (!best) throw NoFeasiblePose("all inspection pose candidates failed feasibility");
  return *best;
}

}  // namespace pinspect
