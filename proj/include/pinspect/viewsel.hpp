#pragma once

#include <string>
#include <vector>

#include "pinspect/render.hpp"

namespace pinspect {

struct SweepSpec {
  double min_deg = -20.0;
  double max_deg = 20.0;
  double step_deg = 5.0;

  std::vector<double> angles_rad() const;
};

struct InspectionPoseCandidate {
  RigidTransform cam_T_tcp;
  std::string name;
  double min_visibility = 0.0;
  double max_pin_over_body = 1.0;
  bool feasible = false;
};

struct FeasibilityThresholds {
  double v_min = 0.95;
  double o_max = 0.05;
};

// The six pre-configured inspection poses: pins toward the camera, yawed
// about the camera's vertical axis by 0/+-45/+-90 degrees, plus one
// top-down 45 degree tilt. TCP origin sits at working_distance on the axis.
std::vector<InspectionPoseCandidate> default_candidates(double working_distance);

// Sweeps the in-hand rotation (about TCP Z) across the range and records
// the worst per-pin visibility and the worst pin-over-body fraction.
// BehindCamera during the sweep renders the candidate infeasible.
InspectionPoseCandidate evaluate_pose(const InspectionPoseCandidate& candidate,
                                      const TriMesh& mesh,
                                      const std::vector<PinInstance>& pins,
                                      const GraspSpec& grasp, const PinholeCamera& cam,
                                      const SweepSpec& sweep,
                                      const FeasibilityThresholds& thresholds = {});

// Best feasible candidate: max min_visibility, ties to lower
// max_pin_over_body, then list order. Throws NoFeasiblePose.
const InspectionPoseCandidate& select_pose(const std::vector<InspectionPoseCandidate>& candidates);

}  // namespace pinspect
