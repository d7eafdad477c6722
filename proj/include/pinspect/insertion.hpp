#pragma once

#include <filesystem>
#include <vector>

#include "pinspect/imgproc.hpp"
#include "pinspect/pinseg.hpp"

namespace pinspect {

struct HoleSpec {
  Vec3 center = Vec3::Zero();  // board frame
  double diameter = 0.0;       // meters
  int pin_id = -1;             // corresponding insertion pin
};

// Taught insertion poses plus the board hole layout.
struct InsertionRecord {
  RigidTransform base_T_tcp_ins;
  RigidTransform base_T_obj_ins;
  std::vector<HoleSpec> hole_specs;
};

// tcp_T_obj = inv(cam_T_tcp) * cam_T_obj
RigidTransform tcp_from_obj(const RigidTransform& cam_T_tcp, const RigidTransform& cam_T_obj);

// base_T_obj_ins = base_T_ins * tcp_T_obj
RigidTransform obj_ins_in_base(const RigidTransform& base_T_ins, const RigidTransform& tcp_T_obj);

// base_T_tcp_ins_comp = base_T_obj_ins * inv(tcp_T_obj_current)
RigidTransform compensated_pose(const RigidTransform& base_T_obj_ins,
                                const RigidTransform& tcp_T_obj_current);

// Calibration-context alias of tcp_from_obj.
RigidTransform calib_in_hand(const RigidTransform& cam_T_tcp, const RigidTransform& cam_T_obj);

// cam_T_obj_expected = cam_T_tcp_test * tcp_T_obj_calib
RigidTransform expected_cam_pose(const RigidTransform& cam_T_tcp_test,
                                 const RigidTransform& tcp_T_obj_calib);

// base_T_tcp_comp = base_T_obj * inv(tcp_T_obj_current)
RigidTransform visual_correction_pose(const RigidTransform& base_T_obj,
                                      const RigidTransform& tcp_T_obj_current);

// Board frame := object frame at the taught inserted pose; holes sit
// coaxially at the nominal pin tips.
InsertionRecord build_insertion_record(const RigidTransform& base_T_tcp_ins,
                                       const RigidTransform& tcp_T_obj,
                                       const std::vector<PinInstance>& insertion_pins,
                                       double hole_diameter);

struct HoleVerdict {
  int pin_id = -1;
  bool ok = false;
  double center_x = 0, center_y = 0;  // projected hole center, px
  double radius_px = 0;               // projected hole radius
  double tip_x = 0, tip_y = 0;        // projected pin tip
};

struct OverlayResult {
  ImageRGB image;
  std::vector<HoleVerdict> verdicts;
  bool all_ok = true;
};

// Projects the holes into the image and marks each green when the
// corresponding pin tip falls inside the hole circle shrunk by the pin's
// projected radius, red otherwise.
OverlayResult overlay_holes(const ImageU8& image, const RigidTransform& cam_T_board,
                            const InsertionRecord& record,
                            const std::vector<PinInstance>& pins,
                            const RigidTransform& cam_T_obj, const PinholeCamera& cam);

void save_insertion_record(const InsertionRecord& record, const std::filesystem::path& path);
InsertionRecord load_insertion_record(const std::filesystem::path& path);

}  // namespace pinspect
