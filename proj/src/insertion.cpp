#include "pinspect/insertion.hpp"

#include <fstream>

#include "pinspect/json_util.hpp"

namespace pinspect {

using nlohmann::json;

RigidTransform tcp_from_obj(const RigidTransform& cam_T_tcp, const RigidTransform& cam_T_obj) {
  return invert(cam_T_tcp) * cam_T_obj;
}

RigidTransform obj_ins_in_base(const RigidTransform& base_T_ins,
                               const RigidTransform& tcp_T_obj) {
  return base_T_ins * tcp_T_obj;
}

RigidTransform compensated_pose(const RigidTransform& base_T_obj_ins,
                                const RigidTransform& tcp_T_obj_current) {
  return base_T_obj_ins * invert(tcp_T_obj_current);
}

RigidTransform calib_in_hand(const RigidTransform& cam_T_tcp, const RigidTransform& cam_T_obj) {
  return tcp_from_obj(cam_T_tcp, cam_T_obj);
}

RigidTransform expected_cam_pose(const RigidTransform& cam_T_tcp_test,
                                 const RigidTransform& tcp_T_obj_calib) {
  return cam_T_tcp_test * tcp_T_obj_calib;
}

RigidTransform visual_correction_pose(const RigidTransform& base_T_obj,
                                      const RigidTransform& tcp_T_obj_current) {
  return base_T_obj * invert(tcp_T_obj_current);
}

InsertionRecord build_insertion_record(const RigidTransform& base_T_tcp_ins,
                                       const RigidTransform& tcp_T_obj,
                                       const std::vector<PinInstance>& insertion_pins,
                                       double hole_diameter) {
  InsertionRecord record;
  record.base_T_tcp_ins = base_T_tcp_ins;
  record.base_T_obj_ins = obj_ins_in_base(base_T_tcp_ins, tcp_T_obj);
  for (const auto& pin : insertion_pins) {
    HoleSpec hole;
    hole.center = pin.tip_point;  // board frame == inserted object frame
    hole.diameter = hole_diameter;
    hole.pin_id = pin.id;
    record.hole_specs.push_back(hole);
  }
  return record;
}

OverlayResult overlay_holes(const ImageU8& image, const RigidTransform& cam_T_board,
                            const InsertionRecord& record,
                            const std::vector<PinInstance>& pins,
                            const RigidTransform& cam_T_obj, const PinholeCamera& cam) {
  OverlayResult out;
  out.image = ImageRGB::from_gray(image);

  for (const auto& hole : record.hole_specs) {
    const Vec3 center_cam = cam_T_board.apply(hole.center);
    if (center_cam.z() <= 0.0) throw NonPositiveDepth("hole center behind camera");
    const Vec2 center_px = project(center_cam, cam);
    const double hole_radius_px = 0.5 * hole.diameter * cam.focal_length / center_cam.z();

    const PinInstance* pin = nullptr;
    for (const auto& p : pins)
      if (p.id == hole.pin_id) pin = &p;

    HoleVerdict v;
    v.pin_id = hole.pin_id;
    v.center_x = center_px.x();
    v.center_y = center_px.y();
    v.radius_px = hole_radius_px;
    if (pin) {
      const Vec3 tip_cam = cam_T_obj.apply(pin->tip_point);
      if (tip_cam.z() <= 0.0) throw NonPositiveDepth("pin tip behind camera");
      const Vec2 tip_px = project(tip_cam, cam);
      const double pin_radius_px = pin->nominal_radius * cam.focal_length / tip_cam.z();
      const double margin = hole_radius_px - pin_radius_px;
      const double off = (tip_px - center_px).norm();
      v.tip_x = tip_px.x();
      v.tip_y = tip_px.y();
      v.ok = margin > 0.0 && off <= margin;
    }
    out.all_ok = out.all_ok && v.ok;

    const uint8_t r = v.ok ? 40 : 230;
    const uint8_t g = v.ok ? 220 : 40;
    draw_circle(out.image, v.center_x, v.center_y, hole_radius_px, r, g, 40, 2);
    if (pin) draw_disc(out.image, v.tip_x, v.tip_y, 1.5, r, g, 40);
    out.verdicts.push_back(v);
  }
  return out;
}

void save_insertion_record(const InsertionRecord& record, const std::filesystem::path& path) {
  json holes = json::array();
  for (const auto& h : record.hole_specs)
    holes.push_back({{"center", vec3_to_json(h.center)},
                     {"diameter", h.diameter},
                     {"pin_id", h.pin_id}});
  const json j{{"base_T_tcp_ins", transform_to_json(record.base_T_tcp_ins)},
               {"base_T_obj_ins", transform_to_json(record.base_T_obj_ins)},
               {"holes", holes}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

InsertionRecord load_insertion_record(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(std::string("insertion record: ") + e.what());
  }
  InsertionRecord record;
  record.base_T_tcp_ins = transform_from_json(j.at("base_T_tcp_ins"));
  record.base_T_obj_ins = transform_from_json(j.at("base_T_obj_ins"));
  for (const auto& h : j.at("holes")) {
    HoleSpec hole;
    hole.center = vec3_from_json(h.at("center"));
    hole.diameter = h.at("diameter").get<double>();
    hole.pin_id = h.at("pin_id").get<int>();
    record.hole_specs.push_back(hole);
  }
  return record;
}

}  // namespace pinspect
