#include "pinspect/config.hpp"

#include <fstream>

#include "pinspect/json_util.hpp"

namespace pinspect {

using nlohmann::json;

Config default_config() { return Config{}; }

void save_config(const Config& c, const std::filesystem::path& path) {
  json j;
  j["camera"] = {{"focal_length", c.camera.focal_length},
                 {"principal_point", {c.camera.principal_point.x(), c.camera.principal_point.y()}},
                 {"width", c.camera.width},
                 {"height", c.camera.height}};
  j["working_distance"] = c.working_distance;
  j["sweep"] = {{"min_deg", c.sweep.min_deg},
                {"max_deg", c.sweep.max_deg},
                {"step_deg", c.sweep.step_deg}};
  j["feasibility"] = {{"v_min", c.feasibility.v_min}, {"o_max", c.feasibility.o_max}};
  if (c.candidates) {
    json arr = json::array();
    for (const auto& cand : *c.candidates)
      arr.push_back({{"name", cand.name}, {"cam_T_tcp", transform_to_json(cand.cam_T_tcp)}});
    j["candidates"] = arr;
  }
  j["match"] = {{"levels", c.match.levels},
                {"theta_min_deg", c.match.theta_min_deg},
                {"theta_max_deg", c.match.theta_max_deg},
                {"coarse_theta_step_deg", c.match.coarse_theta_step_deg},
                {"s_min_coarse", c.match.s_min_coarse},
                {"s_min_fine", c.match.s_min_fine},
                {"g_min", c.match.g_min},
                {"max_points", c.match.max_points},
                {"min_points_finest", c.match.min_points_finest},
                {"max_candidates", c.match.max_candidates},
                {"depth_edge_threshold", c.match.depth_edge_threshold},
                {"finger_margin", c.match.finger_margin}};
  j["classify"] = {{"rn_factor", c.classify.rn_factor},
                   {"lambda_ratio", c.classify.lambda_ratio},
                   {"r_max", c.classify.r_max},
                   {"min_neighbors", c.classify.min_neighbors}};
  j["cloud_points"] = c.cloud_points;
  j["knn"] = c.knn;
  j["seed"] = c.seed;
  j["inspect"] = {{"g_min", c.inspect.g_min},
                  {"canny_low", c.inspect.canny_low},
                  {"canny_high", c.inspect.canny_high},
                  {"distance_px", c.inspect.distance_px},
                  {"edge_overlay_px", c.inspect.edge_overlay_px},
                  {"min_edge_points", c.inspect.min_edge_points}};
  if (c.inspect.background_threshold)
    j["inspect"]["background_threshold"] = *c.inspect.background_threshold;
  j["render"] = {{"background", c.render.background},
                 {"body_albedo", c.render.body.albedo},
                 {"body_ambient", c.render.body.ambient},
                 {"pin_albedo", c.render.pin.albedo},
                 {"pin_ambient", c.render.pin.ambient}};
  j["mesh_unit_scale"] = c.mesh_unit_scale;

  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(std::string("config file: ") + e.what());
  }

  Config c;
  if (j.contains("camera")) {
    const auto& cam = j["camera"];
    c.camera.focal_length = cam.value("focal_length", c.camera.focal_length);
    if (cam.contains("principal_point"))
      c.camera.principal_point =
          Vec2(cam["principal_point"][0].get<double>(), cam["principal_point"][1].get<double>());
    c.camera.width = cam.value("width", c.camera.width);
    c.camera.height = cam.value("height", c.camera.height);
  }
  c.working_distance = j.value("working_distance", c.working_distance);
  if (j.contains("sweep")) {
    c.sweep.min_deg = j["sweep"].value("min_deg", c.sweep.min_deg);
    c.sweep.max_deg = j["sweep"].value("max_deg", c.sweep.max_deg);
    c.sweep.step_deg = j["sweep"].value("step_deg", c.sweep.step_deg);
  }
  if (j.contains("feasibility")) {
    c.feasibility.v_min = j["feasibility"].value("v_min", c.feasibility.v_min);
    c.feasibility.o_max = j["feasibility"].value("o_max", c.feasibility.o_max);
  }
  if (j.contains("candidates")) {
    std::vector<InspectionPoseCandidate> cands;
    for (const auto& e : j["candidates"]) {
      InspectionPoseCandidate cand;
      cand.name = e.at("name").get<std::string>();
      cand.cam_T_tcp = transform_from_json(e.at("cam_T_tcp"));
      cands.push_back(cand);
    }
    c.candidates = std::move(cands);
  }
  if (j.contains("match")) {
    const auto& m = j["match"];
    c.match.levels = m.value("levels", c.match.levels);
    c.match.theta_min_deg = m.value("theta_min_deg", c.match.theta_min_deg);
    c.match.theta_max_deg = m.value("theta_max_deg", c.match.theta_max_deg);
    c.match.coarse_theta_step_deg =
        m.value("coarse_theta_step_deg", c.match.coarse_theta_step_deg);
    c.match.s_min_coarse = m.value("s_min_coarse", c.match.s_min_coarse);
    c.match.s_min_fine = m.value("s_min_fine", c.match.s_min_fine);
    c.match.g_min = m.value("g_min", c.match.g_min);
    c.match.max_points = m.value("max_points", c.match.max_points);
    c.match.min_points_finest = m.value("min_points_finest", c.match.min_points_finest);
    c.match.max_candidates = m.value("max_candidates", c.match.max_candidates);
    c.match.depth_edge_threshold = m.value("depth_edge_threshold", c.match.depth_edge_threshold);
    c.match.finger_margin = m.value("finger_margin", c.match.finger_margin);
  }
  if (j.contains("classify")) {
    const auto& s = j["classify"];
    c.classify.rn_factor = s.value("rn_factor", c.classify.rn_factor);
    c.classify.lambda_ratio = s.value("lambda_ratio", c.classify.lambda_ratio);
    c.classify.r_max = s.value("r_max", c.classify.r_max);
    c.classify.min_neighbors = s.value("min_neighbors", c.classify.min_neighbors);
  }
  c.cloud_points = j.value("cloud_points", c.cloud_points);
  c.knn = j.value("knn", c.knn);
  c.seed = j.value("seed", c.seed);
  if (j.contains("inspect")) {
    const auto& i = j["inspect"];
    c.inspect.g_min = i.value("g_min", c.inspect.g_min);
    c.inspect.canny_low = i.value("canny_low", c.inspect.canny_low);
    c.inspect.canny_high = i.value("canny_high", c.inspect.canny_high);
    c.inspect.distance_px = i.value("distance_px", c.inspect.distance_px);
    c.inspect.edge_overlay_px = i.value("edge_overlay_px", c.inspect.edge_overlay_px);
    c.inspect.min_edge_points = i.value("min_edge_points", c.inspect.min_edge_points);
    if (i.contains("background_threshold"))
      c.inspect.background_threshold = i["background_threshold"].get<double>();
  }
  if (j.contains("render")) {
    const auto& r = j["render"];
    c.render.background = static_cast<uint8_t>(r.value("background", static_cast<int>(c.render.background)));
    c.render.body.albedo = r.value("body_albedo", c.render.body.albedo);
    c.render.body.ambient = r.value("body_ambient", c.render.body.ambient);
    c.render.pin.albedo = r.value("pin_albedo", c.render.pin.albedo);
    c.render.pin.ambient = r.value("pin_ambient", c.render.pin.ambient);
  }
  c.mesh_unit_scale = j.value("mesh_unit_scale", c.mesh_unit_scale);
  c.inspect.render = c.render;
  return c;
}

}  // namespace pinspect
