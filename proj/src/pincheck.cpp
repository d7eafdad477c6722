#include "pinspect/pincheck.hpp"

#include <algorithm>
#include <fstream>

#include "pinspect/json_util.hpp"

namespace pinspect {

using nlohmann::json;

std::string to_string(InspectMethod m) {
  switch (m) {
    case InspectMethod::kGradient: return "gradient";
    case InspectMethod::kIntensityOverlay: return "intensity_overlay";
    case InspectMethod::kEdgeOverlay: return "edge_overlay";
    case InspectMethod::kDistanceToEdge: return "distance_to_edge";
  }
  return "gradient";
}

InspectMethod inspect_method_from_string(const std::string& s) {
  if (s == "gradient") return InspectMethod::kGradient;
  if (s == "intensity_overlay") return InspectMethod::kIntensityOverlay;
  if (s == "edge_overlay") return InspectMethod::kEdgeOverlay;
  if (s == "distance_to_edge") return InspectMethod::kDistanceToEdge;
  throw InvalidSpec("unknown inspection method: " + s);
}

namespace {

// Expected appearance of one pin: solo render at the estimated pose.
struct PinRender {
  RenderBuffers buffers;
  std::vector<std::pair<int, int>> edge_px;  // silhouette pixels
};

PinRender render_pin(const RigidTransform& cam_T_obj, const TriMesh& mesh,
                     const std::vector<PinInstance>& instances, int pin_id,
                     const PinholeCamera& cam, const InspectConfig& cfg, bool with_intensity) {
  const auto face_ids = face_instance_ids(mesh, instances);
  std::vector<char> only(mesh.triangles.size());
  bool any = false;
  for (size_t t = 0; t < face_ids.size(); ++t) {
    only[t] = face_ids[t] == 2 + pin_id;
    any |= only[t] != 0;
  }
  if (!any) throw UnknownPin("pin id " + std::to_string(pin_id));

  RenderOptions opts = cfg.render;
  opts.with_intensity = with_intensity;
  PinRender out;
  out.buffers = rasterize_triangles(
      build_raster_triangles(mesh, face_ids, cam_T_obj, opts, &only), cam, opts);

  const auto& ids = out.buffers.instance_id;
  size_t covered = 0;
  for (int v : ids.data) covered += v != 0;
  if (covered == 0) throw PinNotVisible("pin " + std::to_string(pin_id) + " projects nowhere");

  const auto& depth = out.buffers.depth;
  for (int y = 1; y < ids.height - 1; ++y)
    for (int x = 1; x < ids.width - 1; ++x) {
      if (ids.at(x, y) == 0) continue;
      const float z = depth.at(x, y);
      const bool edge =
          ids.at(x + 1, y) == 0 || ids.at(x - 1, y) == 0 || ids.at(x, y + 1) == 0 ||
          ids.at(x, y - 1) == 0 ||
          (std::abs(depth.at(x + 1, y) - z) > cfg.depth_edge_threshold && z < depth.at(x + 1, y)) ||
          (std::abs(depth.at(x - 1, y) - z) > cfg.depth_edge_threshold && z < depth.at(x - 1, y));
      if (edge) out.edge_px.emplace_back(x, y);
    }
  return out;
}

}  // namespace

PinScore score_gradient(const ImageU8& image, const RigidTransform& cam_T_obj,
                        const TriMesh& mesh, const std::vector<PinInstance>& instances,
                        int pin_id, const PinholeCamera& cam, const InspectConfig& cfg) {
  const PinRender pr = render_pin(cam_T_obj, mesh, instances, pin_id, cam, cfg, true);
  const GradientField expected = sobel(pr.buffers.intensity);

  Template tpl;
  tpl.level = 0;
  for (const auto& [x, y] : pr.edge_px) {
    const float mag = expected.magnitude[expected.idx(x, y)];
    if (mag < cfg.g_min) continue;
    EdgePoint ep;
    ep.dx = static_cast<float>(x) + 0.5f;
    ep.dy = static_cast<float>(y) + 0.5f;
    ep.gx = expected.gx[expected.idx(x, y)] / mag;
    ep.gy = expected.gy[expected.idx(x, y)] / mag;
    tpl.edge_points.push_back(ep);
  }
  if (tpl.edge_points.size() < static_cast<size_t>(cfg.min_edge_points))
    throw PinNotVisible("pin " + std::to_string(pin_id) + " yields too few edge points");

  const GradientField g = sobel(image);
  const double s = similarity(g, tpl, 0.0, 0.0, cfg.g_min, OobPolicy::kZero);
  return PinScore{pin_id, InspectMethod::kGradient, std::clamp(s, 0.0, 1.0)};
}

PinScore score_intensity_overlay(const ImageU8& image, const RigidTransform& cam_T_obj,
                                 const TriMesh& mesh, const std::vector<PinInstance>& instances,
                                 int pin_id, const PinholeCamera& cam, const InspectConfig& cfg) {
  const PinRender pr = render_pin(cam_T_obj, mesh, instances, pin_id, cam, cfg, false);
  const double threshold =
      cfg.background_threshold ? *cfg.background_threshold : otsu_threshold(image);

  size_t expected = 0, foreground = 0;
  const auto& ids = pr.buffers.instance_id;
  for (int y = 0; y < ids.height; ++y)
    for (int x = 0; x < ids.width; ++x)
      if (ids.at(x, y) != 0) {
        ++expected;
        foreground += image.at(x, y) < threshold;
      }
  const double s = expected ? static_cast<double>(foreground) / expected : 0.0;
  return PinScore{pin_id, InspectMethod::kIntensityOverlay, s};
}

PinScore score_edge_overlay(const ImageU8& image, const RigidTransform& cam_T_obj,
                            const TriMesh& mesh, const std::vector<PinInstance>& instances,
                            int pin_id, const PinholeCamera& cam, const InspectConfig& cfg) {
  const PinRender pr = render_pin(cam_T_obj, mesh, instances, pin_id, cam, cfg, false);
  if (pr.edge_px.empty()) throw PinNotVisible("pin has no projected edges");
  const ImageU8 edges = canny_edges(image, cfg.canny_low, cfg.canny_high);
  const int r = std::max(0, static_cast<int>(cfg.edge_overlay_px));
  size_t hit = 0;
  for (const auto& [x, y] : pr.edge_px) {
    bool found = false;
    for (int dy = -r; dy <= r && !found; ++dy)
      for (int dx = -r; dx <= r && !found; ++dx) {
        const int qx = x + dx, qy = y + dy;
        found = edges.inside(qx, qy) && edges.at(qx, qy) != 0;
      }
    hit += found;
  }
  return PinScore{pin_id, InspectMethod::kEdgeOverlay,
                  static_cast<double>(hit) / static_cast<double>(pr.edge_px.size())};
}

PinScore score_distance_to_edge(const ImageU8& image, const RigidTransform& cam_T_obj,
                                const TriMesh& mesh, const std::vector<PinInstance>& instances,
                                int pin_id, const PinholeCamera& cam, const InspectConfig& cfg) {
  const PinRender pr = render_pin(cam_T_obj, mesh, instances, pin_id, cam, cfg, false);
  if (pr.edge_px.empty()) throw PinNotVisible("pin has no projected edges");
  const ImageU8 edges = canny_edges(image, cfg.canny_low, cfg.canny_high);
  const ImageF dist = distance_transform(edges);
  size_t near = 0;
  for (const auto& [x, y] : pr.edge_px) near += dist.at(x, y) < cfg.distance_px;
  return PinScore{pin_id, InspectMethod::kDistanceToEdge,
                  static_cast<double>(near) / static_cast<double>(pr.edge_px.size())};
}

PinScore score_pin(const ImageU8& image, const RigidTransform& cam_T_obj, const TriMesh& mesh,
                   const std::vector<PinInstance>& instances, int pin_id,
                   const PinholeCamera& cam, InspectMethod method, const InspectConfig& cfg) {
  switch (method) {
    case InspectMethod::kGradient:
      return score_gradient(image, cam_T_obj, mesh, instances, pin_id, cam, cfg);
    case InspectMethod::kIntensityOverlay:
      return score_intensity_overlay(image, cam_T_obj, mesh, instances, pin_id, cam, cfg);
    case InspectMethod::kEdgeOverlay:
      return score_edge_overlay(image, cam_T_obj, mesh, instances, pin_id, cam, cfg);
    case InspectMethod::kDistanceToEdge:
      return score_distance_to_edge(image, cam_T_obj, mesh, instances, pin_id, cam, cfg);
  }
  throw InvalidSpec("bad inspection method");
}

double calibrate_cutoff(const std::vector<double>& straight_scores,
                        const std::vector<double>& bent_scores) {
  if (straight_scores.empty() || bent_scores.empty())
    throw InvalidSpec("cutoff calibration needs both populations");
  const double straight_min = *std::min_element(straight_scores.begin(), straight_scores.end());
  const double bent_max = *std::max_element(bent_scores.begin(), bent_scores.end());
  if (bent_max >= straight_min)
    throw NoSeparation("bent max " + std::to_string(bent_max) + " >= straight min " +
                       std::to_string(straight_min));
  return 0.5 * (bent_max + straight_min);
}

InspectionReport inspect(const ImageU8& image, const RigidTransform& cam_T_obj,
                         const TriMesh& mesh, const std::vector<PinInstance>& instances,
                         const std::vector<int>& insertion_ids, const PinholeCamera& cam,
                         InspectMethod method, double cutoff, const InspectConfig& cfg) {
  InspectionReport report;
  report.cutoff = cutoff;
  if (insertion_ids.empty()) {
    report.min_score = 1.0;
    report.accepted = true;
    report.empty_pin_warning = true;
    return report;
  }
  for (int pin_id : insertion_ids) {
    PinScore s;
    try {
      s = score_pin(image, cam_T_obj, mesh, instances, pin_id, cam, method, cfg);
    } catch (const PinNotVisible&) {
      s = PinScore{pin_id, method, 0.0};  // not visible: reject with a zero score
    }
    report.scores.push_back(s);
    report.min_score = std::min(report.min_score, s.score);
  }
  report.accepted = report.min_score >= cutoff;
  return report;
}

void save_calibration(const CutoffCalibration& cal, const std::filesystem::path& path) {
  const json j{{"method", to_string(cal.method)},
               {"cutoff", cal.cutoff},
               {"straight_scores", cal.straight_scores},
               {"bent_scores", cal.bent_scores}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

CutoffCalibration load_calibration(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(std::string("calibration file: ") + e.what());
  }
  CutoffCalibration cal;
  cal.method = inspect_method_from_string(j.at("method").get<std::string>());
  cal.cutoff = j.at("cutoff").get<double>();
  cal.straight_scores = j.value("straight_scores", std::vector<double>{});
  cal.bent_scores = j.value("bent_scores", std::vector<double>{});
  return cal;
}

}  // namespace pinspect
