#include "pinspect/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "pinspect/imgproc.hpp"
#include "pinspect/json_util.hpp"

namespace pinspect {

using nlohmann::json;

void ComponentSpec::validate() const {
  if (family != "header_grid" && family != "dsub_like" && family != "led_like")
    throw InvalidSpec("unknown family: " + family);
  if (rows < 1 || cols < 1) throw InvalidSpec("pin grid must be at least 1x1");
  if (pin_diameter <= 0 || pin_length <= 0) throw InvalidSpec("pin dimensions must be positive");
  if ((rows > 1 || cols > 1) && pitch <= pin_diameter)
    throw InvalidSpec("pitch must exceed pin diameter");
  if (body_size.minCoeff() <= 0) throw InvalidSpec("body dimensions must be positive");
  if (hole_diameter <= 2.0 * pin_radius_eff())
    throw InvalidSpec("hole diameter leaves no clearance");
  if (pin_shape != "square" && pin_shape != "cylinder")
    throw InvalidSpec("pin shape must be square or cylinder");
}

double ComponentSpec::pin_radius_eff() const {
  return pin_shape == "square" ? 0.5 * pin_diameter * std::sqrt(2.0) : 0.5 * pin_diameter;
}

double ComponentSpec::blocking_bend_angle() const {
  const double ratio = hole_clearance() / pin_length;
  return std::asin(std::clamp(ratio, 0.0, 1.0));
}

ComponentSpec default_spec(const std::string& family) {
  ComponentSpec spec;
  spec.family = family;
  if (family == "header_grid") {
    // defaults above
  } else if (family == "dsub_like") {
    spec.rows = 1;
    spec.cols = 5;
    spec.pitch = 2.0e-3;
    spec.pin_shape = "cylinder";
    spec.pin_diameter = 0.4e-3;
    spec.pin_length = 8.0e-3;
    spec.body_size = Vec3(14.0e-3, 1.2e-3, 3.0e-3);
    spec.hole_diameter = 1.1e-3;
  } else if (family == "led_like") {
    spec.rows = 2;
    spec.cols = 1;
    spec.pitch = 2.54e-3;
    spec.pin_shape = "cylinder";
    spec.pin_diameter = 0.36e-3;
    spec.pin_length = 13.0e-3;
    spec.body_size = Vec3(6.0e-3, 6.0e-3, 1.2e-3);
    spec.hole_diameter = 0.9e-3;
    spec.pin_shading = Shading{232.0, 0.88};  // bright metal legs, weak contrast
    spec.body_shading = Shading{95.0, 0.15};
  } else {
    throw InvalidSpec("unknown family: " + family);
  }
  spec.validate();
  return spec;
}

namespace {

// --- mesh builders -------------------------------------------------------

int subdiv_count(double extent, double tess) {
  return std::max(1, static_cast<int>(std::ceil(extent / tess)));
}

// Appends a subdivided axis-aligned box; returns the new vertex ids.
std::vector<int> append_box(TriMesh& mesh, const Vec3& lo, const Vec3& hi, double tess) {
  std::vector<int> added;
  const int nx = subdiv_count(hi.x() - lo.x(), tess);
  const int ny = subdiv_count(hi.y() - lo.y(), tess);
  const int nz = subdiv_count(hi.z() - lo.z(), tess);

  auto add_grid = [&](const Vec3& origin, const Vec3& du, const Vec3& dv, int nu, int nv) {
    const int base = static_cast<int>(mesh.vertices.size());
    for (int v = 0; v <= nv; ++v)
      for (int u = 0; u <= nu; ++u) {
        mesh.vertices.push_back(origin + du * (static_cast<double>(u) / nu) +
                                dv * (static_cast<double>(v) / nv));
        added.push_back(static_cast<int>(mesh.vertices.size()) - 1);
      }
    for (int v = 0; v < nv; ++v)
      for (int u = 0; u < nu; ++u) {
        const int a = base + v * (nu + 1) + u;
        const int b = a + 1;
        const int c = a + (nu + 1);
        const int d = c + 1;
        mesh.triangles.push_back({a, b, d});
        mesh.triangles.push_back({a, d, c});
      }
  };

  const Vec3 ex(hi.x() - lo.x(), 0, 0), ey(0, hi.y() - lo.y(), 0), ez(0, 0, hi.z() - lo.z());
  add_grid(lo, ex, ey, nx, ny);                      // z = lo
  add_grid(lo + ez, ex, ey, nx, ny);                 // z = hi
  add_grid(lo, ex, ez, nx, nz);                      // y = lo
  add_grid(lo + ey, ex, ez, nx, nz);                 // y = hi
  add_grid(lo, ey, ez, ny, nz);                      // x = lo
  add_grid(lo + ex, ey, ez, ny, nz);                 // x = hi
  return added;
}

// Capped cylinder from base along axis; returns new vertex ids.
std::vector<int> append_cylinder(TriMesh& mesh, const Vec3& base, const Vec3& axis, double radius,
                                 double length, int segments, double ring_spacing) {
  std::vector<int> added;
  const Vec3 a = axis.normalized();
  Vec3 ref = std::abs(a.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
  const Vec3 u = ref.cross(a).normalized();
  const Vec3 v = a.cross(u);
  const int rings = std::max(1, static_cast<int>(std::ceil(length / ring_spacing)));
  const int base_idx = static_cast<int>(mesh.vertices.size());

  for (int r = 0; r <= rings; ++r) {
    const double t = length * static_cast<double>(r) / rings;
    for (int s = 0; s < segments; ++s) {
      const double phi = 2.0 * kPi * s / segments;
      mesh.vertices.push_back(base + a * t + radius * (std::cos(phi) * u + std::sin(phi) * v));
      added.push_back(static_cast<int>(mesh.vertices.size()) - 1);
    }
  }
  for (int r = 0; r < rings; ++r)
    for (int s = 0; s < segments; ++s) {
      const int s1 = (s + 1) % segments;
      const int i00 = base_idx + r * segments + s;
      const int i01 = base_idx + r * segments + s1;
      const int i10 = base_idx + (r + 1) * segments + s;
      const int i11 = base_idx + (r + 1) * segments + s1;
      mesh.triangles.push_back({i00, i01, i11});
      mesh.triangles.push_back({i00, i11, i10});
    }
  // caps
  for (int end = 0; end < 2; ++end) {
    const Vec3 center = end == 0 ? base : Vec3(base + a * length);
    const int ci = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back(center);
    added.push_back(ci);
    const int ring0 = base_idx + (end == 0 ? 0 : rings * segments);
    for (int s = 0; s < segments; ++s) {
      const int s1 = (s + 1) % segments;
      if (end == 0)
        mesh.triangles.push_back({ci, ring0 + s1, ring0 + s});
      else
        mesh.triangles.push_back({ci, ring0 + s, ring0 + s1});
    }
  }
  return added;
}

// Square prism pin: a thin box along -Z with rings along its length.
std::vector<int> append_square_pin(TriMesh& mesh, const Vec3& base, double side, double length,
                                   double ring_spacing) {
  const double h = 0.5 * side;
  const Vec3 lo(base.x() - h, base.y() - h, base.z() - length);
  const Vec3 hi(base.x() + h, base.y() + h, base.z());
  return append_box(mesh, lo, hi, std::max(side, ring_spacing));
}

// Lat-long hemisphere dome sitting on z = z0, apex up.
std::vector<int> append_dome(TriMesh& mesh, const Vec3& center, double radius, int segments,
                             int stacks) {
  std::vector<int> added;
  const int base_idx = static_cast<int>(mesh.vertices.size());
  for (int st = 0; st < stacks; ++st) {
    const double a = 0.5 * kPi * st / stacks;  // 0 at equator
    for (int s = 0; s < segments; ++s) {
      const double phi = 2.0 * kPi * s / segments;
      mesh.vertices.push_back(center + Vec3(radius * std::cos(a) * std::cos(phi),
                                            radius * std::cos(a) * std::sin(phi),
                                            radius * std::sin(a)));
      added.push_back(static_cast<int>(mesh.vertices.size()) - 1);
    }
  }
  const int apex = static_cast<int>(mesh.vertices.size());
  mesh.vertices.push_back(center + Vec3(0, 0, radius));
  added.push_back(apex);
  for (int st = 0; st + 1 < stacks; ++st)
    for (int s = 0; s < segments; ++s) {
      const int s1 = (s + 1) % segments;
      const int i00 = base_idx + st * segments + s;
      const int i01 = base_idx + st * segments + s1;
      const int i10 = base_idx + (st + 1) * segments + s;
      const int i11 = base_idx + (st + 1) * segments + s1;
      mesh.triangles.push_back({i00, i01, i11});
      mesh.triangles.push_back({i00, i11, i10});
    }
  const int last = base_idx + (stacks - 1) * segments;
  for (int s = 0; s < segments; ++s) {
    const int s1 = (s + 1) % segments;
    mesh.triangles.push_back({last + s, last + s1, apex});
  }
  return added;
}

struct PinSite {
  Vec3 base;
  bool is_stud = false;
};

}  // namespace

GeneratedComponent generate_component(const ComponentSpec& spec) {
  spec.validate();
  GeneratedComponent out;
  TriMesh& mesh = out.mesh;
  std::vector<std::vector<int>> pin_vertex_sets;
  std::vector<PinSite> sites;

  const double embed = 0.2e-3;  // pins reach slightly into the body

  if (spec.family == "header_grid" || spec.family == "dsub_like") {
    const Vec3& bs = spec.body_size;
    append_box(mesh, Vec3(-bs.x() / 2, -bs.y() / 2, -bs.z() / 2),
               Vec3(bs.x() / 2, bs.y() / 2, bs.z() / 2), spec.body_tess);

    if (spec.family == "dsub_like") {
      const double span = (spec.cols - 1) * spec.pitch;
      const double wall_gap = 0.8e-3;
      const double x0 = span / 2 + wall_gap;
      const double ztop = -bs.z() / 2;
      const double zbot = ztop - spec.shell_depth;
      append_box(mesh, Vec3(x0, -spec.shell_halfwidth, zbot),
                 Vec3(x0 + spec.shell_thickness, spec.shell_halfwidth, ztop), spec.body_tess);
      append_box(mesh, Vec3(-x0 - spec.shell_thickness, -spec.shell_halfwidth, zbot),
                 Vec3(-x0, spec.shell_halfwidth, ztop), spec.body_tess);
      if (spec.shell_front_wall) {
        append_box(mesh, Vec3(-x0 - spec.shell_thickness, -spec.shell_halfwidth - spec.shell_thickness, zbot),
                   Vec3(x0 + spec.shell_thickness, -spec.shell_halfwidth, ztop), spec.body_tess);
        append_box(mesh, Vec3(-x0 - spec.shell_thickness, spec.shell_halfwidth, zbot),
                   Vec3(x0 + spec.shell_thickness, spec.shell_halfwidth + spec.shell_thickness, ztop),
                   spec.body_tess);
      }
    }

    for (int r = 0; r < spec.rows; ++r)
      for (int c = 0; c < spec.cols; ++c) {
        PinSite site;
        site.base = Vec3((c - 0.5 * (spec.cols - 1)) * spec.pitch,
                         (r - 0.5 * (spec.rows - 1)) * spec.pitch, -bs.z() / 2);
        sites.push_back(site);
      }
    if (spec.family == "dsub_like" && spec.with_studs) {
      const double span = (spec.cols - 1) * spec.pitch;
      for (double sx : {-(span / 2 + 1.2e-3), span / 2 + 1.2e-3}) {
        PinSite stud;
        stud.base = Vec3(sx, 0, bs.z() / 2);
        stud.is_stud = true;
        sites.push_back(stud);
      }
    }
  } else {  // led_like
    const double fr = spec.flange_diameter / 2;
    const double ft = spec.flange_thickness;
    // flange disc: squat cylinder about Z
    append_cylinder(mesh, Vec3(0, 0, -ft / 2), Vec3(0, 0, 1), fr, ft, 24, spec.body_tess);
    append_dome(mesh, Vec3(0, 0, ft / 2), spec.dome_radius, 20, 10);
    // rim tab along +X marks the rotation
    append_box(mesh, Vec3(fr - 0.3e-3, -spec.tab_width / 2, -ft / 2),
               Vec3(fr + spec.tab_length, spec.tab_width / 2, ft / 2), spec.body_tess);

    for (int r = 0; r < spec.rows; ++r)
      for (int c = 0; c < spec.cols; ++c) {
        PinSite site;
        site.base = Vec3((c - 0.5 * (spec.cols - 1)) * spec.pitch,
                         (r - 0.5 * (spec.rows - 1)) * spec.pitch, -ft / 2);
        sites.push_back(site);
      }
  }

  const size_t body_vertex_count = mesh.vertices.size();
  for (const auto& site : sites) {
    std::vector<int> ids;
    if (site.is_stud) {
      ids = append_cylinder(mesh, site.base - Vec3(0, 0, embed), Vec3(0, 0, 1),
                            spec.stud_diameter / 2, spec.stud_length + embed, spec.pin_segments,
                            spec.pin_ring_spacing);
    } else if (spec.pin_shape == "cylinder") {
      ids = append_cylinder(mesh, site.base + Vec3(0, 0, embed), Vec3(0, 0, -1),
                            spec.pin_diameter / 2, spec.pin_length + embed, spec.pin_segments,
                            spec.pin_ring_spacing);
    } else {
      ids = append_square_pin(mesh, site.base + Vec3(0, 0, embed), spec.pin_diameter,
                              spec.pin_length + embed, spec.pin_ring_spacing);
    }
    pin_vertex_sets.push_back(std::move(ids));
  }

  // Weld duplicate grid vertices so a save/load round trip is id-stable.
  // Pins never share coordinates with the body, so components stay apart.
  const std::vector<int> remap = mesh.cleanup();
  (void)body_vertex_count;
  for (auto& ids : pin_vertex_sets) {
    std::vector<int> mapped;
    for (int v : ids)
      if (remap[v] >= 0) mapped.push_back(remap[v]);
    std::sort(mapped.begin(), mapped.end());
    mapped.erase(std::unique(mapped.begin(), mapped.end()), mapped.end());
    ids = std::move(mapped);
  }

  out.vertex_labels.assign(mesh.vertices.size(), 0);
  for (const auto& ids : pin_vertex_sets)
    for (int v : ids) out.vertex_labels[v] = 1;

  for (size_t k = 0; k < sites.size(); ++k) {
    PinInstance pin;
    pin.id = static_cast<int>(k);
    pin.vertex_ids = pin_vertex_sets[k];
    const auto& site = sites[k];
    if (site.is_stud) {
      pin.axis = Vec3(0, 0, 1);
      pin.base_point = site.base;
      pin.tip_point = site.base + Vec3(0, 0, spec.stud_length);
      pin.nominal_radius = spec.stud_diameter / 2;
    } else {
      pin.axis = Vec3(0, 0, -1);
      pin.base_point = site.base;
      pin.tip_point = site.base - Vec3(0, 0, spec.pin_length);
      pin.nominal_radius = spec.pin_radius_eff();
      out.insertion_pin_ids.push_back(pin.id);
    }
    out.instances.push_back(std::move(pin));
  }
  return out;
}

GraspSpec default_grasp(const ComponentSpec& spec) {
  GraspSpec grasp;
  Mat3 r;
  r.col(0) = Vec3(1, 0, 0);   // x_tcp in object frame
  r.col(1) = Vec3(0, -1, 0);  // y_tcp
  r.col(2) = Vec3(0, 0, -1);  // z_tcp along the pins
  grasp.tcp_in_object = RigidTransform::from_parts(r, Vec3::Zero());

  if (spec.family == "led_like") {
    // Fingers flank the dome (TCP -Z side).
    grasp.finger_boxes.push_back(
        {Vec3(-2.5e-3, 1.2e-3, -3.6e-3), Vec3(2.5e-3, 4.5e-3, -0.4e-3)});
    grasp.finger_boxes.push_back(
        {Vec3(-2.5e-3, -4.5e-3, -3.6e-3), Vec3(2.5e-3, -1.2e-3, -0.4e-3)});
  } else {
    // Fingers grip the plate ends along X; they stop short of the pin plane.
    const double hx = spec.body_size.x() / 2;
    const double hz = spec.body_size.z() / 2;
    grasp.finger_boxes.push_back({Vec3(hx - 0.4e-3, -2.5e-3, -hz - 1.5e-3),
                                  Vec3(hx + 4.0e-3, 2.5e-3, hz - 0.3e-3)});
    grasp.finger_boxes.push_back({Vec3(-hx - 4.0e-3, -2.5e-3, -hz - 1.5e-3),
                                  Vec3(-hx + 0.4e-3, 2.5e-3, hz - 0.3e-3)});
  }
  return grasp;
}

TriMesh bend_pin(const TriMesh& mesh, const std::vector<PinInstance>& instances, int pin_id,
                 double angle, double azimuth) {
  if (angle < 0.0 || angle > rad(45.0))
    throw InvalidSpec("bend angle must be within [0, 45] degrees");
  const PinInstance* pin = nullptr;
  for (const auto& p : instances)
    if (p.id == pin_id) pin = &p;
  if (!pin) throw UnknownPin("pin id " + std::to_string(pin_id));

  TriMesh bent = mesh;
  if (angle == 0.0) return bent;

  const Vec3 a = pin->axis.normalized();
  const Vec3 ref = std::abs(a.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
  const Vec3 u = ref.cross(a).normalized();
  const Vec3 v = a.cross(u);
  const Vec3 w = std::cos(azimuth) * u + std::sin(azimuth) * v;
  const Mat3 rot = Eigen::AngleAxisd(angle, w).toRotationMatrix();
  for (int vid : pin->vertex_ids)
    bent.vertices[vid] = pin->base_point + rot * (mesh.vertices[vid] - pin->base_point);
  bent.compute_vertex_normals();
  return bent;
}

PinInstance bend_instance(const PinInstance& pin, double angle, double azimuth) {
  PinInstance out = pin;
  if (angle == 0.0) return out;
  const Vec3 a = pin.axis.normalized();
  const Vec3 ref = std::abs(a.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
  const Vec3 u = ref.cross(a).normalized();
  const Vec3 v = a.cross(u);
  const Vec3 w = std::cos(azimuth) * u + std::sin(azimuth) * v;
  const Mat3 rot = Eigen::AngleAxisd(angle, w).toRotationMatrix();
  out.axis = rot * pin.axis;
  out.tip_point = pin.base_point + rot * (pin.tip_point - pin.base_point);
  return out;
}

double bend_deflection(double pin_length, double angle) {
  return pin_length * std::sin(angle);
}

SceneTruth make_scene_truth(const RigidTransform& cam_T_tcp_inspection,
                            const RigidTransform& tcp_T_obj, double dx, double dy,
                            double dtheta) {
  SceneTruth truth;
  truth.dx = dx;
  truth.dy = dy;
  truth.dtheta = dtheta;
  truth.cam_T_tcp = RigidTransform::translate(Vec3(dx, dy, 0)) * cam_T_tcp_inspection *
                    RigidTransform::rot_z(dtheta);
  truth.cam_T_obj = truth.cam_T_tcp * tcp_T_obj;
  return truth;
}

SceneOptions scene_options_for(const ComponentSpec& spec) {
  SceneOptions opts;
  opts.render.background = spec.background;
  opts.render.body = spec.body_shading;
  opts.render.pin = spec.pin_shading;
  return opts;
}

std::pair<ImageU8, RenderBuffers> render_scene(const TriMesh& mesh,
                                               const std::vector<PinInstance>& instances,
                                               const SceneTruth& truth, const GraspSpec& grasp,
                                               const PinholeCamera& cam,
                                               const SceneOptions& options) {
  const auto face_ids = face_instance_ids(mesh, instances);
  auto tris = build_raster_triangles(mesh, face_ids, truth.cam_T_obj, options.render);
  if (options.with_fingers)
    for (const auto& box : grasp.finger_boxes) {
      const auto finger = box_triangles(box, truth.cam_T_tcp, 1, options.finger);
      tris.insert(tris.end(), finger.begin(), finger.end());
    }
  RenderBuffers buffers = rasterize_triangles(tris, cam, options.render);
  ImageU8 image = buffers.intensity;
  add_gaussian_noise(image, truth.noise_sigma, truth.noise_seed);
  return {std::move(image), std::move(buffers)};
}

void save_scene_truth(const SceneTruth& truth, const std::filesystem::path& path) {
  json bent = json::array();
  for (const auto& b : truth.bent_pins)
    bent.push_back({{"pin_id", b.pin_id}, {"angle", b.angle}, {"azimuth", b.azimuth}});
  const json j{{"cam_T_obj", transform_to_json(truth.cam_T_obj)},
               {"cam_T_tcp", transform_to_json(truth.cam_T_tcp)},
               {"dx", truth.dx},
               {"dy", truth.dy},
               {"dtheta", truth.dtheta},
               {"bent_pins", bent},
               {"noise_sigma", truth.noise_sigma},
               {"noise_seed", truth.noise_seed}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

SceneTruth load_scene_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(std::string("scene truth: ") + e.what());
  }
  SceneTruth truth;
  truth.cam_T_obj = transform_from_json(j.at("cam_T_obj"));
  truth.cam_T_tcp = transform_from_json(j.at("cam_T_tcp"));
  truth.dx = j.at("dx").get<double>();
  truth.dy = j.at("dy").get<double>();
  truth.dtheta = j.at("dtheta").get<double>();
  for (const auto& b : j.at("bent_pins"))
    truth.bent_pins.push_back(
        {b.at("pin_id").get<int>(), b.at("angle").get<double>(), b.at("azimuth").get<double>()});
  truth.noise_sigma = j.at("noise_sigma").get<double>();
  truth.noise_seed = j.at("noise_seed").get<uint64_t>();
  return truth;
}

std::vector<std::array<double, 3>> pose_eval_offsets(double offset_m, double angle_deg) {
  std::vector<std::array<double, 3>> out;
  for (double a : {-angle_deg, 0.0, angle_deg})
    for (double sx : {-1.0, 1.0})
      for (double sy : {-1.0, 1.0}) out.push_back({sx * offset_m, sy * offset_m, rad(a)});
  return out;
}

void save_component_spec(const ComponentSpec& spec, const std::filesystem::path& path) {
  const json j{{"family", spec.family},
               {"rows", spec.rows},
               {"cols", spec.cols},
               {"pitch", spec.pitch},
               {"pin_shape", spec.pin_shape},
               {"pin_diameter", spec.pin_diameter},
               {"pin_length", spec.pin_length},
               {"body_size", vec3_to_json(spec.body_size)},
               {"hole_diameter", spec.hole_diameter},
               {"shell_depth", spec.shell_depth},
               {"shell_thickness", spec.shell_thickness},
               {"shell_halfwidth", spec.shell_halfwidth},
               {"shell_front_wall", spec.shell_front_wall},
               {"with_studs", spec.with_studs},
               {"stud_diameter", spec.stud_diameter},
               {"stud_length", spec.stud_length},
               {"flange_diameter", spec.flange_diameter},
               {"flange_thickness", spec.flange_thickness},
               {"dome_radius", spec.dome_radius},
               {"tab_length", spec.tab_length},
               {"tab_width", spec.tab_width},
               {"pin_segments", spec.pin_segments},
               {"pin_ring_spacing", spec.pin_ring_spacing},
               {"body_tess", spec.body_tess},
               {"body_albedo", spec.body_shading.albedo},
               {"body_ambient", spec.body_shading.ambient},
               {"pin_albedo", spec.pin_shading.albedo},
               {"pin_ambient", spec.pin_shading.ambient},
               {"background", spec.background},
               {"seed", spec.seed}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

ComponentSpec load_component_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(std::string("component spec: ") + e.what());
  }
  ComponentSpec spec = default_spec(j.value("family", "header_grid"));
  spec.rows = j.value("rows", spec.rows);
  spec.cols = j.value("cols", spec.cols);
  spec.pitch = j.value("pitch", spec.pitch);
  spec.pin_shape = j.value("pin_shape", spec.pin_shape);
  spec.pin_diameter = j.value("pin_diameter", spec.pin_diameter);
  spec.pin_length = j.value("pin_length", spec.pin_length);
  if (j.contains("body_size")) spec.body_size = vec3_from_json(j["body_size"]);
  spec.hole_diameter = j.value("hole_diameter", spec.hole_diameter);
  spec.shell_depth = j.value("shell_depth", spec.shell_depth);
  spec.shell_thickness = j.value("shell_thickness", spec.shell_thickness);
  spec.shell_halfwidth = j.value("shell_halfwidth", spec.shell_halfwidth);
  spec.shell_front_wall = j.value("shell_front_wall", spec.shell_front_wall);
  spec.with_studs = j.value("with_studs", spec.with_studs);
  spec.stud_diameter = j.value("stud_diameter", spec.stud_diameter);
  spec.stud_length = j.value("stud_length", spec.stud_length);
  spec.flange_diameter = j.value("flange_diameter", spec.flange_diameter);
  spec.flange_thickness = j.value("flange_thickness", spec.flange_thickness);
  spec.dome_radius = j.value("dome_radius", spec.dome_radius);
  spec.tab_length = j.value("tab_length", spec.tab_length);
  spec.tab_width = j.value("tab_width", spec.tab_width);
  spec.pin_segments = j.value("pin_segments", spec.pin_segments);
  spec.pin_ring_spacing = j.value("pin_ring_spacing", spec.pin_ring_spacing);
  spec.body_tess = j.value("body_tess", spec.body_tess);
  spec.body_shading.albedo = j.value("body_albedo", spec.body_shading.albedo);
  spec.body_shading.ambient = j.value("body_ambient", spec.body_shading.ambient);
  spec.pin_shading.albedo = j.value("pin_albedo", spec.pin_shading.albedo);
  spec.pin_shading.ambient = j.value("pin_ambient", spec.pin_shading.ambient);
  spec.background = j.value("background", spec.background);
  spec.seed = j.value("seed", spec.seed);
  spec.validate();
  return spec;
}

}  // namespace pinspect
