#include "pinspect/render.hpp"

#include <algorithm>
#include <cmath>

#include "pinspect/parallel.hpp"

namespace pinspect {

namespace {

struct ProjectedTri {
  double x0, y0, x1, y1, x2, y2;  // continuous pixel coords
  double iz0, iz1, iz2;           // 1/z at each vertex
  double area;                    // signed, in pixel^2
  int min_x, max_x, min_y, max_y;
  int id;
  float shade;
};

inline double edge(double ax, double ay, double bx, double by, double px, double py) {
  return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

// Projects triangles and culls degenerate ones; throws if any vertex is at
// or behind the camera plane.
std::vector<ProjectedTri> project_tris(const std::vector<RasterTriangle>& tris,
                                       const PinholeCamera& cam, int width, int height,
                                       double pixel_scale) {
  std::vector<ProjectedTri> out;
  out.reserve(tris.size());
  const double f = cam.focal_length * pixel_scale;
  const double cx = cam.principal_point.x() * pixel_scale;
  const double cy = cam.principal_point.y() * pixel_scale;
  for (const auto& t : tris) {
    if (t.a.z() <= 1e-9 || t.b.z() <= 1e-9 || t.c.z() <= 1e-9)
      throw BehindCamera("geometry at or behind the camera plane");
    ProjectedTri p;
    p.x0 = t.a.x() * f / t.a.z() + cx;
    p.y0 = t.a.y() * f / t.a.z() + cy;
    p.x1 = t.b.x() * f / t.b.z() + cx;
    p.y1 = t.b.y() * f / t.b.z() + cy;
    p.x2 = t.c.x() * f / t.c.z() + cx;
    p.y2 = t.c.y() * f / t.c.z() + cy;
    p.iz0 = 1.0 / t.a.z();
    p.iz1 = 1.0 / t.b.z();
    p.iz2 = 1.0 / t.c.z();
    p.area = edge(p.x0, p.y0, p.x1, p.y1, p.x2, p.y2);
    if (std::abs(p.area) < 1e-12) continue;
    p.min_x = std::max(0, static_cast<int>(std::floor(std::min({p.x0, p.x1, p.x2}) - 0.5)));
    p.max_x = std::min(width - 1, static_cast<int>(std::ceil(std::max({p.x0, p.x1, p.x2}))));
    p.min_y = std::max(0, static_cast<int>(std::floor(std::min({p.y0, p.y1, p.y2}) - 0.5)));
    p.max_y = std::min(height - 1, static_cast<int>(std::ceil(std::max({p.y0, p.y1, p.y2}))));
    p.id = t.id;
    p.shade = t.shade;
    out.push_back(p);
  }
  return out;
}

// Rasterizes one resolution. Parallel over fixed 64-row bands; each band
// scans every triangle, so output is independent of thread count.
void raster_pass(const std::vector<ProjectedTri>& tris, int width, int height, ImageF* depth,
                 ImageI32* ids, ImageF* shade) {
  parallel_for(0, (static_cast<size_t>(height) + 63) / 64, [&](size_t b0, size_t b1) {
    for (size_t band = b0; band < b1; ++band) {
      const int y_lo = static_cast<int>(band) * 64;
      const int y_hi = std::min(height, y_lo + 64);
      for (const auto& t : tris) {
        const int ty0 = std::max(t.min_y, y_lo);
        const int ty1 = std::min(t.max_y, y_hi - 1);
        const double inv_area = 1.0 / t.area;
        for (int y = ty0; y <= ty1; ++y) {
          const double py = y + 0.5;
          for (int x = t.min_x; x <= t.max_x; ++x) {
            const double px = x + 0.5;
            double w0 = edge(t.x1, t.y1, t.x2, t.y2, px, py) * inv_area;
            double w1 = edge(t.x2, t.y2, t.x0, t.y0, px, py) * inv_area;
            double w2 = 1.0 - w0 - w1;
            if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;  // two-sided: area sign folded in
            const double iz = w0 * t.iz0 + w1 * t.iz1 + w2 * t.iz2;
            const float z = static_cast<float>(1.0 / iz);
            float& d = depth->at(x, y);
            if (z < d) {
              d = z;
              if (ids) ids->at(x, y) = t.id;
              if (shade) shade->at(x, y) = t.shade;
            }
          }
        }
      }
    }
  }, 1);
}

}  // namespace

RenderBuffers rasterize_triangles(const std::vector<RasterTriangle>& tris,
                                  const PinholeCamera& cam, const RenderOptions& opts) {
  RenderBuffers out;
  out.depth = ImageF(cam.width, cam.height, RenderBuffers::kFarDepth);
  out.instance_id = ImageI32(cam.width, cam.height, 0);

  const auto projected = project_tris(tris, cam, cam.width, cam.height, 1.0);
  raster_pass(projected, cam.width, cam.height, &out.depth, &out.instance_id, nullptr);

  if (opts.with_intensity) {
    if (opts.supersample) {
      const int w2 = cam.width * 2, h2 = cam.height * 2;
      ImageF depth2(w2, h2, RenderBuffers::kFarDepth);
      ImageF shade2(w2, h2, static_cast<float>(opts.background));
      const auto projected2 = project_tris(tris, cam, w2, h2, 2.0);
      raster_pass(projected2, w2, h2, &depth2, nullptr, &shade2);
      out.intensity = ImageU8(cam.width, cam.height);
      for (int y = 0; y < cam.height; ++y)
        for (int x = 0; x < cam.width; ++x) {
          const float s = shade2.at(2 * x, 2 * y) + shade2.at(2 * x + 1, 2 * y) +
                          shade2.at(2 * x, 2 * y + 1) + shade2.at(2 * x + 1, 2 * y + 1);
          out.intensity.at(x, y) = static_cast<uint8_t>(std::clamp(s * 0.25f + 0.5f, 0.f, 255.f));
        }
    } else {
      ImageF shade(cam.width, cam.height, static_cast<float>(opts.background));
      ImageF depth_tmp(cam.width, cam.height, RenderBuffers::kFarDepth);
      raster_pass(projected, cam.width, cam.height, &depth_tmp, nullptr, &shade);
      out.intensity = ImageU8(cam.width, cam.height);
      for (size_t i = 0; i < shade.size(); ++i)
        out.intensity.data[i] = static_cast<uint8_t>(std::clamp(shade.data[i] + 0.5f, 0.f, 255.f));
    }
  }
  return out;
}

std::vector<int> face_instance_ids(const TriMesh& mesh,
                                   const std::vector<PinInstance>& instances) {
  std::vector<int> owner(mesh.vertices.size(), -1);
  for (const auto& pin : instances)
    for (int v : pin.vertex_ids) owner[v] = pin.id;
  std::vector<int> ids(mesh.triangles.size(), 1);
  for (size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const int o = owner[tri[0]];
    if (o >= 0 && owner[tri[1]] == o && owner[tri[2]] == o) ids[t] = 2 + o;
  }
  return ids;
}

std::vector<RasterTriangle> build_raster_triangles(const TriMesh& mesh,
                                                   const std::vector<int>& face_ids,
                                                   const RigidTransform& cam_T_obj,
                                                   const RenderOptions& opts,
                                                   const std::vector<char>* keep_face) {
  std::vector<RasterTriangle> out;
  out.reserve(mesh.triangles.size());
  for (size_t t = 0; t < mesh.triangles.size(); ++t) {
    if (keep_face && !(*keep_face)[t]) continue;
    const auto& tri = mesh.triangles[t];
    RasterTriangle rt;
    rt.a = cam_T_obj.apply(mesh.vertices[tri[0]]);
    rt.b = cam_T_obj.apply(mesh.vertices[tri[1]]);
    rt.c = cam_T_obj.apply(mesh.vertices[tri[2]]);
    rt.id = face_ids[t];
    const Shading& sh = rt.id >= 2 ? opts.pin : opts.body;
    const Vec3 n = (rt.b - rt.a).cross(rt.c - rt.a);
    const double nl = n.norm();
    const Vec3 centroid = (rt.a + rt.b + rt.c) / 3.0;
    const double cl = centroid.norm();
    const double lambert =
        nl > 0 && cl > 0 ? std::abs(n.dot(centroid) / (nl * cl)) : 1.0;
    rt.shade = static_cast<float>(
        std::clamp(sh.albedo * (sh.ambient + (1.0 - sh.ambient) * lambert), 0.0, 255.0));
    out.push_back(rt);
  }
  return out;
}

RenderBuffers rasterize(const TriMesh& mesh, const std::vector<PinInstance>& instances,
                        const RigidTransform& cam_T_obj, const PinholeCamera& cam,
                        const RenderOptions& opts) {
  const auto ids = face_instance_ids(mesh, instances);
  return rasterize_triangles(build_raster_triangles(mesh, ids, cam_T_obj, opts), cam, opts);
}

namespace {

size_t count_id(const ImageI32& ids, int value) {
  size_t n = 0;
  for (int v : ids.data) n += v == value;
  return n;
}

RenderOptions id_only_opts() {
  RenderOptions o;
  o.with_intensity = false;
  return o;
}

}  // namespace

double pin_visibility_from(const RenderBuffers& full, const RenderBuffers& alone, int pin_id) {
  const int want = 2 + pin_id;
  const size_t alone_px = count_id(alone.instance_id, want);
  if (alone_px == 0) throw PinNotVisible("pin " + std::to_string(pin_id) + " outside view");
  const size_t seen = count_id(full.instance_id, want);
  return static_cast<double>(seen) / static_cast<double>(alone_px);
}

double pin_over_body_from(const RenderBuffers& full, const RenderBuffers& body_only, int pin_id) {
  const int want = 2 + pin_id;
  size_t visible = 0, backed = 0;
  for (size_t i = 0; i < full.instance_id.size(); ++i)
    if (full.instance_id.data[i] == want) {
      ++visible;
      backed += body_only.instance_id.data[i] != 0;
    }
  return visible == 0 ? 0.0 : static_cast<double>(backed) / static_cast<double>(visible);
}

double pin_visibility(const TriMesh& mesh, const std::vector<PinInstance>& instances, int pin_id,
                      const RigidTransform& cam_T_obj, const PinholeCamera& cam) {
  const auto opts = id_only_opts();
  const auto ids = face_instance_ids(mesh, instances);
  std::vector<char> only_pin(mesh.triangles.size());
  bool any = false;
  for (size_t t = 0; t < ids.size(); ++t) {
    only_pin[t] = ids[t] == 2 + pin_id;
    any |= only_pin[t] != 0;
  }
  if (!any) throw UnknownPin("pin id " + std::to_string(pin_id));
  const auto full = rasterize(mesh, instances, cam_T_obj, cam, opts);
  const auto alone = rasterize_triangles(
      build_raster_triangles(mesh, ids, cam_T_obj, opts, &only_pin), cam, opts);
  return pin_visibility_from(full, alone, pin_id);
}

double pin_over_body(const TriMesh& mesh, const std::vector<PinInstance>& instances, int pin_id,
                     const RigidTransform& cam_T_obj, const PinholeCamera& cam) {
  const auto opts = id_only_opts();
  const auto ids = face_instance_ids(mesh, instances);
  bool any = false;
  std::vector<char> body_faces(mesh.triangles.size());
  for (size_t t = 0; t < ids.size(); ++t) {
    body_faces[t] = ids[t] == 1;
    any |= ids[t] == 2 + pin_id;
  }
  if (!any) throw UnknownPin("pin id " + std::to_string(pin_id));
  const auto full = rasterize(mesh, instances, cam_T_obj, cam, opts);
  const auto body = rasterize_triangles(
      build_raster_triangles(mesh, ids, cam_T_obj, opts, &body_faces), cam, opts);
  return pin_over_body_from(full, body, pin_id);
}

std::vector<RasterTriangle> box_triangles(const Aabb& box, const RigidTransform& pose, int id,
                                          const Shading& shading) {
  const Vec3& lo = box.min;
  const Vec3& hi = box.max;
  const Vec3 corners[8] = {
      {lo.x(), lo.y(), lo.z()}, {hi.x(), lo.y(), lo.z()}, {hi.x(), hi.y(), lo.z()},
      {lo.x(), hi.y(), lo.z()}, {lo.x(), lo.y(), hi.z()}, {hi.x(), lo.y(), hi.z()},
      {hi.x(), hi.y(), hi.z()}, {lo.x(), hi.y(), hi.z()}};
  static const int faces[12][3] = {{0, 2, 1}, {0, 3, 2}, {4, 5, 6}, {4, 6, 7},
                                   {0, 1, 5}, {0, 5, 4}, {2, 3, 7}, {2, 7, 6},
                                   {1, 2, 6}, {1, 6, 5}, {3, 0, 4}, {3, 4, 7}};
  std::vector<RasterTriangle> out;
  out.reserve(12);
  for (const auto& f : faces) {
    RasterTriangle t;
    t.a = pose.apply(corners[f[0]]);
    t.b = pose.apply(corners[f[1]]);
    t.c = pose.apply(corners[f[2]]);
    t.id = id;
    const Vec3 n = (t.b - t.a).cross(t.c - t.a);
    const Vec3 centroid = (t.a + t.b + t.c) / 3.0;
    const double nl = n.norm(), cl = centroid.norm();
    const double lambert = nl > 0 && cl > 0 ? std::abs(n.dot(centroid) / (nl * cl)) : 1.0;
    t.shade = static_cast<float>(
        std::clamp(shading.albedo * (shading.ambient + (1.0 - shading.ambient) * lambert), 0.0,
                   255.0));
    out.push_back(t);
  }
  return out;
}

Image<uint16_t> depth_to_u16(const ImageF& depth, double scale) {
  Image<uint16_t> out(depth.width, depth.height);
  for (size_t i = 0; i < depth.size(); ++i) {
    const float d = depth.data[i];
    out.data[i] = std::isinf(d) ? 0xFFFF
                                : static_cast<uint16_t>(std::clamp(d * scale, 0.0, 65534.0));
  }
  return out;
}

Image<uint16_t> id_to_u16(const ImageI32& ids) {
  Image<uint16_t> out(ids.width, ids.height);
  for (size_t i = 0; i < ids.size(); ++i)
    out.data[i] = static_cast<uint16_t>(std::clamp(ids.data[i], 0, 0xFFFF));
  return out;
}

}  // namespace pinspect
