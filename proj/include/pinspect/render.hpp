#pragma once

#include <limits>
#include <vector>

#include "pinspect/image.hpp"
#include "pinspect/mesh.hpp"
#include "pinspect/pinseg.hpp"

namespace pinspect {

// Z-buffered render output. instance_id: 0 = background, 1 = body,
// 2 + pin id for pins. depth +inf on background pixels.
struct RenderBuffers {
  ImageF depth;
  ImageI32 instance_id;
  ImageU8 intensity;

  static constexpr float kFarDepth = std::numeric_limits<float>::infinity();
};

// Flat headlight shading: value = albedo * (ambient + (1-ambient)*|n.v|).
struct Shading {
  double albedo = 90.0;  // 0..255
  double ambient = 0.15;
};

struct RenderOptions {
  uint8_t background = 0;
  Shading body{90.0, 0.15};
  Shading pin{80.0, 0.15};
  bool with_intensity = true;
  bool supersample = true;  // 2x2 for the intensity buffer only
};

// One camera-frame triangle ready for rasterization.
struct RasterTriangle {
  Vec3 a, b, c;
  int id = 1;
  float shade = 128.f;
};

// Core rasterizer; throws BehindCamera when any vertex has Z <= 0.
RenderBuffers rasterize_triangles(const std::vector<RasterTriangle>& tris,
                                  const PinholeCamera& cam, const RenderOptions& opts);

// Per-triangle instance ids for a mesh: 1 for body, 2 + pin id for
// triangles whose three vertices all belong to that pin.
std::vector<int> face_instance_ids(const TriMesh& mesh,
                                   const std::vector<PinInstance>& instances);

// Builds camera-frame triangles for the faces of `mesh` whose id passes
// `keep` (keep == nullptr keeps everything).
std::vector<RasterTriangle> build_raster_triangles(const TriMesh& mesh,
                                                   const std::vector<int>& face_ids,
                                                   const RigidTransform& cam_T_obj,
                                                   const RenderOptions& opts,
                                                   const std::vector<char>* keep_face = nullptr);

// Full-object render.
RenderBuffers rasterize(const TriMesh& mesh, const std::vector<PinInstance>& instances,
                        const RigidTransform& cam_T_obj, const PinholeCamera& cam,
                        const RenderOptions& opts = {});

// Fraction of the pin's solo-render pixels that survive occlusion in the
// full render. Throws PinNotVisible when the solo render covers no pixel.
double pin_visibility(const TriMesh& mesh, const std::vector<PinInstance>& instances, int pin_id,
                      const RigidTransform& cam_T_obj, const PinholeCamera& cam);

// Fraction of the pin's visible pixels that are backed by body geometry at
// greater depth (pin seen against the object instead of background).
double pin_over_body(const TriMesh& mesh, const std::vector<PinInstance>& instances, int pin_id,
                     const RigidTransform& cam_T_obj, const PinholeCamera& cam);

// Shared-buffer variants used by the pose sweep to avoid re-rendering.
double pin_visibility_from(const RenderBuffers& full, const RenderBuffers& alone, int pin_id);
double pin_over_body_from(const RenderBuffers& full, const RenderBuffers& body_only, int pin_id);

// 12 triangles of an axis-aligned box, transformed by pose.
std::vector<RasterTriangle> box_triangles(const Aabb& box, const RigidTransform& pose, int id,
                                          const Shading& shading);

// Depth/instance-id export for debugging (16-bit PNG scale helpers).
Image<uint16_t> depth_to_u16(const ImageF& depth, double scale = 10000.0);
Image<uint16_t> id_to_u16(const ImageI32& ids);

}  // namespace pinspect
