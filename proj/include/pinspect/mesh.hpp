#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "pinspect/geometry.hpp"

namespace pinspect {

// Indexed triangle mesh in meters. Vertex normals are area-weighted face
// normals; face normals are used directly where flat shading is wanted.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Vec3> vertex_normals;

  bool empty() const { return triangles.empty(); }
  Vec3 face_normal(size_t t) const;
  double face_area(size_t t) const;
  double surface_area() const;
  Vec3 centroid() const;

  void compute_vertex_normals();
  // Welds duplicate vertices (1e-9 grid), drops zero-area triangles and
  // unreferenced vertices. Index remap old->new is returned.
  std::vector<int> cleanup();
};

enum class PointLabel : uint8_t { kBody = 0, kPin = 1 };

struct PointCloud {
  std::vector<Vec3> positions;
  std::vector<Vec3> normals;
  std::vector<uint8_t> labels;  // optional; empty or one PointLabel per point

  size_t size() const { return positions.size(); }
  bool has_labels() const { return labels.size() == positions.size(); }
};

// Maps cloud coordinates into the normalized frame:
//   normalized = scale * (p - centroid)
struct NormalizeMap {
  Vec3 centroid = Vec3::Zero();
  double scale = 1.0;

  Vec3 apply(const Vec3& p) const { return scale * (p - centroid); }
  Vec3 invert(const Vec3& p) const { return p / scale + centroid; }
};

struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  bool contains(const Vec3& p, double margin = 0.0) const {
    return p.x() >= min.x() - margin && p.x() <= max.x() + margin &&
           p.y() >= min.y() - margin && p.y() <= max.y() + margin &&
           p.z() >= min.z() - margin && p.z() <= max.z() + margin;
  }
};

// Approximate grasp: TCP pose in the object frame plus finger occlusion
// boxes expressed in the TCP frame.
struct GraspSpec {
  RigidTransform tcp_in_object;
  std::vector<Aabb> finger_boxes;

  void validate() const {
    if (finger_boxes.empty()) throw InvalidSpec("grasp requires at least one finger box");
  }
};

// Mesh I/O. OBJ and PLY (ascii or binary little-endian); unit_scale is
// applied to positions at load (e.g. 0.001 for millimeter exports).
TriMesh load_mesh(const std::filesystem::path& path, double unit_scale = 1.0);
void save_mesh_obj(const TriMesh& mesh, const std::filesystem::path& path);

// Point cloud PLY with the label carried as a per-vertex uchar scalar.
void save_cloud_ply(const PointCloud& cloud, const std::filesystem::path& path);
PointCloud load_cloud_ply(const std::filesystem::path& path);

// Area-weighted uniform surface sampling; each sample carries its face
// normal. Deterministic for a fixed seed.
PointCloud sample_cloud(const TriMesh& mesh, size_t n, uint64_t seed = 7);

// Zero-centroid, unit-max-radius normalization. Returns the map so results
// can be carried back to mesh coordinates.
std::pair<PointCloud, NormalizeMap> normalize_cloud(const PointCloud& cloud);

void save_grasp(const GraspSpec& grasp, const std::filesystem::path& path);
GraspSpec load_grasp(const std::filesystem::path& path);

}  // namespace pinspect
