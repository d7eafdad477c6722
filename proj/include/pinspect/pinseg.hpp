#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "pinspect/mesh.hpp"

namespace pinspect {

// One segmented pin: a connected set of mesh vertices with its centerline
// geometry. axis points from base to tip; base is the end attached to the
// body. tip_point lies on the centerline at the extreme axial extent.
struct PinInstance {
  int id = 0;
  std::vector<int> vertex_ids;
  Vec3 axis = Vec3::UnitZ();
  Vec3 base_point = Vec3::Zero();
  Vec3 tip_point = Vec3::Zero();
  double nominal_radius = 0.0;

  double length() const { return (tip_point - base_point).norm(); }
};

struct SegmentationResult {
  std::vector<uint8_t> per_vertex_label;  // PointLabel per mesh vertex
  std::vector<PinInstance> instances;
  std::vector<int> insertion_instance_ids;  // kept after the TCP-direction filter
  bool merged_pins_warning = false;
};

// Geometric pin/body classifier replacing an external per-point segmenter.
// A point is "pin" when its neighborhood is elongated and its local
// cross-section radius is small. r_max is in the units of the cloud fed in.
struct ClassifyParams {
  double rn_factor = 2.5;     // neighborhood radius = rn_factor * median NN spacing
  double lambda_ratio = 4.0;  // elongation: lambda1 >= ratio * lambda2
  double r_max = 0.0015;      // cross-section radius cap
  size_t min_neighbors = 8;

  ClassifyParams scaled(double s) const {
    ClassifyParams p = *this;
    p.r_max = r_max * s;
    return p;
  }
};

std::vector<uint8_t> classify_points(const PointCloud& cloud, const ClassifyParams& params);

// Per-point label files: ingestion path for externally produced
// segmentations. Count must match the cloud.
std::vector<uint8_t> import_labels(const std::filesystem::path& path, const PointCloud& cloud);
void export_labels(const std::vector<uint8_t>& labels, const std::filesystem::path& path);

// Majority vote over the k nearest cloud points per mesh vertex (Euclidean,
// ties to the lowest point index; even k votes break toward body).
std::vector<uint8_t> transfer_labels(const PointCloud& cloud, const std::vector<uint8_t>& labels,
                                     const TriMesh& mesh, size_t k = 15);

// Connected components of pin-labeled vertices over the mesh edge graph.
std::vector<PinInstance> instance_segment(const TriMesh& mesh,
                                          const std::vector<uint8_t>& vertex_labels,
                                          bool* merged_warning = nullptr);

// Keeps instances whose tip has Z > 0 in the TCP frame.
std::vector<PinInstance> filter_insertion_pins(const std::vector<PinInstance>& instances,
                                               const GraspSpec& grasp);

// Full post-network pipeline: sample, normalize, classify (or imported
// labels), transfer, segment, filter.
SegmentationResult segment_pins(const TriMesh& mesh, const GraspSpec& grasp,
                                const ClassifyParams& params, size_t n_points = 8192,
                                uint64_t seed = 7, size_t k = 15,
                                const std::vector<uint8_t>* imported_cloud_labels = nullptr);

void save_segmentation(const SegmentationResult& seg, const std::filesystem::path& path);
SegmentationResult load_segmentation(const std::filesystem::path& path);

}  // namespace pinspect
