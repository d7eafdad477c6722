#include "pinspect/pinseg.hpp"

#include <Eigen/Eigenvalues>
#include <fstream>
#include <queue>
#include <unordered_set>

#include "pinspect/json_util.hpp"
#include "pinspect/parallel.hpp"
#include "pinspect/spatial.hpp"

namespace pinspect {

using nlohmann::json;

std::vector<uint8_t> classify_points(const PointCloud& cloud, const ClassifyParams& params) {
  const size_t n = cloud.size();
  std::vector<uint8_t> labels(n, static_cast<uint8_t>(PointLabel::kBody));
  if (n < params.min_neighbors + 1) return labels;

  KdTree3 tree(cloud.positions);

  std::vector<double> nn_dist(n);
  parallel_for(0, n, [&](size_t lo, size_t hi) {
    for (size_t i = lo; i < hi; ++i)
      nn_dist[i] = tree.nearest_neighbor_distance(static_cast<int>(i));
  });
  std::vector<double> sorted = nn_dist;
  std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
  const double median_spacing = sorted[n / 2];
  const double rn = params.rn_factor * median_spacing;
  if (rn <= 0.0) return labels;

  parallel_for(0, n, [&](size_t lo, size_t hi) {
    std::vector<double> axis_dist;
    for (size_t i = lo; i < hi; ++i) {
      const auto nbrs = tree.radius(cloud.positions[i], rn);
      if (nbrs.size() < params.min_neighbors) continue;

      Vec3 mean = Vec3::Zero();
      for (int j : nbrs) mean += cloud.positions[j];
      mean /= static_cast<double>(nbrs.size());
      Mat3 cov = Mat3::Zero();
      for (int j : nbrs) {
        const Vec3 d = cloud.positions[j] - mean;
        cov += d * d.transpose();
      }
      cov /= static_cast<double>(nbrs.size());

      Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
      const Vec3 evals = eig.eigenvalues();  // ascending
      const double l1 = evals[2], l2 = evals[1];
      const bool elongated = l1 >= params.lambda_ratio * std::max(l2, 1e-30);
      if (!elongated) continue;

      const Vec3 dir = eig.eigenvectors().col(2);
      axis_dist.clear();
      axis_dist.reserve(nbrs.size());
      for (int j : nbrs) {
        const Vec3 d = cloud.positions[j] - mean;
        axis_dist.push_back((d - d.dot(dir) * dir).norm());
      }
      std::nth_element(axis_dist.begin(), axis_dist.begin() + axis_dist.size() / 2,
                       axis_dist.end());
      const double cross_radius = axis_dist[axis_dist.size() / 2];
      if (cross_radius <= params.r_max) labels[i] = static_cast<uint8_t>(PointLabel::kPin);
    }
  });
  return labels;
}

std::vector<uint8_t> import_labels(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(std::string("label file: ") + e.what());
  }
  const auto& arr = j.at("labels");
  if (arr.size() != cloud.size())
    throw SizeMismatch("label count " + std::to_string(arr.size()) + " != cloud size " +
                       std::to_string(cloud.size()));
  std::vector<uint8_t> labels(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) labels[i] = arr[i].get<uint8_t>() ? 1 : 0;
  return labels;
}

void export_labels(const std::vector<uint8_t>& labels, const std::filesystem::path& path) {
  json arr = json::array();
  for (uint8_t l : labels) arr.push_back(static_cast<int>(l));
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << json{{"labels", arr}}.dump() << "\n";
}

std::vector<uint8_t> transfer_labels(const PointCloud& cloud, const std::vector<uint8_t>& labels,
                                     const TriMesh& mesh, size_t k) {
  if (labels.size() != cloud.size()) throw SizeMismatch("labels do not match cloud");
  std::vector<uint8_t> out(mesh.vertices.size(), 0);
  if (cloud.size() == 0) return out;
  KdTree3 tree(cloud.positions);
  const size_t kk = std::min(k, cloud.size());
  parallel_for(0, mesh.vertices.size(), [&](size_t lo, size_t hi) {
    for (size_t v = lo; v < hi; ++v) {
      const auto nbrs = tree.knn(mesh.vertices[v], kk);
      size_t pin_votes = 0;
      for (const auto& [d2, idx] : nbrs) pin_votes += labels[idx] ? 1 : 0;
      out[v] = 2 * pin_votes > nbrs.size() ? 1 : 0;
    }
  });
  return out;
}

namespace {

// Analyzes one connected vertex component into a PinInstance.
PinInstance make_instance(const TriMesh& mesh, const std::vector<int>& verts,
                          const Vec3& body_centroid) {
  PinInstance pin;
  pin.vertex_ids = verts;

  Vec3 mean = Vec3::Zero();
  for (int v : verts) mean += mesh.vertices[v];
  mean /= static_cast<double>(verts.size());

  Mat3 cov = Mat3::Zero();
  for (int v : verts) {
    const Vec3 d = mesh.vertices[v] - mean;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  Vec3 axis = eig.eigenvectors().col(2);

  double lo = 1e300, hi = -1e300;
  for (int v : verts) {
    const double s = (mesh.vertices[v] - mean).dot(axis);
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  const Vec3 end_lo = mean + lo * axis;
  const Vec3 end_hi = mean + hi * axis;

  // Base is the end nearer the body.
  const bool lo_is_base = (end_lo - body_centroid).squaredNorm() <=
                          (end_hi - body_centroid).squaredNorm();
  if (!lo_is_base) {
    axis = -axis;
    std::swap(lo, hi);
    lo = -lo;
    hi = -hi;
  }
  pin.axis = axis;

  // Attachment centroid: vertices within the bottom 15% of the axial span.
  const double span = hi - lo;
  Vec3 base_acc = Vec3::Zero();
  size_t base_count = 0;
  for (int v : verts) {
    const double s = (mesh.vertices[v] - mean).dot(axis);
    if (s <= lo + 0.15 * span + 1e-12) {
      base_acc += mesh.vertices[v];
      ++base_count;
    }
  }
  const Vec3 base_raw = base_count ? Vec3(base_acc / static_cast<double>(base_count)) : end_lo;
  // Project onto the centerline so tip - base is along the axis exactly.
  pin.base_point = mean + (base_raw - mean).dot(axis) * axis;
  pin.tip_point = mean + hi * axis;

  std::vector<double> radial;
  radial.reserve(verts.size());
  for (int v : verts) {
    const Vec3 d = mesh.vertices[v] - mean;
    radial.push_back((d - d.dot(axis) * axis).norm());
  }
  std::nth_element(radial.begin(), radial.begin() + radial.size() / 2, radial.end());
  pin.nominal_radius = radial[radial.size() / 2];
  return pin;
}

}  // namespace

std::vector<PinInstance> instance_segment(const TriMesh& mesh,
                                          const std::vector<uint8_t>& vertex_labels,
                                          bool* merged_warning) {
  if (vertex_labels.size() != mesh.vertices.size())
    throw SizeMismatch("vertex labels do not match mesh");
  if (merged_warning) *merged_warning = false;

  // Adjacency via shared triangle edges, restricted to pin vertices.
  std::vector<std::vector<int>> adj(mesh.vertices.size());
  auto link = [&](int a, int b) {
    if (vertex_labels[a] && vertex_labels[b]) {
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
  };
  for (const auto& t : mesh.triangles) {
    link(t[0], t[1]);
    link(t[1], t[2]);
    link(t[2], t[0]);
  }

  Vec3 body_centroid = Vec3::Zero();
  size_t body_count = 0;
  for (size_t v = 0; v < mesh.vertices.size(); ++v)
    if (!vertex_labels[v]) {
      body_centroid += mesh.vertices[v];
      ++body_count;
    }
  if (body_count)
    body_centroid /= static_cast<double>(body_count);
  else
    body_centroid = mesh.centroid();

  std::vector<PinInstance> instances;
  std::vector<char> visited(mesh.vertices.size(), 0);
  std::vector<int> stack;
  for (size_t seed = 0; seed < mesh.vertices.size(); ++seed) {
    if (!vertex_labels[seed] || visited[seed]) continue;
    std::vector<int> comp;
    stack.assign(1, static_cast<int>(seed));
    visited[seed] = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      comp.push_back(v);
      for (int nb : adj[v])
        if (!visited[nb]) {
          visited[nb] = 1;
          stack.push_back(nb);
        }
    }
    std::sort(comp.begin(), comp.end());
    PinInstance pin = make_instance(mesh, comp, body_centroid);
    pin.id = static_cast<int>(instances.size());
    instances.push_back(std::move(pin));
  }
  return instances;
}

std::vector<PinInstance> filter_insertion_pins(const std::vector<PinInstance>& instances,
                                               const GraspSpec& grasp) {
  const RigidTransform obj_to_tcp = invert(grasp.tcp_in_object);
  std::vector<PinInstance> kept;
  for (const auto& pin : instances)
    if (obj_to_tcp.apply(pin.tip_point).z() > 0.0) kept.push_back(pin);
  return kept;
}

SegmentationResult segment_pins(const TriMesh& mesh, const GraspSpec& grasp,
                                const ClassifyParams& params, size_t n_points, uint64_t seed,
                                size_t k, const std::vector<uint8_t>* imported_cloud_labels) {
  PointCloud cloud = sample_cloud(mesh, n_points, seed);
  std::vector<uint8_t> cloud_labels;
  if (imported_cloud_labels) {
    if (imported_cloud_labels->size() != cloud.size())
      throw SizeMismatch("imported labels do not match sampled cloud size");
    cloud_labels = *imported_cloud_labels;
  } else {
    auto [normalized, map] = normalize_cloud(cloud);
    cloud_labels = classify_points(normalized, params.scaled(map.scale));
  }

  SegmentationResult result;
  result.per_vertex_label = transfer_labels(cloud, cloud_labels, mesh, k);
  result.instances = instance_segment(mesh, result.per_vertex_label, &result.merged_pins_warning);
  for (const auto& pin : filter_insertion_pins(result.instances, grasp))
    result.insertion_instance_ids.push_back(pin.id);
  return result;
}

static json instance_to_json(const PinInstance& pin) {
  return json{{"id", pin.id},
              {"vertex_ids", pin.vertex_ids},
              {"axis", vec3_to_json(pin.axis)},
              {"base_point", vec3_to_json(pin.base_point)},
              {"tip_point", vec3_to_json(pin.tip_point)},
              {"nominal_radius", pin.nominal_radius}};
}

static PinInstance instance_from_json(const json& j) {
  PinInstance pin;
  pin.id = j.at("id").get<int>();
  pin.vertex_ids = j.at("vertex_ids").get<std::vector<int>>();
  pin.axis = vec3_from_json(j.at("axis"));
  pin.base_point = vec3_from_json(j.at("base_point"));
  pin.tip_point = vec3_from_json(j.at("tip_point"));
  pin.nominal_radius = j.at("nominal_radius").get<double>();
  return pin;
}

void save_segmentation(const SegmentationResult& seg, const std::filesystem::path& path) {
  json instances = json::array();
  for (const auto& pin : seg.instances) instances.push_back(instance_to_json(pin));
  json labels = json::array();
  for (uint8_t l : seg.per_vertex_label) labels.push_back(static_cast<int>(l));
  const json j{{"per_vertex_label", labels},
               {"instances", instances},
               {"insertion_instance_ids", seg.insertion_instance_ids},
               {"merged_pins_warning", seg.merged_pins_warning}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump() << "\n";
}

SegmentationResult load_segmentation(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(std::string("segmentation file: ") + e.what());
  }
  SegmentationResult seg;
  for (const auto& l : j.at("per_vertex_label"))
    seg.per_vertex_label.push_back(l.get<uint8_t>() ? 1 : 0);
  for (const auto& i : j.at("instances")) seg.instances.push_back(instance_from_json(i));
  seg.insertion_instance_ids = j.at("insertion_instance_ids").get<std::vector<int>>();
  seg.merged_pins_warning = j.value("merged_pins_warning", false);
  return seg;
}

}  // namespace pinspect
