#include "pinspect/geometry.hpp"

#include <fstream>

#include "pinspect/json_util.hpp"

namespace pinspect {

using nlohmann::json;

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  RigidTransform out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

RigidTransform invert(const RigidTransform& t) {
  RigidTransform out;
  out.rotation = t.rotation.transpose();
  out.translation = -(out.rotation * t.translation);
  return out;
}

RigidTransform RigidTransform::from_matrix(const Mat4& m) {
  RigidTransform t;
  t.rotation = m.topLeftCorner<3, 3>();
  t.translation = m.topRightCorner<3, 1>();
  return t;
}

RigidTransform RigidTransform::orthonormalized() const {
  Eigen::JacobiSVD<Mat3> svd(rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0) {
    Mat3 flip = Mat3::Identity();
    flip(2, 2) = -1.0;
    r = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return from_parts(r, translation);
}

double rotation_angle_between(const RigidTransform& a, const RigidTransform& b) {
  const Mat3 d = a.rotation.transpose() * b.rotation;
  double c = (d.trace() - 1.0) * 0.5;
  c = std::clamp(c, -1.0, 1.0);
  return std::acos(c);
}

void PinholeCamera::validate() const {
  if (focal_length <= 0.0) throw InvalidSpec("focal_length must be positive");
  if (width <= 0 || height <= 0) throw InvalidSpec("image size must be positive");
  if (principal_point.x() < 0.0 || principal_point.x() > width ||
      principal_point.y() < 0.0 || principal_point.y() > height)
    throw InvalidSpec("principal point outside image bounds");
}

Vec2 project(const Vec3& point, const PinholeCamera& cam) {
  if (point.z() <= 0.0) throw NonPositiveDepth("projection requires Z > 0");
  const double inv_z = 1.0 / point.z();
  return Vec2(point.x() * cam.focal_length * inv_z + cam.principal_point.x(),
              point.y() * cam.focal_length * inv_z + cam.principal_point.y());
}

Vec3 unproject(const Vec2& px, double z, const PinholeCamera& cam) {
  return Vec3((px.x() - cam.principal_point.x()) * z / cam.focal_length,
              (px.y() - cam.principal_point.y()) * z / cam.focal_length, z);
}

static json matrix_to_json(const RigidTransform& t) {
  const Mat4 m = t.matrix();
  json rows = json::array();
  for (int r = 0; r < 4; ++r) {
    json row = json::array();
    for (int c = 0; c < 4; ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

json transform_to_json(const RigidTransform& t) { return matrix_to_json(t); }

RigidTransform transform_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw ParseError("transform: expected 4 rows");
  Mat4 m;
  for (int r = 0; r < 4; ++r) {
    if (!j[r].is_array() || j[r].size() != 4) throw ParseError("transform: expected 4 columns");
    for (int c = 0; c < 4; ++c) m(r, c) = j[r][c].get<double>();
  }
  if ((m.row(3) - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > 1e-9)
    throw ParseError("transform: bottom row must be [0 0 0 1]");
  RigidTransform t = RigidTransform::from_matrix(m);
  if (!t.is_valid(1e-6)) throw ParseError("transform: rotation not orthonormal");
  return t;
}

void save_transform(const RigidTransform& t, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << json{{"matrix", matrix_to_json(t)}}.dump(2) << "\n";
}

RigidTransform load_transform(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(std::string("transform file: ") + e.what());
  }
  if (!j.contains("matrix")) throw ParseError("transform file: missing 'matrix'");
  return transform_from_json(j["matrix"]);
}

}  // namespace pinspect
