#pragma once

#include "json.hpp"
#include "pinspect/geometry.hpp"

namespace pinspect {

// 4x4 row-major homogeneous matrix as nested JSON arrays.
nlohmann::json transform_to_json(const RigidTransform& t);
RigidTransform transform_from_json(const nlohmann::json& j);

inline nlohmann::json vec3_to_json(const Vec3& v) {
  return nlohmann::json::array({v.x(), v.y(), v.z()});
}

inline Vec3 vec3_from_json(const nlohmann::json& j) {
  return Vec3(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>());
}

}  // namespace pinspect
