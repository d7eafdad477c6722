#include "pinspect/mesh.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "pinspect/json_util.hpp"

namespace pinspect {

using nlohmann::json;

Vec3 TriMesh::face_normal(size_t t) const {
  const auto& tri = triangles[t];
  const Vec3 n = (vertices[tri[1]] - vertices[tri[0]]).cross(vertices[tri[2]] - vertices[tri[0]]);
  const double len = n.norm();
  return len > 0 ? Vec3(n / len) : Vec3(0, 0, 1);
}

double TriMesh::face_area(size_t t) const {
  const auto& tri = triangles[t];
  return 0.5 * (vertices[tri[1]] - vertices[tri[0]])
                   .cross(vertices[tri[2]] - vertices[tri[0]])
                   .norm();
}

double TriMesh::surface_area() const {
  double a = 0.0;
  for (size_t t = 0; t < triangles.size(); ++t) a += face_area(t);
  return a;
}

Vec3 TriMesh::centroid() const {
  Vec3 c = Vec3::Zero();
  if (vertices.empty()) return c;
  for (const auto& v : vertices) c += v;
  return c / static_cast<double>(vertices.size());
}

void TriMesh::compute_vertex_normals() {
  vertex_normals.assign(vertices.size(), Vec3::Zero());
  for (size_t t = 0; t < triangles.size(); ++t) {
    const auto& tri = triangles[t];
    const Vec3 n = (vertices[tri[1]] - vertices[tri[0]]).cross(vertices[tri[2]] - vertices[tri[0]]);
    for (int k = 0; k < 3; ++k) vertex_normals[tri[k]] += n;  // area weighted
  }
  for (auto& n : vertex_normals) {
    const double len = n.norm();
    n = len > 1e-20 ? Vec3(n / len) : Vec3(0, 0, 1);
  }
}

std::vector<int> TriMesh::cleanup() {
  // Weld vertices on a 1e-9 m grid.
  struct Key {
    int64_t x, y, z;
    bool operator==(const Key& o) const { return x == o.x && y == o.y && z == o.z; }
  };
  struct KeyHash {
    size_t operator()(const Key& k) const {
      return std::hash<int64_t>()(k.x * 73856093 ^ k.y * 19349663 ^ k.z * 83492791);
    }
  };
  const double q = 1e9;
  std::unordered_map<Key, int, KeyHash> seen;
  std::vector<int> remap(vertices.size());
  std::vector<Vec3> welded;
  welded.reserve(vertices.size());
  for (size_t i = 0; i < vertices.size(); ++i) {
    const Key k{static_cast<int64_t>(std::llround(vertices[i].x() * q)),
                static_cast<int64_t>(std::llround(vertices[i].y() * q)),
                static_cast<int64_t>(std::llround(vertices[i].z() * q))};
    auto it = seen.find(k);
    if (it == seen.end()) {
      seen.emplace(k, static_cast<int>(welded.size()));
      remap[i] = static_cast<int>(welded.size());
      welded.push_back(vertices[i]);
    } else {
      remap[i] = it->second;
    }
  }
  vertices = std::move(welded);

  std::vector<std::array<int, 3>> kept;
  kept.reserve(triangles.size());
  for (auto& tri : triangles) {
    std::array<int, 3> t{remap[tri[0]], remap[tri[1]], remap[tri[2]]};
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) continue;
    const double area = 0.5 * (vertices[t[1]] - vertices[t[0]])
                                  .cross(vertices[t[2]] - vertices[t[0]])
                                  .norm();
    if (area < 1e-16) continue;
    kept.push_back(t);
  }
  triangles = std::move(kept);

  // Drop unreferenced vertices.
  std::vector<int> used(vertices.size(), -1);
  std::vector<Vec3> packed;
  for (auto& tri : triangles)
    for (int& v : tri) {
      if (used[v] < 0) {
        used[v] = static_cast<int>(packed.size());
        packed.push_back(vertices[v]);
      }
      v = used[v];
    }
  vertices = std::move(packed);
  for (auto& r : remap) r = r >= 0 && r < static_cast<int>(used.size()) ? used[r] : -1;

  compute_vertex_normals();
  return remap;
}

// ---------------------------------------------------------------------------
// OBJ

static TriMesh load_obj(std::istream& in) {
  TriMesh mesh;
  std::string line;
  bool saw_face_token = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) throw ParseError("obj: malformed vertex line");
      mesh.vertices.emplace_back(x, y, z);
    } else if (tag == "f") {
      saw_face_token = true;
      std::vector<int> idx;
      std::string tok;
      while (ls >> tok) {
        // v, v/vt, v//vn, v/vt/vn
        const int v = std::stoi(tok.substr(0, tok.find('/')));
        if (v == 0) throw ParseError("obj: zero face index");
        idx.push_back(v > 0 ? v - 1 : static_cast<int>(mesh.vertices.size()) + v);
      }
      if (idx.size() < 3) throw ParseError("obj: face with fewer than 3 vertices");
      for (size_t k = 1; k + 1 < idx.size(); ++k)
        mesh.triangles.push_back({idx[0], idx[static_cast<int>(k)], idx[k + 1]});
    }
  }
  if (saw_face_token)
    for (const auto& t : mesh.triangles)
      for (int v : t)
        if (v < 0 || v >= static_cast<int>(mesh.vertices.size()))
          throw ParseError("obj: face index out of range");
  return mesh;
}

void save_mesh_obj(const TriMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "# pinspect mesh\n";
  out.precision(12);
  for (const auto& v : mesh.vertices) out << "v " << v.x() << " " << v.y() << " " << v.z() << "\n";
  for (const auto& t : mesh.triangles)
    out << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
  if (!out) throw IoError("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// PLY

namespace {

struct PlyProperty {
  std::string type;  // scalar type, or list index type for lists
  std::string name;
  bool is_list = false;
  std::string count_type;
};

struct PlyElement {
  std::string name;
  size_t count = 0;
  std::vector<PlyProperty> props;
};

size_t type_size(const std::string& t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "int32" || t == "uint32" || t == "float" ||
      t == "float32")
    return 4;
  if (t == "double" || t == "float64") return 8;
  throw ParseError("ply: unknown type " + t);
}

double read_binary_scalar(std::istream& in, const std::string& t) {
  char buf[8];
  in.read(buf, static_cast<std::streamsize>(type_size(t)));
  if (!in) throw ParseError("ply: truncated binary data");
  if (t == "char" || t == "int8") return *reinterpret_cast<int8_t*>(buf);
  if (t == "uchar" || t == "uint8") return *reinterpret_cast<uint8_t*>(buf);
  if (t == "short" || t == "int16") return *reinterpret_cast<int16_t*>(buf);
  if (t == "ushort" || t == "uint16") return *reinterpret_cast<uint16_t*>(buf);
  if (t == "int" || t == "int32") return *reinterpret_cast<int32_t*>(buf);
  if (t == "uint" || t == "uint32") return *reinterpret_cast<uint32_t*>(buf);
  if (t == "float" || t == "float32") {
    float f;
    std::memcpy(&f, buf, 4);
    return f;
  }
  double d;
  std::memcpy(&d, buf, 8);
  return d;
}

double read_ascii_scalar(std::istream& in) {
  double v;
  if (!(in >> v)) throw ParseError("ply: truncated ascii data");
  return v;
}

struct PlyData {
  std::vector<PlyElement> elements;
  bool binary = false;
  // element -> property -> per-item values (lists flattened with counts)
  std::vector<std::vector<std::vector<double>>> scalars;
  std::vector<std::vector<std::vector<std::vector<double>>>> lists;
};

PlyData parse_ply(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.substr(0, 3) != "ply") throw ParseError("ply: bad magic");
  PlyData ply;
  bool header_done = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "comment" || tag == "obj_info") continue;
    if (tag == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "binary_little_endian")
        ply.binary = true;
      else if (fmt != "ascii")
        throw ParseError("ply: unsupported format " + fmt);
    } else if (tag == "element") {
      PlyElement e;
      ls >> e.name >> e.count;
      ply.elements.push_back(e);
    } else if (tag == "property") {
      if (ply.elements.empty()) throw ParseError("ply: property before element");
      PlyProperty p;
      std::string t;
      ls >> t;
      if (t == "list") {
        p.is_list = true;
        ls >> p.count_type >> p.type >> p.name;
      } else {
        p.type = t;
        ls >> p.name;
      }
      ply.elements.back().props.push_back(p);
    } else if (tag == "end_header") {
      header_done = true;
      break;
    }
  }
  if (!header_done) throw ParseError("ply: missing end_header");

  ply.scalars.resize(ply.elements.size());
  ply.lists.resize(ply.elements.size());
  for (size_t e = 0; e < ply.elements.size(); ++e) {
    const auto& el = ply.elements[e];
    ply.scalars[e].resize(el.props.size());
    ply.lists[e].resize(el.props.size());
    for (size_t i = 0; i < el.count; ++i) {
      for (size_t p = 0; p < el.props.size(); ++p) {
        const auto& prop = el.props[p];
        if (prop.is_list) {
          const size_t n = static_cast<size_t>(
              ply.binary ? read_binary_scalar(in, prop.count_type) : read_ascii_scalar(in));
          std::vector<double> items(n);
          for (size_t k = 0; k < n; ++k)
            items[k] = ply.binary ? read_binary_scalar(in, prop.type) : read_ascii_scalar(in);
          ply.lists[e][p].push_back(std::move(items));
        } else {
          ply.scalars[e][p].push_back(ply.binary ? read_binary_scalar(in, prop.type)
                                                 : read_ascii_scalar(in));
        }
      }
    }
  }
  return ply;
}

int find_prop(const PlyElement& el, const std::string& name) {
  for (size_t i = 0; i < el.props.size(); ++i)
    if (el.props[i].name == name) return static_cast<int>(i);
  return -1;
}

}  // namespace

static TriMesh load_ply_mesh(std::istream& in) {
  PlyData ply = parse_ply(in);
  TriMesh mesh;
  for (size_t e = 0; e < ply.elements.size(); ++e) {
    const auto& el = ply.elements[e];
    if (el.name == "vertex") {
      const int px = find_prop(el, "x"), py = find_prop(el, "y"), pz = find_prop(el, "z");
      if (px < 0 || py < 0 || pz < 0) throw ParseError("ply: vertex element missing x/y/z");
      mesh.vertices.resize(el.count);
      for (size_t i = 0; i < el.count; ++i)
        mesh.vertices[i] =
            Vec3(ply.scalars[e][px][i], ply.scalars[e][py][i], ply.scalars[e][pz][i]);
    } else if (el.name == "face") {
      int pl = find_prop(el, "vertex_indices");
      if (pl < 0) pl = find_prop(el, "vertex_index");
      if (pl < 0) throw ParseError("ply: face element missing vertex_indices");
      for (const auto& poly : ply.lists[e][pl]) {
        if (poly.size() < 3) throw ParseError("ply: face with fewer than 3 vertices");
        for (size_t k = 1; k + 1 < poly.size(); ++k)
          mesh.triangles.push_back({static_cast<int>(poly[0]), static_cast<int>(poly[k]),
                                    static_cast<int>(poly[k + 1])});
      }
    }
  }
  for (const auto& t : mesh.triangles)
    for (int v : t)
      if (v < 0 || v >= static_cast<int>(mesh.vertices.size()))
        throw ParseError("ply: face index out of range");
  return mesh;
}

TriMesh load_mesh(const std::filesystem::path& path, double unit_scale) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  TriMesh mesh;
  const std::string ext = path.extension().string();
  if (ext == ".obj" || ext == ".OBJ")
    mesh = load_obj(in);
  else if (ext == ".ply" || ext == ".PLY")
    mesh = load_ply_mesh(in);
  else
    throw ParseError("unsupported mesh format: " + ext);
  if (unit_scale != 1.0)
    for (auto& v : mesh.vertices) v *= unit_scale;
  mesh.cleanup();
  if (mesh.empty()) throw EmptyMesh("mesh has no valid triangles: " + path.string());
  return mesh;
}

void save_cloud_ply(const PointCloud& cloud, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size() << "\n"
      << "property double x\nproperty double y\nproperty double z\n"
      << "property double nx\nproperty double ny\nproperty double nz\n";
  if (cloud.has_labels()) out << "property uchar label\n";
  out << "end_header\n";
  out.precision(12);
  for (size_t i = 0; i < cloud.size(); ++i) {
    out << cloud.positions[i].x() << " " << cloud.positions[i].y() << " "
        << cloud.positions[i].z() << " " << cloud.normals[i].x() << " " << cloud.normals[i].y()
        << " " << cloud.normals[i].z();
    if (cloud.has_labels()) out << " " << static_cast<int>(cloud.labels[i]);
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path.string());
}

PointCloud load_cloud_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  PlyData ply = parse_ply(in);
  PointCloud cloud;
  for (size_t e = 0; e < ply.elements.size(); ++e) {
    const auto& el = ply.elements[e];
    if (el.name != "vertex") continue;
    const int px = find_prop(el, "x"), py = find_prop(el, "y"), pz = find_prop(el, "z");
    if (px < 0 || py < 0 || pz < 0) throw ParseError("ply: vertex element missing x/y/z");
    const int nx = find_prop(el, "nx"), ny = find_prop(el, "ny"), nz = find_prop(el, "nz");
    const int lb = find_prop(el, "label");
    cloud.positions.resize(el.count);
    cloud.normals.assign(el.count, Vec3(0, 0, 1));
    for (size_t i = 0; i < el.count; ++i) {
      cloud.positions[i] =
          Vec3(ply.scalars[e][px][i], ply.scalars[e][py][i], ply.scalars[e][pz][i]);
      if (nx >= 0 && ny >= 0 && nz >= 0)
        cloud.normals[i] =
            Vec3(ply.scalars[e][nx][i], ply.scalars[e][ny][i], ply.scalars[e][nz][i]);
    }
    if (lb >= 0) {
      cloud.labels.resize(el.count);
      for (size_t i = 0; i < el.count; ++i)
        cloud.labels[i] = static_cast<uint8_t>(ply.scalars[e][lb][i]);
    }
  }
  return cloud;
}

PointCloud sample_cloud(const TriMesh& mesh, size_t n, uint64_t seed) {
  if (mesh.empty()) throw EmptyMesh("cannot sample an empty mesh");
  if (n < 1) throw InvalidSpec("sample count must be >= 1");

  std::vector<double> cum(mesh.triangles.size());
  double total = 0.0;
  for (size_t t = 0; t < mesh.triangles.size(); ++t) {
    total += mesh.face_area(t);
    cum[t] = total;
  }
  if (total <= 0.0) throw EmptyMesh("mesh has zero surface area");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  PointCloud cloud;
  cloud.positions.reserve(n);
  cloud.normals.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    const double r = uni(rng) * total;
    const size_t t = std::lower_bound(cum.begin(), cum.end(), r) - cum.begin();
    const auto& tri = mesh.triangles[std::min(t, mesh.triangles.size() - 1)];
    double u = uni(rng), v = uni(rng);
    if (u + v > 1.0) {
      u = 1.0 - u;
      v = 1.0 - v;
    }
    const Vec3 p = mesh.vertices[tri[0]] + u * (mesh.vertices[tri[1]] - mesh.vertices[tri[0]]) +
                   v * (mesh.vertices[tri[2]] - mesh.vertices[tri[0]]);
    cloud.positions.push_back(p);
    cloud.normals.push_back(mesh.face_normal(std::min(t, mesh.triangles.size() - 1)));
  }
  return cloud;
}

std::pair<PointCloud, NormalizeMap> normalize_cloud(const PointCloud& cloud) {
  if (cloud.size() == 0) throw InvalidSpec("cannot normalize an empty cloud");
  NormalizeMap map;
  for (const auto& p : cloud.positions) map.centroid += p;
  map.centroid /= static_cast<double>(cloud.size());
  double max_r = 0.0;
  for (const auto& p : cloud.positions) max_r = std::max(max_r, (p - map.centroid).norm());
  map.scale = max_r > 0.0 ? 1.0 / max_r : 1.0;

  PointCloud out = cloud;
  for (auto& p : out.positions) p = map.apply(p);
  return {std::move(out), map};
}

void save_grasp(const GraspSpec& grasp, const std::filesystem::path& path) {
  json boxes = json::array();
  for (const auto& b : grasp.finger_boxes)
    boxes.push_back({{"min", {b.min.x(), b.min.y(), b.min.z()}},
                     {"max", {b.max.x(), b.max.y(), b.max.z()}}});
  json j{{"tcp_in_object", transform_to_json(grasp.tcp_in_object)}, {"finger_boxes", boxes}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

GraspSpec load_grasp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(std::string("grasp file: ") + e.what());
  }
  GraspSpec grasp;
  grasp.tcp_in_object = transform_from_json(j.at("tcp_in_object"));
  for (const auto& b : j.at("finger_boxes")) {
    Aabb box;
    box.min = Vec3(b.at("min")[0], b.at("min")[1], b.at("min")[2]);
    box.max = Vec3(b.at("max")[0], b.at("max")[1], b.at("max")[2]);
    grasp.finger_boxes.push_back(box);
  }
  grasp.validate();
  return grasp;
}

}  // namespace pinspect
