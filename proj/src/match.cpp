#include "pinspect/match.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>

#include "pinspect/parallel.hpp"

namespace pinspect {

double MatchConfig::theta_step_deg(int level) const {
  return coarse_theta_step_deg / static_cast<double>(1 << (levels - 1 - level));
}

std::vector<double> MatchConfig::thetas_rad(int level) const {
  const double step = theta_step_deg(level);
  const int n = static_cast<int>(std::round((theta_max_deg - theta_min_deg) / step));
  std::vector<double> out;
  out.reserve(n + 1);
  for (int i = 0; i <= n; ++i) out.push_back(rad(theta_min_deg + i * step));
  return out;
}

const Template* TemplateSet::find(int level, double theta) const {
  if (level < 0 || level >= static_cast<int>(per_level.size())) return nullptr;
  const Template* best = nullptr;
  double best_d = 1e300;
  for (const auto& t : per_level[level]) {
    const double d = std::abs(t.theta - theta);
    if (d < best_d) {
      best_d = d;
      best = &t;
    }
  }
  return best;
}

namespace {

struct LevelBuffers {
  ImageU8 intensity;
  ImageI32 ids;
  ImageF depth;
  ImageF finger_depth;
  GradientField gradients;
};

std::vector<LevelBuffers> build_level_buffers(const RenderBuffers& render,
                                              const ImageF& finger_depth, int levels) {
  std::vector<LevelBuffers> out(levels);
  out[0].intensity = render.intensity;
  out[0].ids = render.instance_id;
  out[0].depth = render.depth;
  out[0].finger_depth = finger_depth;
  for (int l = 1; l < levels; ++l) {
    out[l].intensity = downsample2(out[l - 1].intensity);
    out[l].ids = downsample2_nearest(out[l - 1].ids);
    out[l].depth = downsample2_min(out[l - 1].depth);
    out[l].finger_depth = downsample2_min(out[l - 1].finger_depth);
  }
  for (int l = 0; l < levels; ++l) out[l].gradients = sobel(out[l].intensity);
  return out;
}

// Silhouette / depth-discontinuity pixels owned by the nearer surface.
std::vector<std::pair<int, int>> edge_pixels(const LevelBuffers& buf, double depth_threshold) {
  std::vector<std::pair<int, int>> out;
  const int w = buf.ids.width, h = buf.ids.height;
  static const int nx[4] = {1, -1, 0, 0};
  static const int ny[4] = {0, 0, 1, -1};
  for (int y = 1; y < h - 1; ++y)
    for (int x = 1; x < w - 1; ++x) {
      const int id = buf.ids.at(x, y);
      if (id == 0) continue;
      const float z = buf.depth.at(x, y);
      bool is_edge = false;
      for (int k = 0; k < 4 && !is_edge; ++k) {
        const int qx = x + nx[k], qy = y + ny[k];
        const int qid = buf.ids.at(qx, qy);
        const float qz = buf.depth.at(qx, qy);
        if (qid == 0) {
          is_edge = true;  // silhouette against background
        } else if ((qid != id || std::abs(qz - z) > depth_threshold) && z < qz) {
          is_edge = true;  // nearer side of an internal discontinuity
        }
      }
      if (is_edge) out.emplace_back(x, y);
    }
  return out;
}

}  // namespace

TemplateSet generate_templates(const TriMesh& mesh, const GraspSpec& grasp,
                               const RigidTransform& cam_T_tcp, const PinholeCamera& cam,
                               const MatchConfig& config, const RenderOptions& render_opts) {
  grasp.validate();
  cam.validate();

  TemplateSet set;
  set.levels = config.levels;
  set.per_level.resize(config.levels);
  set.cam_T_tcp = cam_T_tcp;
  set.tcp_T_obj = grasp.tcp_in_object;
  set.cam_T_obj_nominal = cam_T_tcp * grasp.tcp_in_object;
  set.grasp_plane_depth = set.cam_T_obj_nominal.translation.z();
  set.grasp_normal_cam = cam_T_tcp.rotation.col(2);
  set.camera = cam;
  set.config = config;
  if (set.grasp_plane_depth <= 0.0)
    throw BehindCamera("inspection pose places the grasp plane behind the camera");

  // Finger occlusion buffer at the nominal TCP pose; fingers do not follow
  // the in-hand rotation.
  RenderOptions finger_opts;
  finger_opts.with_intensity = false;
  std::vector<RasterTriangle> finger_tris;
  for (const auto& box : grasp.finger_boxes) {
    const auto tris = box_triangles(box, cam_T_tcp, 1, Shading{});
    finger_tris.insert(finger_tris.end(), tris.begin(), tris.end());
  }
  const RenderBuffers finger_render = rasterize_triangles(finger_tris, cam, finger_opts);
  // Nominal finger image regions, for reports and masking tests.
  {
    int x0 = cam.width, y0 = cam.height, x1 = -1, y1 = -1;
    for (int y = 0; y < cam.height; ++y)
      for (int x = 0; x < cam.width; ++x)
        if (finger_render.instance_id.at(x, y) != 0) {
          x0 = std::min(x0, x);
          y0 = std::min(y0, y);
          x1 = std::max(x1, x);
          y1 = std::max(y1, y);
        }
    if (x1 >= x0) set.finger_regions.push_back({x0, y0, x1, y1});
  }

  const RigidTransform tcp_T_cam = invert(cam_T_tcp);
  const auto face_ids = face_instance_ids(mesh, {});
  const auto thetas_fine = config.thetas_rad(0);

  RenderOptions tpl_opts = render_opts;
  tpl_opts.with_intensity = true;

  for (size_t ti = 0; ti < thetas_fine.size(); ++ti) {
    const double theta = thetas_fine[ti];
    const RigidTransform cam_T_obj =
        cam_T_tcp * RigidTransform::rot_z(theta) * grasp.tcp_in_object;
    const RenderBuffers render =
        rasterize_triangles(build_raster_triangles(mesh, face_ids, cam_T_obj, tpl_opts), cam,
                            tpl_opts);
    const auto levels = build_level_buffers(render, finger_render.depth, config.levels);
    const Vec2 anchor = project(cam_T_obj.translation, cam);

    for (int l = 0; l < config.levels; ++l) {
      if (ti % (1u << l) != 0) continue;  // theta grids nest by powers of two
      const auto& buf = levels[l];
      const double level_scale = 1.0 / static_cast<double>(1 << l);
      const Vec2 anchor_l = anchor * level_scale;

      Template tpl;
      tpl.theta = theta;
      tpl.level = l;
      tpl.anchor = anchor;

      std::vector<EdgePoint> pts;
      for (const auto& [x, y] : edge_pixels(buf, config.depth_edge_threshold)) {
        // Finger exclusion: grasp-frame box test plus occlusion test.
        const float z = buf.depth.at(x, y);
        if (buf.finger_depth.at(x, y) < z) continue;
        const Vec2 full_px((x + 0.5) / level_scale, (y + 0.5) / level_scale);
        const Vec3 p_tcp = tcp_T_cam.apply(unproject(full_px, z, cam));
        bool in_finger = false;
        for (const auto& box : grasp.finger_boxes)
          if (box.contains(p_tcp, config.finger_margin)) {
            in_finger = true;
            break;
          }
        if (in_finger) continue;

        const auto& g = buf.gradients;
        const float mag = g.magnitude[g.idx(x, y)];
        if (mag < config.g_min) continue;
        EdgePoint ep;
        ep.dx = static_cast<float>(x + 0.5 - anchor_l.x());
        ep.dy = static_cast<float>(y + 0.5 - anchor_l.y());
        ep.gx = g.gx[g.idx(x, y)] / mag;
        ep.gy = g.gy[g.idx(x, y)] / mag;
        pts.push_back(ep);
      }

      if (pts.size() > static_cast<size_t>(config.max_points)) {
        const size_t stride = (pts.size() + config.max_points - 1) / config.max_points;
        std::vector<EdgePoint> sub;
        sub.reserve(config.max_points);
        for (size_t i = 0; i < pts.size(); i += stride) sub.push_back(pts[i]);
        pts = std::move(sub);
      }
      if (l == 0 && pts.size() < static_cast<size_t>(config.min_points_finest))
        throw TooFewEdges("template at theta " + std::to_string(deg(theta)) + " deg has " +
                          std::to_string(pts.size()) + " edge points");
      tpl.edge_points = std::move(pts);
      set.per_level[l].push_back(std::move(tpl));
    }
  }
  return set;
}

double similarity(const GradientField& g, const Template& tpl, double anchor_x, double anchor_y,
                  double g_min, OobPolicy oob) {
  if (tpl.edge_points.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& p : tpl.edge_points) {
    const int x = static_cast<int>(std::floor(anchor_x + p.dx));
    const int y = static_cast<int>(std::floor(anchor_y + p.dy));
    if (!g.inside(x, y)) {
      if (oob == OobPolicy::kThrow) throw OutOfBounds("template point outside image");
      continue;
    }
    const size_t i = g.idx(x, y);
    const float mag = g.magnitude[i];
    if (mag < g_min) continue;
    sum += std::abs((g.gx[i] * p.gx + g.gy[i] * p.gy) / mag);
  }
  return sum / static_cast<double>(tpl.edge_points.size());
}

namespace {

// Similarity with early abandonment: returns -1 as soon as the remaining
// points cannot lift the score above abort_below.
double similarity_bounded(const GradientField& g, const Template& tpl, double anchor_x,
                          double anchor_y, double g_min, double abort_below) {
  const size_t n = tpl.edge_points.size();
  if (n == 0) return 0.0;
  const double need = abort_below * static_cast<double>(n);
  double sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const auto& p = tpl.edge_points[i];
    const int x = static_cast<int>(std::floor(anchor_x + p.dx));
    const int y = static_cast<int>(std::floor(anchor_y + p.dy));
    if (g.inside(x, y)) {
      const size_t idx = g.idx(x, y);
      const float mag = g.magnitude[idx];
      if (mag >= g_min) sum += std::abs((g.gx[idx] * p.gx + g.gy[idx] * p.gy) / mag);
    }
    if ((i & 15u) == 15u && sum + static_cast<double>(n - 1 - i) < need) return -1.0;
  }
  return sum / static_cast<double>(n);
}

struct Candidate {
  int px = 0, py = 0;
  int theta_index = 0;
  double score = 0.0;
};

}  // namespace

ImagePyramid ImagePyramid::build(const ImageU8& image, int levels) {
  ImagePyramid pyr;
  pyr.images.resize(levels);
  pyr.images[0] = image;
  for (int l = 1; l < levels; ++l) pyr.images[l] = downsample2(pyr.images[l - 1]);
  pyr.gradients.resize(levels);
  for (int l = 0; l < levels; ++l) pyr.gradients[l] = sobel(pyr.images[l]);
  return pyr;
}

MatchResult refine(const ImagePyramid& pyramid, const TemplateSet& set, int px, int py,
                   int theta_index) {
  const auto& templates = set.per_level[0];
  const auto& g = pyramid.gradients[0];
  const double g_min = set.config.g_min;

  double s[3][3][3];
  for (int dt = -1; dt <= 1; ++dt) {
    const int ti = std::clamp(theta_index + dt, 0, static_cast<int>(templates.size()) - 1);
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx)
        s[dt + 1][dy + 1][dx + 1] =
            similarity(g, templates[ti], px + dx + 0.5, py + dy + 0.5, g_min, OobPolicy::kZero);
  }

  const double s0 = s[1][1][1];
  auto fit_1d = [](double sm, double s0v, double sp, double* gain) {
    const double den = sm - 2.0 * s0v + sp;
    *gain = 0.0;
    if (den >= -1e-12) return 0.0;  // not concave: fall back
    double delta = 0.5 * (sm - sp) / den;
    delta = std::clamp(delta, -0.5, 0.5);
    *gain = 0.25 * (sm - sp) * delta;
    return delta;
  };

  double gx, gy, gt = 0.0;
  const double dx = fit_1d(s[1][1][0], s0, s[1][1][2], &gx);
  const double dy = fit_1d(s[1][0][1], s0, s[1][2][1], &gy);
  const bool theta_clamped =
      theta_index == 0 || theta_index == static_cast<int>(templates.size()) - 1;
  const double dt = theta_clamped ? 0.0 : fit_1d(s[0][1][1], s0, s[2][1][1], &gt);

  MatchResult result;
  const double theta_step = rad(set.config.theta_step_deg(0));
  result.pose2d = Pose2D(px + 0.5 + dx, py + 0.5 + dy,
                         templates[theta_index].theta + dt * theta_step);
  result.score = std::min(1.0, s0 + gx + gy + gt);
  result.cam_T_obj = lift_to_3d(result.pose2d, set, set.camera);
  return result;
}

MatchResult match(const ImageU8& image, const TemplateSet& set) {
  if (image.width != set.camera.width || image.height != set.camera.height)
    throw SizeMismatch("image size does not match the template camera");
  const int levels = set.levels;
  const ImagePyramid pyramid = ImagePyramid::build(image, levels);
  const double g_min = set.config.g_min;

  // Exhaustive scan at the coarsest level.
  const int coarse = levels - 1;
  const auto& coarse_templates = set.per_level[coarse];
  const auto& cg = pyramid.gradients[coarse];
  std::vector<Candidate> raw;
  std::mutex raw_mutex;
  parallel_for(0, static_cast<size_t>(cg.height), [&](size_t y0, size_t y1) {
    std::vector<Candidate> local;
    for (size_t y = y0; y < y1; ++y)
      for (int x = 0; x < cg.width; ++x)
        for (size_t ti = 0; ti < coarse_templates.size(); ++ti) {
          const double score = similarity_bounded(cg, coarse_templates[ti], x + 0.5, y + 0.5,
                                                  g_min, set.config.s_min_coarse);
          if (score >= set.config.s_min_coarse)
            local.push_back({x, static_cast<int>(y), static_cast<int>(ti), score});
        }
    std::lock_guard<std::mutex> lock(raw_mutex);
    raw.insert(raw.end(), local.begin(), local.end());
  }, 16);

  if (raw.empty()) throw NoMatch("no candidate above the coarse score threshold");

  std::sort(raw.begin(), raw.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.py != b.py) return a.py < b.py;
    if (a.px != b.px) return a.px < b.px;
    return a.theta_index < b.theta_index;
  });
  std::vector<Candidate> cands;
  for (const auto& c : raw) {
    bool suppressed = false;
    for (const auto& kept : cands)
      if (std::abs(c.px - kept.px) <= 2 && std::abs(c.py - kept.py) <= 2 &&
          std::abs(c.theta_index - kept.theta_index) <= 1) {
        suppressed = true;
        break;
      }
    if (!suppressed) {
      cands.push_back(c);
      if (cands.size() >= static_cast<size_t>(set.config.max_candidates)) break;
    }
  }

  // Propagate down the pyramid within a +-1 step neighborhood per dimension.
  for (int l = coarse - 1; l >= 0; --l) {
    const auto& templates = set.per_level[l];
    const auto& g = pyramid.gradients[l];
    std::vector<Candidate> next(cands.size());
    parallel_for(0, cands.size(), [&](size_t lo, size_t hi) {
      for (size_t i = lo; i < hi; ++i) {
        const Candidate& c = cands[i];
        Candidate best{2 * c.px, 2 * c.py, 2 * c.theta_index, -1.0};
        for (int dt = -1; dt <= 1; ++dt) {
          const int ti = 2 * c.theta_index + dt;
          if (ti < 0 || ti >= static_cast<int>(templates.size())) continue;
          for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
              const int px = 2 * c.px + dx, py = 2 * c.py + dy;
              if (px < 0 || py < 0 || px >= g.width || py >= g.height) continue;
              const double score =
                  similarity_bounded(g, templates[ti], px + 0.5, py + 0.5, g_min, best.score);
              if (score > best.score ||
                  (score == best.score && std::tie(py, px, ti) <
                                              std::tie(best.py, best.px, best.theta_index)))
                best = {px, py, ti, score};
            }
        }
        next[i] = best;
      }
    });
    cands = std::move(next);
    std::erase_if(cands, [](const Candidate& c) { return c.score < 0.0; });
    if (cands.empty()) throw NoMatch("all candidates lost during pyramid descent");
  }

  const Candidate* best = nullptr;
  for (const auto& c : cands)
    if (!best || c.score > best->score ||
        (c.score == best->score &&
         std::tie(c.py, c.px, c.theta_index) <
             std::tie(best->py, best->px, best->theta_index)))
      best = &c;
  if (!best || best->score < set.config.s_min_fine)
    throw NoMatch("best candidate below the fine score threshold");

  MatchResult result = refine(pyramid, set, best->px, best->py, best->theta_index);
  if (result.score + 1e-6 < best->score) result.score = best->score;
  return result;
}

RigidTransform lift_to_3d(const Pose2D& pose, const TemplateSet& set, const PinholeCamera& cam) {
  if (set.grasp_plane_depth <= 0.0) throw NonPositiveDepth("grasp plane depth must be positive");
  const Vec3 origin = unproject(Vec2(pose.x, pose.y), set.grasp_plane_depth, cam);
  const Mat3 rot = RigidTransform::axis_angle(set.grasp_normal_cam, pose.theta).rotation *
                   set.cam_T_obj_nominal.rotation;
  return RigidTransform::from_parts(rot, origin);
}

// ---------------------------------------------------------------------------
// Serialization: little-endian binary, versioned.

namespace {
constexpr uint32_t kMagic = 0x50535453;  // "PSTS"
constexpr uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T get(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ParseError("template set: truncated file");
  return v;
}

void put_transform(std::ostream& out, const RigidTransform& t) {
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) put(out, t.rotation(r, c));
  for (int i = 0; i < 3; ++i) put(out, t.translation[i]);
}

RigidTransform get_transform(std::istream& in) {
  RigidTransform t;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) t.rotation(r, c) = get<double>(in);
  for (int i = 0; i < 3; ++i) t.translation[i] = get<double>(in);
  return t;
}
}  // namespace

void save_template_set(const TemplateSet& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  put(out, kMagic);
  put(out, kVersion);
  put(out, static_cast<int32_t>(set.levels));
  put(out, set.grasp_plane_depth);
  put_transform(out, set.cam_T_tcp);
  put_transform(out, set.tcp_T_obj);
  put_transform(out, set.cam_T_obj_nominal);
  for (int i = 0; i < 3; ++i) put(out, set.grasp_normal_cam[i]);
  put(out, set.camera.focal_length);
  put(out, set.camera.principal_point.x());
  put(out, set.camera.principal_point.y());
  put(out, static_cast<int32_t>(set.camera.width));
  put(out, static_cast<int32_t>(set.camera.height));
  put(out, set.config.levels);
  put(out, set.config.theta_min_deg);
  put(out, set.config.theta_max_deg);
  put(out, set.config.coarse_theta_step_deg);
  put(out, set.config.s_min_coarse);
  put(out, set.config.s_min_fine);
  put(out, set.config.g_min);
  put(out, set.config.max_points);
  put(out, set.config.min_points_finest);
  put(out, set.config.max_candidates);
  put(out, set.config.depth_edge_threshold);
  put(out, set.config.finger_margin);
  put(out, static_cast<uint32_t>(set.finger_regions.size()));
  for (const auto& r : set.finger_regions)
    for (int v : r) put(out, static_cast<int32_t>(v));
  for (int l = 0; l < set.levels; ++l) {
    put(out, static_cast<uint32_t>(set.per_level[l].size()));
    for (const auto& tpl : set.per_level[l]) {
      put(out, tpl.theta);
      put(out, static_cast<int32_t>(tpl.level));
      put(out, tpl.anchor.x());
      put(out, tpl.anchor.y());
      put(out, static_cast<uint32_t>(tpl.edge_points.size()));
      out.write(reinterpret_cast<const char*>(tpl.edge_points.data()),
                static_cast<std::streamsize>(tpl.edge_points.size() * sizeof(EdgePoint)));
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

TemplateSet load_template_set(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  if (get<uint32_t>(in) != kMagic) throw ParseError("template set: bad magic");
  if (get<uint32_t>(in) != kVersion) throw ParseError("template set: unsupported version");
  TemplateSet set;
  set.levels = get<int32_t>(in);
  if (set.levels < 1 || set.levels > 16) throw ParseError("template set: bad level count");
  set.grasp_plane_depth = get<double>(in);
  set.cam_T_tcp = get_transform(in);
  set.tcp_T_obj = get_transform(in);
  set.cam_T_obj_nominal = get_transform(in);
  for (int i = 0; i < 3; ++i) set.grasp_normal_cam[i] = get<double>(in);
  set.camera.focal_length = get<double>(in);
  set.camera.principal_point.x() = get<double>(in);
  set.camera.principal_point.y() = get<double>(in);
  set.camera.width = get<int32_t>(in);
  set.camera.height = get<int32_t>(in);
  set.config.levels = get<int>(in);
  set.config.theta_min_deg = get<double>(in);
  set.config.theta_max_deg = get<double>(in);
  set.config.coarse_theta_step_deg = get<double>(in);
  set.config.s_min_coarse = get<double>(in);
  set.config.s_min_fine = get<double>(in);
  set.config.g_min = get<double>(in);
  set.config.max_points = get<int>(in);
  set.config.min_points_finest = get<int>(in);
  set.config.max_candidates = get<int>(in);
  set.config.depth_edge_threshold = get<double>(in);
  set.config.finger_margin = get<double>(in);
  const uint32_t n_regions = get<uint32_t>(in);
  for (uint32_t i = 0; i < n_regions; ++i) {
    std::array<int, 4> r;
    for (int& v : r) v = get<int32_t>(in);
    set.finger_regions.push_back(r);
  }
  set.per_level.resize(set.levels);
  for (int l = 0; l < set.levels; ++l) {
    const uint32_t count = get<uint32_t>(in);
    set.per_level[l].resize(count);
    for (uint32_t i = 0; i < count; ++i) {
      Template& tpl = set.per_level[l][i];
      tpl.theta = get<double>(in);
      tpl.level = get<int32_t>(in);
      tpl.anchor.x() = get<double>(in);
      tpl.anchor.y() = get<double>(in);
      const uint32_t np = get<uint32_t>(in);
      if (np > 100000) throw ParseError("template set: corrupt point count");
      tpl.edge_points.resize(np);
      in.read(reinterpret_cast<char*>(tpl.edge_points.data()),
              static_cast<std::streamsize>(np * sizeof(EdgePoint)));
      if (!in) throw ParseError("template set: truncated points");
    }
  }
  return set;
}

}  // namespace pinspect
