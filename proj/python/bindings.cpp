#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "pinspect/pipeline.hpp"
#include "pinspect/png_io.hpp"

namespace py = pybind11;
using namespace pinspect;

namespace {

RigidTransform transform_from_array(const Mat4& m) {
  RigidTransform t = RigidTransform::from_matrix(m);
  if (!t.is_valid(1e-6)) throw ParseError("matrix is not a rigid transform");
  return t;
}

ImageU8 image_from_array(const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw InvalidSpec("expected a 2D uint8 image");
  ImageU8 img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::memcpy(img.data.data(), a.data(), img.size());
  return img;
}

py::array_t<uint8_t> image_to_array(const ImageU8& img) {
  py::array_t<uint8_t> a({img.height, img.width});
  std::memcpy(a.mutable_data(), img.data.data(), img.size());
  return a;
}

py::array_t<float> depth_to_array(const ImageF& img) {
  py::array_t<float> a({img.height, img.width});
  std::memcpy(a.mutable_data(), img.data.data(), img.size() * sizeof(float));
  return a;
}

py::array_t<int32_t> ids_to_array(const ImageI32& img) {
  py::array_t<int32_t> a({img.height, img.width});
  std::memcpy(a.mutable_data(), img.data.data(), img.size() * sizeof(int32_t));
  return a;
}

}  // namespace

PYBIND11_MODULE(_pinspect, m) {
  m.doc() = "in-hand pose estimation and pre-insertion pin inspection";

  py::register_exception<NoMatch>(m, "NoMatchError");
  py::register_exception<NoFeasiblePose>(m, "NoFeasiblePoseError");
  py::register_exception<NoSeparation>(m, "NoSeparationError");

  // --- geometry ----------------------------------------------------------
  m.def("compose", [](const Mat4& a, const Mat4& b) {
    return (transform_from_array(a) * transform_from_array(b)).matrix();
  });
  m.def("invert", [](const Mat4& t) { return invert(transform_from_array(t)).matrix(); });
  m.def("rot_z", [](double a) { return RigidTransform::rot_z(a).matrix(); });

  py::class_<PinholeCamera>(m, "PinholeCamera")
      .def(py::init<>())
      .def_readwrite("focal_length", &PinholeCamera::focal_length)
      .def_readwrite("width", &PinholeCamera::width)
      .def_readwrite("height", &PinholeCamera::height)
      .def_property(
          "principal_point", [](const PinholeCamera& c) { return c.principal_point; },
          [](PinholeCamera& c, const Vec2& v) { c.principal_point = v; });
  m.def("project",
        [](const Vec3& p, const PinholeCamera& cam) { return project(p, cam); });

  // --- insertion algebra --------------------------------------------------
  m.def("tcp_from_obj", [](const Mat4& cam_T_tcp, const Mat4& cam_T_obj) {
    return tcp_from_obj(transform_from_array(cam_T_tcp), transform_from_array(cam_T_obj))
        .matrix();
  });
  m.def("compensated_pose", [](const Mat4& base_T_obj_ins, const Mat4& tcp_T_obj_current) {
    return compensated_pose(transform_from_array(base_T_obj_ins),
                            transform_from_array(tcp_T_obj_current))
        .matrix();
  });
  m.def("expected_cam_pose", [](const Mat4& cam_T_tcp_test, const Mat4& tcp_T_obj_calib) {
    return expected_cam_pose(transform_from_array(cam_T_tcp_test),
                             transform_from_array(tcp_T_obj_calib))
        .matrix();
  });

  // --- synthetic components ----------------------------------------------
  py::class_<ComponentSpec>(m, "ComponentSpec")
      .def(py::init<>())
      .def_readwrite("family", &ComponentSpec::family)
      .def_readwrite("rows", &ComponentSpec::rows)
      .def_readwrite("cols", &ComponentSpec::cols)
      .def_readwrite("pitch", &ComponentSpec::pitch)
      .def_readwrite("pin_diameter", &ComponentSpec::pin_diameter)
      .def_readwrite("pin_length", &ComponentSpec::pin_length)
      .def_readwrite("hole_diameter", &ComponentSpec::hole_diameter)
      .def_readwrite("seed", &ComponentSpec::seed)
      .def("blocking_bend_angle", &ComponentSpec::blocking_bend_angle);
  m.def("default_spec", &default_spec);

  py::class_<PinInstance>(m, "PinInstance")
      .def_readonly("id", &PinInstance::id)
      .def_readonly("vertex_ids", &PinInstance::vertex_ids)
      .def_property_readonly("axis", [](const PinInstance& p) { return p.axis; })
      .def_property_readonly("base_point", [](const PinInstance& p) { return p.base_point; })
      .def_property_readonly("tip_point", [](const PinInstance& p) { return p.tip_point; })
      .def_readonly("nominal_radius", &PinInstance::nominal_radius);

  py::class_<GeneratedComponent>(m, "GeneratedComponent")
      .def_property_readonly("vertices",
                             [](const GeneratedComponent& g) {
                               py::array_t<double> a(
                                   {static_cast<py::ssize_t>(g.mesh.vertices.size()),
                                    static_cast<py::ssize_t>(3)});
                               auto r = a.mutable_unchecked<2>();
                               for (py::ssize_t i = 0; i < r.shape(0); ++i)
                                 for (int k = 0; k < 3; ++k) r(i, k) = g.mesh.vertices[i][k];
                               return a;
                             })
      .def_property_readonly("triangles",
                             [](const GeneratedComponent& g) {
                               py::array_t<int> a(
                                   {static_cast<py::ssize_t>(g.mesh.triangles.size()),
                                    static_cast<py::ssize_t>(3)});
                               auto r = a.mutable_unchecked<2>();
                               for (py::ssize_t i = 0; i < r.shape(0); ++i)
                                 for (int k = 0; k < 3; ++k) r(i, k) = g.mesh.triangles[i][k];
                               return a;
                             })
      .def_readonly("vertex_labels", &GeneratedComponent::vertex_labels)
      .def_readonly("instances", &GeneratedComponent::instances)
      .def_readonly("insertion_pin_ids", &GeneratedComponent::insertion_pin_ids);
  m.def("generate_component", &generate_component);

  // --- pipeline ------------------------------------------------------------
  py::class_<Config>(m, "Config").def(py::init(&default_config));
  m.def("default_config", &default_config);
  m.def("config_for_spec", &config_for_spec);
  m.def("save_config", &save_config);
  m.def("load_config", &load_config);

  py::class_<SetupTimings>(m, "SetupTimings")
      .def_readonly("segmentation_s", &SetupTimings::segmentation_s)
      .def_readonly("pose_check_s", &SetupTimings::pose_check_s)
      .def_readonly("template_gen_s", &SetupTimings::template_gen_s)
      .def_readonly("total_s", &SetupTimings::total_s);

  py::class_<SetupArtifact>(m, "SetupArtifact")
      .def_readonly("timings", &SetupArtifact::timings)
      .def_property_readonly("selected_pose_name",
                             [](const SetupArtifact& a) { return a.selected.name; })
      .def_property_readonly("instance_count",
                             [](const SetupArtifact& a) { return a.seg.instances.size(); })
      .def_property_readonly("insertion_pin_ids", [](const SetupArtifact& a) {
        return a.seg.insertion_instance_ids;
      });
  m.def("run_setup",
        [](const std::filesystem::path& mesh, const std::filesystem::path& grasp,
           const Config& config, const std::filesystem::path& out) {
          return run_setup(mesh, grasp, config, out);
        });
  m.def("load_artifact", &load_artifact);

  py::class_<MatchResult>(m, "MatchResult")
      .def_property_readonly("x", [](const MatchResult& r) { return r.pose2d.x; })
      .def_property_readonly("y", [](const MatchResult& r) { return r.pose2d.y; })
      .def_property_readonly("theta", [](const MatchResult& r) { return r.pose2d.theta; })
      .def_readonly("score", &MatchResult::score)
      .def_property_readonly("cam_T_obj",
                             [](const MatchResult& r) { return r.cam_T_obj.matrix(); });
  m.def("estimate", [](const SetupArtifact& art, const py::array_t<uint8_t>& image) {
    return run_estimate(art, image_from_array(image));
  });

  py::class_<InspectionReport>(m, "InspectionReport")
      .def_readonly("min_score", &InspectionReport::min_score)
      .def_readonly("cutoff", &InspectionReport::cutoff)
      .def_readonly("accepted", &InspectionReport::accepted)
      .def_property_readonly("scores", [](const InspectionReport& r) {
        std::vector<std::pair<int, double>> out;
        for (const auto& s : r.scores) out.emplace_back(s.pin_id, s.score);
        return out;
      });
  m.def("inspect",
        [](const SetupArtifact& art, const py::array_t<uint8_t>& image,
           const std::string& method, double cutoff) {
          return run_inspect(art, image_from_array(image),
                             inspect_method_from_string(method), cutoff);
        },
        py::arg("artifact"), py::arg("image"), py::arg("method") = "gradient",
        py::arg("cutoff") = 0.5);

  m.def("generate_suite",
        [](const ComponentSpec& spec, const std::string& kind,
           const std::filesystem::path& out_dir, double noise, uint64_t seed) {
          generate_suite(spec, kind, out_dir, noise, seed);
        },
        py::arg("spec"), py::arg("kind"), py::arg("out_dir"), py::arg("noise") = 0.0,
        py::arg("seed") = 1);

  py::class_<PoseEvalResult>(m, "PoseEvalResult")
      .def_readonly("translation_errors_m", &PoseEvalResult::translation_errors_m)
      .def_readonly("rotation_errors_rad", &PoseEvalResult::rotation_errors_rad)
      .def_readonly("mean_translation_m", &PoseEvalResult::mean_translation_m)
      .def_readonly("max_translation_m", &PoseEvalResult::max_translation_m);
  m.def("eval_pose", &run_eval_pose);

  py::class_<SegEvalResult>(m, "SegEvalResult")
      .def_readonly("precision", &SegEvalResult::precision)
      .def_readonly("recall", &SegEvalResult::recall)
      .def_readonly("instance_count", &SegEvalResult::instance_count)
      .def_readonly("insertion_count", &SegEvalResult::insertion_count);
  m.def("eval_seg", &run_eval_seg);

  // --- imaging -------------------------------------------------------------
  m.def("read_png", [](const std::filesystem::path& p) { return image_to_array(read_png_gray8(p)); });
  m.def("write_png", [](const py::array_t<uint8_t>& a, const std::filesystem::path& p) {
    write_png_gray8(image_from_array(a), p);
  });

  py::class_<RenderBuffers>(m, "RenderBuffers")
      .def_property_readonly("depth", [](const RenderBuffers& b) { return depth_to_array(b.depth); })
      .def_property_readonly("instance_id",
                             [](const RenderBuffers& b) { return ids_to_array(b.instance_id); })
      .def_property_readonly("intensity",
                             [](const RenderBuffers& b) { return image_to_array(b.intensity); });
  m.def("render_component",
        [](const GeneratedComponent& part, const Mat4& cam_T_obj, const PinholeCamera& cam) {
          return rasterize(part.mesh, part.instances, transform_from_array(cam_T_obj), cam);
        });
}
