#include <optional>
#include <string>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "artmap/cloud_filters.h"
#include "artmap/config.h"
#include "artmap/dataset.h"
#include "artmap/digest.h"
#include "artmap/error.h"
#include "artmap/evaluation.h"
#include "artmap/fusion.h"
#include "artmap/geometry.h"
#include "artmap/map_io.h"
#include "artmap/pipeline.h"

namespace py = pybind11;
using namespace artmap;
using Cloud = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

namespace {

PointCloud to_cloud(const Cloud& m) {
  PointCloud c;
  c.points.reserve(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) c.points.emplace_back(m.row(i).transpose());
  return c;
}

Cloud from_cloud(const PointCloud& c) {
  Cloud m(static_cast<Eigen::Index>(c.size()), 3);
  for (size_t i = 0; i < c.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = c.points[i];
  return m;
}

PipelineConfig config_with(const std::string& yaml, std::optional<uint64_t> seed,
                           std::optional<std::string> mode) {
  PipelineConfig cfg = parse_config(yaml);
  if (seed) cfg.run.seed = *seed;
  if (mode) cfg.perception.mode = sensor_mode_from_string(*mode);
  cfg.validate();
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_artmap, m) {
  m.doc() = "Camera-lidar semantic artifact mapping core";

  auto error = py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
  py::register_exception<IngestionError>(m, "IngestionError", error.ptr());
  py::register_exception<ParseError>(m, "ParseError", error.ptr());
  py::register_exception<PlacementError>(m, "PlacementError", error.ptr());
  py::register_exception<ContractViolation>(m, "ContractViolation", error.ptr());
  py::register_exception<InvalidDepthError>(m, "InvalidDepthError", error.ptr());

  m.def(
      "fusion_weight",
      [](double dist, double acc_c, double max_c) {
        FusionConfig cfg;
        cfg.acc_c = acc_c;
        cfg.max_c = max_c;
        return fusion_weight(dist, cfg);
      },
      py::arg("dist"), py::arg("acc_c") = 4.0, py::arg("max_c") = 6.0);

  m.def(
      "fuse_centroid",
      [](std::optional<Eigen::Vector3d> x_c, std::optional<Eigen::Vector3d> x_l,
         std::optional<double> dist, double min_c, double acc_c, double max_c) {
        const FusionConfig cfg{min_c, acc_c, max_c};
        const auto f = dist ? fuse_centroid_at(*dist, x_c, x_l, cfg) : fuse_centroid(x_c, x_l, cfg);
        return py::make_tuple(f.value, std::string(to_string(f.branch)), f.xi);
      },
      py::arg("x_c"), py::arg("x_l"), py::arg("dist") = py::none(), py::arg("min_c") = 0.3,
      py::arg("acc_c") = 4.0, py::arg("max_c") = 6.0);

  m.def(
      "back_project",
      [](double u, double v, double depth, double fx, double fy, double px, double py_,
         int width, int height) {
        return back_project({u, v}, depth, {fx, fy, px, py_, width, height}).xyz;
      },
      py::arg("u"), py::arg("v"), py::arg("depth"), py::arg("fx") = 385.0, py::arg("fy") = 385.0,
      py::arg("px") = 320.0, py::arg("py") = 240.0, py::arg("width") = 640,
      py::arg("height") = 480);

  m.def(
      "project",
      [](const Eigen::Vector3d& p_cam, double fx, double fy, double px, double py_, int width,
         int height) -> std::optional<py::tuple> {
        const auto proj = project_camera_point(p_cam, {fx, fy, px, py_, width, height});
        if (!proj) return std::nullopt;
        return py::make_tuple(proj->pixel.u, proj->pixel.v, proj->depth);
      },
      py::arg("p_cam"), py::arg("fx") = 385.0, py::arg("fy") = 385.0, py::arg("px") = 320.0,
      py::arg("py") = 240.0, py::arg("width") = 640, py::arg("height") = 480);

  m.def(
      "voxel_downsample",
      [](const Cloud& pts, double leaf) { return from_cloud(voxel_downsample(to_cloud(pts), leaf)); },
      py::arg("points"), py::arg("leaf"));

  m.def(
      "radius_outlier_removal",
      [](const Cloud& pts, double radius, double fraction, int floor) {
        FilterParams p;
        p.neighbor_radius = radius;
        p.min_neighbor_fraction = fraction;
        p.min_neighbors_floor = floor;
        return from_cloud(radius_outlier_removal(to_cloud(pts), p));
      },
      py::arg("points"), py::arg("radius"), py::arg("fraction") = 0.05, py::arg("floor") = 5);

  m.def(
      "config_json",
      [](const std::string& yaml) { return config_to_json(parse_config(yaml)).dump(); },
      py::arg("yaml") = "");
  m.def(
      "config_digest", [](const std::string& yaml) { return config_digest(parse_config(yaml)); },
      py::arg("yaml") = "");

  m.def(
      "simulate",
      [](const std::filesystem::path& out, const std::string& yaml, std::optional<uint64_t> seed) {
        const PipelineConfig cfg = config_with(yaml, seed, std::nullopt);
        py::gil_scoped_release release;
        const Scene scene = generate_scene(cfg.scene, cfg.run.seed);
        TrajectorySource src(scene, cfg.trajectory, cfg.sensors, cfg.run.seed);
        return write_dataset(out, cfg.sensors.calibration(), scene, src);
      },
      py::arg("out"), py::arg("yaml") = "", py::arg("seed") = py::none());

  m.def(
      "map_dataset",
      [](const std::filesystem::path& dataset, const std::string& yaml,
         std::optional<std::string> mode) {
        const PipelineConfig cfg = config_with(yaml, std::nullopt, mode);
        py::gil_scoped_release release;
        DatasetReader reader(dataset);
        return map_to_yaml(run_mapping(reader, reader.calibration(), cfg).map);
      },
      py::arg("dataset"), py::arg("yaml") = "", py::arg("mode") = py::none());

  m.def(
      "map_yaml_to_json", [](const std::string& text) { return map_to_json(map_from_yaml(text)).dump(); },
      py::arg("text"));

  m.def(
      "evaluate",
      [](const std::string& map_yaml, const std::filesystem::path& dataset, bool xy_only) {
        const ArtifactMap map = map_from_yaml(map_yaml);
        const DatasetReader reader(dataset);
        EvaluationConfig cfg;
        cfg.xy_only = xy_only;
        const auto truth = reader.truth();
        return report_to_json(report(categorize(map, truth, cfg), truth)).dump();
      },
      py::arg("map_yaml"), py::arg("dataset"), py::arg("xy_only") = false);

  m.def("directory_digest", &directory_digest, py::arg("root"));
}
