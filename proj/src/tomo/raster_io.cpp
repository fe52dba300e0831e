#include "rising/tomo/raster_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <vector>

namespace rising::tomo {
namespace {

static_assert(std::endian::native == std::endian::little, "raster payloads assume a little-endian host");

using nlohmann::json;

}  // namespace

std::filesystem::path header_path(const std::filesystem::path& payload) {
  std::filesystem::path h = payload;
  h += ".json";
  return h;
}

void write_raster(const std::filesystem::path& payload, const Raster<double>& values) {
  std::vector<float> buf(static_cast<std::size_t>(values.size()));
  for (Eigen::Index i = 0; i < values.size(); ++i) buf[static_cast<std::size_t>(i)] = static_cast<float>(values.data()[i]);
  write_file_atomic(payload, std::span(reinterpret_cast<const std::uint8_t*>(buf.data()), buf.size() * sizeof(float)));
  const json header = {{"width", values.cols()}, {"height", values.rows()}, {"dtype", "f32"}, {"order", "row-major"}};
  write_file_atomic(header_path(payload), header.dump(2) + "\n");
}

Raster<double> read_raster(const std::filesystem::path& payload) {
  json header;
  try {
    header = json::parse(read_text_file(header_path(payload)));
  } catch (const json::exception& e) {
    throw IoError(header_path(payload), std::string("malformed raster header: ") + e.what());
  }
  if (header.value("dtype", "") != "f32" || header.value("order", "") != "row-major")
    throw IoError(header_path(payload), "unsupported dtype/order (expected f32, row-major)");
  const auto width = header.at("width").get<Eigen::Index>();
  const auto height = header.at("height").get<Eigen::Index>();
  if (width < 1 || height < 1) throw IoError(header_path(payload), "non-positive dimensions");

  const std::string bytes = read_text_file(payload);
  const auto expected = static_cast<std::size_t>(width * height) * sizeof(float);
  if (bytes.size() != expected)
    throw IoError(payload, "payload has " + std::to_string(bytes.size()) + " bytes, header implies " +
                               std::to_string(expected));
  std::vector<float> buf(static_cast<std::size_t>(width * height));
  std::memcpy(buf.data(), bytes.data(), expected);
  Raster<double> out(height, width);
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const float v = buf[static_cast<std::size_t>(i)];
    if (!std::isfinite(v)) throw IoError(payload, "non-finite sample at index " + std::to_string(i));
    out.data()[i] = v;
  }
  return out;
}

void write_image(const std::filesystem::path& payload, const Image& image) { write_raster(payload, image.values); }

Image read_image(const std::filesystem::path& payload, double pixel_size) {
  Raster<double> values = read_raster(payload);
  if (values.rows() != values.cols()) throw IoError(payload, "image raster is not square");
  GridSpec grid{static_cast<int>(values.rows()), pixel_size};
  grid.validate();
  return Image(grid, std::move(values));
}

void write_sinogram(const std::filesystem::path& payload, const Sinogram& sinogram) {
  write_raster(payload, sinogram.values);
}

Sinogram read_sinogram(const std::filesystem::path& payload, const ScanGeometry& geometry) {
  Sinogram s;
  s.geometry = geometry;
  s.values = read_raster(payload);
  if (s.values.rows() != geometry.num_views() || s.values.cols() != geometry.num_detectors)
    throw IoError(payload, "sinogram is " + std::to_string(s.values.rows()) + "x" +
                               std::to_string(s.values.cols()) + ", geometry expects " +
                               std::to_string(geometry.num_views()) + "x" + std::to_string(geometry.num_detectors));
  return s;
}

json geometry_to_json(const ScanGeometry& g) {
  json doc = {{"mode", to_string(g.mode)},
              {"angles_deg", g.angles_deg},
              {"num_detectors", g.num_detectors},
              {"detector_spacing", g.detector_spacing}};
  if (g.mode == BeamMode::fan) {
    doc["dso"] = g.source_to_center;
    doc["dsd"] = g.source_to_detector;
  }
  return doc;
}

ScanGeometry geometry_from_json(const json& doc, const GridSpec& grid) {
  try {
    const BeamMode mode = beam_mode_from_string(doc.value("mode", std::string("fan-beam")));
    std::vector<double> angles;
    const json& a = doc.at("angles_deg");
    if (a.is_array()) {
      angles = a.get<std::vector<double>>();
    } else {
      const double start = a.value("start_deg", 0.0);
      const int count = a.at("count").get<int>();
      const double step = a.at("step_deg").get<double>();
      for (int i = 0; i < count; ++i) angles.push_back(start + i * step);
    }
    ScanGeometry g = default_geometry(grid, mode, std::move(angles));
    if (doc.contains("num_detectors")) {
      g.num_detectors = doc["num_detectors"].get<int>();
      if (!doc.contains("detector_spacing")) {
        // keep the same physical detector span
        g.detector_spacing = default_geometry(grid, mode, {0.0}).detector_spacing * 2 * grid.n / g.num_detectors;
      }
    }
    if (doc.contains("detector_spacing")) g.detector_spacing = doc["detector_spacing"].get<double>();
    if (doc.contains("dso")) g.source_to_center = doc["dso"].get<double>();
    if (doc.contains("dsd")) g.source_to_detector = doc["dsd"].get<double>();
    g.validate();
    return g;
  } catch (const json::exception& e) {
    throw Error(std::string("geometry JSON: ") + e.what());
  }
}

}  // namespace rising::tomo
