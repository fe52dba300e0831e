#pragma once

#include <filesystem>

#include <json.hpp>

#include "rising/tomo/geometry.hpp"

namespace rising::tomo {

/// On-disk raster: a raw little-endian float32 payload (`*.imgraw` / `*.sinraw`)
/// plus a JSON header next to it at `<payload>.json`:
///   {"width": W, "height": H, "dtype": "f32", "order": "row-major"}
std::filesystem::path header_path(const std::filesystem::path& payload);

void write_raster(const std::filesystem::path& payload, const Raster<double>& values);
Raster<double> read_raster(const std::filesystem::path& payload);

void write_image(const std::filesystem::path& payload, const Image& image);
Image read_image(const std::filesystem::path& payload, double pixel_size = 1.0);

void write_sinogram(const std::filesystem::path& payload, const Sinogram& sinogram);
/// Reads a sinogram and checks its dimensions against `geometry`.
Sinogram read_sinogram(const std::filesystem::path& payload, const ScanGeometry& geometry);

/// Geometry document: {mode, angles_deg | {start_deg, count, step_deg},
/// num_detectors, detector_spacing, dso, dsd}. Missing detector/distance keys
/// fall back to default_geometry(grid, ...).
nlohmann::json geometry_to_json(const ScanGeometry& geometry);
ScanGeometry geometry_from_json(const nlohmann::json& doc, const GridSpec& grid);

}  // namespace rising::tomo
