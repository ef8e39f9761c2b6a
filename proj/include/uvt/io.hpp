#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "uvt/tomo_core.hpp"

namespace uvt::io {

/// Reads a binary (P5) PGM with 8- or 16-bit samples. Values are scaled to
/// [0, 1] by the file's maxval. Non-square rasters are rejected.
[[nodiscard]] ImageGrid read_pgm(const std::filesystem::path& path);

/// Writes a 16-bit P5 PGM; values are clamped to [0, 1] first.
void write_pgm(const std::filesystem::path& path, const ImageGrid& image, int maxval = 65535);

/// Sinogram CSV: header `angle,s_0,...,s_{S-1}`, one projection per row,
/// angle field empty when unknown.
[[nodiscard]] Sinogram read_sinogram_csv(const std::filesystem::path& path);
void write_sinogram_csv(const std::filesystem::path& path, const Sinogram& sinogram);

/// `index,<value_name>` rows.
void write_indexed_csv(const std::filesystem::path& path, const std::string& value_name,
                       const std::vector<double>& values);
[[nodiscard]] std::vector<double> read_indexed_csv(const std::filesystem::path& path);

/// Square raster as plain comma-separated rows, exact to the last bit.
void write_raster_csv(const std::filesystem::path& path, const ImageGrid& image);
[[nodiscard]] ImageGrid read_raster_csv(const std::filesystem::path& path);

/// Shortest decimal text that parses back to the same double.
[[nodiscard]] std::string format_double(double value);
[[nodiscard]] double parse_double(const std::string& text);

} // namespace uvt::io
