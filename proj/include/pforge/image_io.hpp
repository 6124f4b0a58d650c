#pragma once

#include <filesystem>

#include "pforge/image.hpp"

namespace pforge::io {

// Readers accept PNG or JPEG (sniffed from the file header) and convert to
// the requested channel layout. Missing alpha reads as opaque.
RgbImage read_rgb(const std::filesystem::path& path);
RgbaImage read_rgba(const std::filesystem::path& path);
GrayImage read_gray(const std::filesystem::path& path);

/// Reads only the header; PNG or JPEG.
Size read_size(const std::filesystem::path& path);

// PNG writers use fixed encoder settings and no ancillary chunks, so equal
// pixels give equal bytes.
void write_png(const std::filesystem::path& path, const RgbImage& image);
void write_png(const std::filesystem::path& path, const RgbaImage& image);
void write_png(const std::filesystem::path& path, const GrayImage& image);

}  // namespace pforge::io
