#pragma once

#include <filesystem>

#include "dyst/core/image.hpp"

namespace dyst::io {

/// 8-bit RGB PNG. Throws IoError on failure.
void write_png(const std::filesystem::path& path, const Image& image);
Image read_png(const std::filesystem::path& path);

/// Binary PPM (P6, maxval 255).
Image read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const Image& image);

/// Dispatches on extension (.png / .ppm).
Image read_image(const std::filesystem::path& path);

}  // namespace dyst::io
