#pragma once

#include <filesystem>

#include "pinspect/image.hpp"
#include "pinspect/imgproc.hpp"

namespace pinspect {

void write_png_gray8(const ImageU8& img, const std::filesystem::path& path);
void write_png_gray16(const Image<uint16_t>& img, const std::filesystem::path& path);
void write_png_rgb8(const ImageRGB& img, const std::filesystem::path& path);

// Reads 8/16-bit gray or RGB(A) PNG; color is converted to luma.
ImageU8 read_png_gray8(const std::filesystem::path& path);

}  // namespace pinspect
