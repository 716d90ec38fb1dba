#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "noisegen/image.hpp"

namespace noisegen {

// 8-bit RGB PNG with values quantized by round(255 v). Bytes depend only on
// the pixels: no timestamps or text chunks are written.
void write_png(const std::string& path, const Image& img);
Image read_png(const std::string& path);

// Tiles the images (all the same size) left to right, top to bottom. A short
// last row is padded with black cells.
Image tile_grid(const std::vector<Image>& images, int columns);

std::uint8_t quantize(float v);

}  // namespace noisegen
