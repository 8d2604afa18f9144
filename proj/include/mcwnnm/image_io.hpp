#pragma once

#include <filesystem>

#include "mcwnnm/image.hpp"

namespace mcwnnm {

/// 8-bit RGB input. Binary PPM (P6, maxval 255) and 8-bit truecolour PNG
/// (alpha dropped, palette/grey expanded) are accepted; anything else
/// throws with the offending format named in the message.
ImagePlanes image_read(const std::filesystem::path& path);

/// Rounds half away from zero and clamps to [0,255]. The format follows
/// the extension: .ppm writes P6, .png writes 8-bit RGB PNG.
void image_write(const ImagePlanes& img, const std::filesystem::path& path);

ImagePlanes read_ppm(const std::filesystem::path& path);
void write_ppm(const ImagePlanes& img, const std::filesystem::path& path);
ImagePlanes read_png(const std::filesystem::path& path);
void write_png(const ImagePlanes& img, const std::filesystem::path& path);

/// The byte written for an intensity value.
unsigned char quantize(double v);

}  // namespace mcwnnm
