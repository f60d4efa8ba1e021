#pragma once

#include <filesystem>
#include <vector>

#include "nlpb/grid.hpp"

namespace nlpb {

/// Grayscale raster with samples scaled to [0, 1], row-major from the top row.
struct PgmImage {
  int width = 0;
  int height = 0;
  int maxval = 255;
  std::vector<double> pixels;
};

/// P2 or P5 (maxval <= 65535, 16-bit samples big-endian). Throws IoError on
/// malformed headers, out-of-range samples or truncated payloads.
PgmImage read_pgm_image(const std::filesystem::path& path);
/// Binary P5 output; samples are clamped to [0, 1] before quantisation.
void write_pgm_image(const PgmImage& img, const std::filesystem::path& path);

/// Pixel grid as Ω = (0, width) × (0, height), dx = 1; pixels become the
/// interior values of a zero-extended 2D field.
DomainSpec image_domain(int width, int height, int pad_cells);
Field image_to_field(const PgmImage& img, int pad_cells);
PgmImage field_to_image(const Field& f, int maxval = 255);

Field read_pgm(const std::filesystem::path& path, int pad_cells = 2);
void write_pgm(const Field& f, const std::filesystem::path& path, int maxval = 255);

}  // namespace nlpb
