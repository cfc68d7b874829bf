#pragma once

#include <filesystem>
#include <vector>

#include "kfpso/core.hpp"

namespace kfpso {

/// Grayscale image with intensities in [0, 1], stored row-major.
///
/// Physical coordinates are in mm with the origin at the image centre:
/// pixel (row i, col j) sits at x = (j - (width-1)/2) * spacing,
/// y = (i - (height-1)/2) * spacing.
struct Image2D {
  Index width = 0;
  Index height = 0;
  double spacing = 1.0;
  std::vector<double> pixels;

  Image2D() = default;
  Image2D(Index width, Index height, double spacing = 1.0, double fill = 0.0);

  double& at(Index row, Index col) { return pixels[static_cast<std::size_t>(row * width + col)]; }
  double at(Index row, Index col) const { return pixels[static_cast<std::size_t>(row * width + col)]; }

  double center_x() const { return 0.5 * static_cast<double>(width - 1); }
  double center_y() const { return 0.5 * static_cast<double>(height - 1); }
  double x_of(Index col) const { return (static_cast<double>(col) - center_x()) * spacing; }
  double y_of(Index row) const { return (static_cast<double>(row) - center_y()) * spacing; }

  /// Throws Error unless the size matches and every intensity is finite and in [0, 1].
  void validate() const;
};

/// Reads a P2 (ASCII) or P5 (binary, 8- or 16-bit) graymap, scaling by maxval.
/// Spacing is set to 1 mm.
Image2D read_pgm(const std::filesystem::path& path);

/// Writes an 8-bit graymap (P5 by default, P2 when `ascii`).
void write_pgm(const Image2D& image, const std::filesystem::path& path, bool ascii = false);

}  // namespace kfpso
