#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "fastbasin/basin.hpp"

namespace fastbasin {

using Rgb = std::array<std::uint8_t, 3>;

struct Palette {
  Rgb background{255, 255, 255};
  Rgb attractor{255, 0, 0};
  /// generations[k - 1] colors generation k.
  std::vector<Rgb> generations{{120, 180, 255}, {0, 0, 160}, {0, 160, 0}, {0, 0, 0}};
  std::optional<Rgb> overflow{Rgb{64, 64, 64}};

  /// Throws InvalidArgument if attractor == background.
  void validate() const;
  Rgb color(int gen) const;
};

/// Row-major RGB, top row first.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  Rgb pixel(int x, int y) const {
    const std::size_t k = 3 * (static_cast<std::size_t>(y) * width + x);
    return {rgb[k], rgb[k + 1], rgb[k + 2]};
  }
  friend bool operator==(const Image&, const Image&) = default;
};

/// Pixel (i, row) shows cell (i, ny - 1 - row). Throws InvalidArgument when a
/// generation beyond the palette occurs and no overflow color is set.
Image colorize(const GenerationField& field, const Palette& palette = {});
/// Occupied cells in the attractor color.
Image colorize(const CellRaster& raster, const Palette& palette = {});

std::vector<std::uint8_t> encode_ppm(const Image& image);
Image decode_ppm(const std::vector<std::uint8_t>& bytes);
void write_ppm(const Image& image, const std::filesystem::path& path);
Image read_ppm(const std::filesystem::path& path);

bool png_available() noexcept;
/// Throws Unsupported when built without libpng.
void write_png(const Image& image, const std::filesystem::path& path);

/// PNG when the extension is .png, PPM otherwise.
void write_image(const Image& image, const std::filesystem::path& path);

}  // namespace fastbasin
