#include "fastbasin/render.hpp"

#include <cctype>
#include <cstdio>
#include <string>

#include "fastbasin/error.hpp"
#include "fastbasin/parallel.hpp"
#include "io_util.hpp"

#ifdef FASTBASIN_HAVE_PNG
#include <png.h>
#endif

namespace fastbasin {

void Palette::validate() const {
  if (attractor == background) throw Error(ErrorKind::InvalidArgument, "attractor color equals background");
}

Rgb Palette::color(int gen) const {
  if (gen == 0) return attractor;
  if (gen >= 1 && static_cast<std::size_t>(gen) <= generations.size()) return generations[gen - 1];
  if (overflow) return *overflow;
  throw Error(ErrorKind::InvalidArgument, "generation " + std::to_string(gen) + " has no palette color");
}

namespace {

template <class CellColor>
Image paint(const Grid& grid, CellColor&& cell_color) {
  Image img{grid.nx, grid.ny, std::vector<std::uint8_t>(3 * grid.cell_count())};
  parallel_for(static_cast<std::size_t>(grid.ny), [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t row = begin; row < end; ++row) {
      const int j = grid.ny - 1 - static_cast<int>(row);
      std::uint8_t* out = img.rgb.data() + 3 * row * static_cast<std::size_t>(grid.nx);
      for (int i = 0; i < grid.nx; ++i) {
        const Rgb c = cell_color(grid.index(i, j));
        out[3 * i] = c[0];
        out[3 * i + 1] = c[1];
        out[3 * i + 2] = c[2];
      }
    }
  });
  return img;
}

}  // namespace

Image colorize(const GenerationField& field, const Palette& palette) {
  palette.validate();
  if (!palette.overflow && field.K > static_cast<int>(palette.generations.size())) {
    throw Error(ErrorKind::InvalidArgument, "K exceeds the palette and no overflow color is set");
  }
  return paint(field.grid, [&](std::size_t c) {
    const std::uint8_t g = field.gen[c];
    return g == GenerationField::kUnset ? palette.background : palette.color(g);
  });
}

Image colorize(const CellRaster& raster, const Palette& palette) {
  palette.validate();
  return paint(raster.grid(), [&](std::size_t c) { return raster.test(c) ? palette.attractor : palette.background; });
}

std::vector<std::uint8_t> encode_ppm(const Image& image) {
  if (image.width <= 0 || image.height <= 0) throw Error(ErrorKind::InvalidArgument, "empty image");
  const std::string header = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.rgb.begin(), image.rgb.end());
  return out;
}

Image decode_ppm(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 0;
  const auto token = [&]() {
    for (;;) {
      while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    std::string t;
    while (pos < bytes.size() && !std::isspace(bytes[pos])) t += static_cast<char>(bytes[pos++]);
    if (t.empty()) throw Error(ErrorKind::Io, "truncated PPM header");
    return t;
  };
  if (token() != "P6") throw Error(ErrorKind::Io, "not a binary PPM");
  Image img;
  try {
    img.width = std::stoi(token());
    img.height = std::stoi(token());
    if (std::stoi(token()) != 255) throw Error(ErrorKind::Io, "PPM maxval must be 255");
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::Io, "malformed PPM header");
  }
  ++pos;  // single whitespace before the raster
  const std::size_t n = 3 * static_cast<std::size_t>(img.width) * img.height;
  if (img.width <= 0 || img.height <= 0 || bytes.size() < pos + n) throw Error(ErrorKind::Io, "truncated PPM data");
  img.rgb.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.begin() + static_cast<std::ptrdiff_t>(pos + n));
  return img;
}

void write_ppm(const Image& image, const std::filesystem::path& path) { detail::write_file(path, encode_ppm(image)); }

Image read_ppm(const std::filesystem::path& path) { return decode_ppm(detail::read_file(path)); }

bool png_available() noexcept {
#ifdef FASTBASIN_HAVE_PNG
  return true;
#else
  return false;
#endif
}

void write_png(const Image& image, const std::filesystem::path& path) {
#ifdef FASTBASIN_HAVE_PNG
  if (image.width <= 0 || image.height <= 0) throw Error(ErrorKind::InvalidArgument, "empty image");
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.string().c_str(), 0, image.rgb.data(), 0, nullptr)) {
    throw Error(ErrorKind::Io, "cannot write '" + path.string() + "': " + png.message);
  }
#else
  (void)image;
  throw Error(ErrorKind::Unsupported, "built without PNG support: " + path.string());
#endif
}

void write_image(const Image& image, const std::filesystem::path& path) {
  if (path.extension() == ".png") write_png(image, path);
  else write_ppm(image, path);
}

}  // namespace fastbasin
