#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include <png.h>

#include "sdml/error.hpp"
#include "sdml/representations.hpp"

namespace sdml {

void write_png(const RepresentationImage& image, const std::filesystem::path& path) {
  const Index height = image.height();
  const Index width = image.width();
  std::vector<png_byte> pixels(static_cast<std::size_t>(height * width * 3));
  for (Index r = 0; r < height; ++r)
    for (Index c = 0; c < width; ++c)
      for (int k = 0; k < 3; ++k) {
        const real v = std::clamp(image(r, c, k), 0.0, 1.0);
        pixels[static_cast<std::size_t>((r * width + c) * 3 + k)] =
            static_cast<png_byte>(std::lround(255.0 * v));
      }

  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!file) throw Error(ErrorKind::Io, "cannot write " + path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorKind::Io, "libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorKind::Io, "libpng failed writing " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (Index r = 0; r < height; ++r)
    png_write_row(png, pixels.data() + static_cast<std::size_t>(r * width * 3));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace sdml
