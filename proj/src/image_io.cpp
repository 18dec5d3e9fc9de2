#include "btrf/image_io.hpp"

#include <bit>
#include <csetjmp>
#include <cstdio>
#include <cstdlib>
#include <cstring>

#include <png.h>

#include "btrf/errors.hpp"

namespace btrf {

namespace {

// libpng reports failures through longjmp; these helpers keep everything
// between setjmp and the jump free of non-trivial C++ objects, and turn the
// outcome into a status the callers convert to exceptions.

struct FileCloser {
  std::FILE* f;
  ~FileCloser() {
    if (f) std::fclose(f);
  }
};

bool decode(std::FILE* fp, bool want_rgb8, int* width, int* height, int* bit_depth,
            int* channels, std::uint8_t** pixels) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  png_bytep buffer = nullptr;
  png_bytepp rows = nullptr;
  if (setjmp(png_jmpbuf(png))) {
    png_free(png, rows);
    png_free(png, buffer);
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, fp);
  png_read_info(png, info);

  const png_byte color_type = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  if (want_rgb8) {
    if (depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
      png_set_gray_to_rgb(png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) {
      png_set_tRNS_to_alpha(png);
      png_set_strip_alpha(png);
    }
  } else {
    if (color_type != PNG_COLOR_TYPE_GRAY || depth != 16) {
      png_destroy_read_struct(&png, &info, nullptr);
      *bit_depth = depth;
      *channels = -1;
      return true;
    }
    if constexpr (std::endian::native == std::endian::little) png_set_swap(png);  // PNG is big-endian
  }
  png_read_update_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const png_size_t stride = png_get_rowbytes(png, info);
  buffer = static_cast<png_bytep>(png_malloc(png, stride * h));
  rows = static_cast<png_bytepp>(png_malloc(png, sizeof(png_bytep) * h));
  for (png_uint_32 r = 0; r < h; ++r) rows[r] = buffer + r * stride;
  png_read_image(png, rows);
  png_read_end(png, nullptr);

  *width = static_cast<int>(w);
  *height = static_cast<int>(h);
  *bit_depth = png_get_bit_depth(png, info);
  *channels = png_get_channels(png, info);
  *pixels = static_cast<std::uint8_t*>(std::malloc(stride * h));
  if (*pixels) std::memcpy(*pixels, buffer, stride * h);
  png_free(png, rows);
  png_free(png, buffer);
  png_destroy_read_struct(&png, &info, nullptr);
  return *pixels != nullptr;
}

bool encode(std::FILE* fp, int width, int height, int bit_depth, int color_type,
            const std::uint8_t* data, std::size_t stride, bool swap16) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  png_bytepp rows = nullptr;
  if (setjmp(png_jmpbuf(png))) {
    png_free(png, rows);
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (swap16 && std::endian::native == std::endian::little) png_set_swap(png);
  rows = static_cast<png_bytepp>(png_malloc(png, sizeof(png_bytep) * static_cast<std::size_t>(height)));
  for (int r = 0; r < height; ++r)
    rows[r] = const_cast<png_bytep>(data + static_cast<std::size_t>(r) * stride);
  png_write_image(png, rows);
  png_write_end(png, nullptr);
  png_free(png, rows);
  png_destroy_write_struct(&png, &info);
  return true;
}

}  // namespace

Image8 read_png_rgb(const std::string& path) {
  FileCloser file{std::fopen(path.c_str(), "rb")};
  if (!file.f) throw DataError("cannot open image: " + path);
  int w = 0, h = 0, depth = 0, channels = 0;
  std::uint8_t* pixels = nullptr;
  if (!decode(file.f, true, &w, &h, &depth, &channels, &pixels) || channels != 3 || depth != 8) {
    std::free(pixels);
    throw DataError("cannot decode colour PNG: " + path);
  }
  Image8 image{w, h, 3, std::vector<std::uint8_t>(pixels, pixels + std::size_t(w) * h * 3)};
  std::free(pixels);
  return image;
}

Image16 read_png_gray16(const std::string& path) {
  FileCloser file{std::fopen(path.c_str(), "rb")};
  if (!file.f) throw DataError("cannot open depth image: " + path);
  int w = 0, h = 0, depth = 0, channels = 0;
  std::uint8_t* pixels = nullptr;
  if (!decode(file.f, false, &w, &h, &depth, &channels, &pixels)) {
    std::free(pixels);
    throw DataError("cannot decode depth PNG: " + path);
  }
  if (channels == -1) throw DataError("depth PNG must be 16-bit grayscale: " + path);
  Image16 image{w, h, std::vector<std::uint16_t>(std::size_t(w) * h)};
  std::memcpy(image.data.data(), pixels, image.data.size() * sizeof(std::uint16_t));
  std::free(pixels);
  return image;
}

void write_png_rgb(const std::string& path, const Image8& image) {
  if (image.channels != 3 || image.data.size() != std::size_t(image.width) * image.height * 3)
    throw InvalidInput("write_png_rgb: expected a packed RGB image");
  FileCloser file{std::fopen(path.c_str(), "wb")};
  if (!file.f || !encode(file.f, image.width, image.height, 8, PNG_COLOR_TYPE_RGB,
                         image.data.data(), std::size_t(image.width) * 3, false))
    throw DataError("cannot write image: " + path);
}

void write_png_gray16(const std::string& path, const Image16& image) {
  if (image.data.size() != std::size_t(image.width) * image.height)
    throw InvalidInput("write_png_gray16: size mismatch");
  FileCloser file{std::fopen(path.c_str(), "wb")};
  if (!file.f ||
      !encode(file.f, image.width, image.height, 16, PNG_COLOR_TYPE_GRAY,
              reinterpret_cast<const std::uint8_t*>(image.data.data()),
              std::size_t(image.width) * 2, true))
    throw DataError("cannot write depth image: " + path);
}

}  // namespace btrf
