#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace btrf {

struct Image8 {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> data;
};

struct Image16 {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> data;
};

/// 8-bit RGB PNG; gray, palette and alpha inputs are converted to RGB.
Image8 read_png_rgb(const std::string& path);
void write_png_rgb(const std::string& path, const Image8& image);

/// 16-bit single-channel PNG (depth in millimeters).
Image16 read_png_gray16(const std::string& path);
void write_png_gray16(const std::string& path, const Image16& image);

}  // namespace btrf
