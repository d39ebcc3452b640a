#pragma once

#include "npptwin/world/map.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace npptwin::render {

using world::Rgb;

// Row-major 8-bit RGB raster.
class Image {
public:
  // Throws Error(config) when either dimension is < 1.
  Image(int width, int height, Rgb fill = {0, 0, 0});

  int width() const { return width_; }
  int height() const { return height_; }
  const std::vector<std::uint8_t>& pixels() const { return pixels_; }
  std::vector<std::uint8_t>& pixels() { return pixels_; }

  Rgb at(int x, int y) const;
  void set(int x, int y, Rgb c);
  // Clipped write; ignores coordinates outside the raster.
  void plot(int x, int y, Rgb c);
  void fill_rect(int x, int y, int w, int h, Rgb c);

  bool operator==(const Image&) const = default;

private:
  int width_;
  int height_;
  std::vector<std::uint8_t> pixels_;
};

// `P6\n<w> <h>\n255\n` followed by the raw RGB buffer.
std::string encode_ppm(const Image& image);
// Strict inverse of encode_ppm. Throws Error(bad_request) on malformed input.
Image decode_ppm(std::string_view bytes);

}  // namespace npptwin::render
