#include "npptwin/render/image.hpp"

#include "npptwin/error.hpp"
#include "npptwin/numeric_text.hpp"

#include <fmt/format.h>

namespace npptwin::render {

Image::Image(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) throw Error(ErrorCode::config, fmt::format("image dimensions must be >= 1, got {}x{}", width, height));
  pixels_.resize(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < pixels_.size(); i += 3) {
    pixels_[i] = fill[0];
    pixels_[i + 1] = fill[1];
    pixels_[i + 2] = fill[2];
  }
}

Rgb Image::at(int x, int y) const {
  const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 3;
  return {pixels_[i], pixels_[i + 1], pixels_[i + 2]};
}

void Image::set(int x, int y, Rgb c) {
  const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 3;
  pixels_[i] = c[0];
  pixels_[i + 1] = c[1];
  pixels_[i + 2] = c[2];
}

void Image::plot(int x, int y, Rgb c) {
  if (x >= 0 && y >= 0 && x < width_ && y < height_) set(x, y, c);
}

void Image::fill_rect(int x, int y, int w, int h, Rgb c) {
  for (int yy = y; yy < y + h; ++yy) {
    for (int xx = x; xx < x + w; ++xx) plot(xx, yy, c);
  }
}

std::string encode_ppm(const Image& image) {
  std::string out = fmt::format("P6\n{} {}\n255\n", image.width(), image.height());
  out.append(reinterpret_cast<const char*>(image.pixels().data()), image.pixels().size());
  return out;
}

Image decode_ppm(std::string_view bytes) {
  auto fail = [](std::string_view why) { return Error(ErrorCode::bad_request, fmt::format("bad PPM: {}", why)); };
  if (!bytes.starts_with("P6\n")) throw fail("missing P6 magic");
  std::size_t pos = 3;
  auto field = [&](char terminator) {
    const auto end = bytes.find(terminator, pos);
    if (end == std::string_view::npos) throw fail("truncated header");
    auto v = parse_count(bytes.substr(pos, end - pos));
    if (!v) throw fail("bad header number");
    pos = end + 1;
    return *v;
  };
  const auto w = field(' ');
  const auto h = field('\n');
  const auto maxval = field('\n');
  if (maxval != 255) throw fail("maxval must be 255");
  if (w < 1 || h < 1 || w > 65535 || h > 65535) throw fail("bad dimensions");
  Image img(static_cast<int>(w), static_cast<int>(h));
  if (bytes.size() - pos != img.pixels().size()) throw fail("pixel payload size mismatch");
  std::copy(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end(), img.pixels().begin());
  return img;
}

}  // namespace npptwin::render
