#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace vitnt {

// 8-bit RGB, row-major, channel-interleaved (HWC).
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(std::size_t w, std::size_t h, std::uint8_t fill = 0) : width(w), height(h), pixels(w * h * 3, fill) {}

  std::uint8_t& at(std::size_t x, std::size_t y, std::size_t c) { return pixels[(y * width + x) * 3 + c]; }
  std::uint8_t at(std::size_t x, std::size_t y, std::size_t c) const { return pixels[(y * width + x) * 3 + c]; }

  friend bool operator==(const Image&, const Image&) = default;
};

// Binary P6 with maxval 255. Header comments are accepted on read; the writer
// emits "P6\n<w> <h>\n255\n".
Image read_ppm(const std::filesystem::path& path);
void write_ppm(const Image& image, const std::filesystem::path& path);

// FNV-1a 64 over the raw RGB bytes, as 16 lowercase hex digits.
std::string pixel_digest(const Image& image);

}  // namespace vitnt
