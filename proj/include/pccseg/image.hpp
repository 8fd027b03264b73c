#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace pccseg {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Row-major 8-bit RGB raster.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<Rgb> pixels;

  RgbImage() = default;
  RgbImage(int w, int h, Rgb fill = {}) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  std::size_t size() const { return pixels.size(); }
  Rgb& at(int row, int col) { return pixels[static_cast<std::size_t>(row) * width + col]; }
  const Rgb& at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * width + col]; }

  /// Throws InvalidInput when the geometry is empty or inconsistent with the pixel count.
  void validate() const;
};

/// Row-major 8-bit single-channel raster (trimaps, ground truth, masks).
struct GrayRaster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  GrayRaster() = default;
  GrayRaster(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  std::size_t size() const { return pixels.size(); }
  std::uint8_t& at(int row, int col) { return pixels[static_cast<std::size_t>(row) * width + col]; }
  std::uint8_t at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
};

}  // namespace pccseg
