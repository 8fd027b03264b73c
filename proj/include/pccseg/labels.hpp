#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace pccseg {

/// Trimap pixel codes. The enumerator values are the raster gray levels.
enum class PixelLabel : std::uint8_t {
  kIgnoredBackground = 0,
  kLabeledBackground = 64,
  kUnlabeled = 128,
  kLabeledForeground = 255,
};

/// Class indices used by the engine for two-class segmentation.
inline constexpr int kBackground = 0;
inline constexpr int kForeground = 1;
inline constexpr std::int8_t kNoClass = -1;

struct LabelMap {
  int width = 0;
  int height = 0;
  std::vector<PixelLabel> codes;

  LabelMap() = default;
  LabelMap(int w, int h, PixelLabel fill = PixelLabel::kUnlabeled)
      : width(w), height(h), codes(static_cast<std::size_t>(w) * h, fill) {}

  std::size_t size() const { return codes.size(); }
  PixelLabel& at(int row, int col) { return codes[static_cast<std::size_t>(row) * width + col]; }
  PixelLabel at(int row, int col) const { return codes[static_cast<std::size_t>(row) * width + col]; }

  std::size_t count(PixelLabel code) const;
};

/// kBackground / kForeground for seed codes, kNoClass otherwise.
inline std::int8_t seed_class(PixelLabel code) {
  switch (code) {
    case PixelLabel::kLabeledBackground: return kBackground;
    case PixelLabel::kLabeledForeground: return kForeground;
    default: return kNoClass;
  }
}

}  // namespace pccseg

namespace pccseg {

/// Per-pixel class output (kBackground / kForeground).
struct ClassMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> classes;

  std::size_t size() const { return classes.size(); }
  friend bool operator==(const ClassMap&, const ClassMap&) = default;
};

}  // namespace pccseg
