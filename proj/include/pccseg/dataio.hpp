#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pccseg/image.hpp"
#include "pccseg/labels.hpp"

namespace pccseg {

/// Ground-truth codes. Anything other than 0 / 255 in the raster is the uncertainty band.
enum class TruthLabel : std::uint8_t { kBackground, kForeground, kUncertain };

struct GroundTruth {
  int width = 0;
  int height = 0;
  std::vector<TruthLabel> codes;

  std::size_t size() const { return codes.size(); }
};

struct EvalReport {
  double error_rate = 0.0;
  std::size_t evaluated = 0;
  std::size_t wrong = 0;
  std::size_t confusion[2][2] = {{0, 0}, {0, 0}};  // [truth][predicted], background = 0

  nlohmann::ordered_json to_json() const;
  std::string to_text() const;
};

// Raster I/O. PNG and BMP are always supported; other formats as far as OpenCV handles them.
// Grayscale inputs are expanded to RGB by channel replication.
RgbImage load_image(const std::filesystem::path& path);
RgbImage decode_image(std::span<const std::uint8_t> bytes);
void save_image(const std::filesystem::path& path, const RgbImage& image);

/// Single-channel read; colour rasters with equal channels are read channel-for-channel.
GrayRaster load_gray(const std::filesystem::path& path);
void save_gray(const std::filesystem::path& path, const GrayRaster& raster);
std::vector<std::uint8_t> encode_png(const GrayRaster& raster);

/// Values {0, 64, 128, 255}; anything else raises FormatError naming the value and pixel.
LabelMap trimap_from_raster(const GrayRaster& raster);
LabelMap load_trimap(const std::filesystem::path& path);

GroundTruth truth_from_raster(const GrayRaster& raster);
GroundTruth load_ground_truth(const std::filesystem::path& path);

/// 8-bit 0/255 mask.
GrayRaster mask_from_classes(const ClassMap& classes);
void save_mask(const std::filesystem::path& path, const ClassMap& classes);
/// Values >= 128 are foreground.
ClassMap load_mask(const std::filesystem::path& path);

/// Scores unlabeled trimap pixels whose ground truth is certain.
EvalReport error_rate(const ClassMap& result, const LabelMap& trimap, const GroundTruth& truth);

/// Area-average resampling for images, nearest neighbour for label rasters.
RgbImage downscale_image(const RgbImage& image, double factor);
GrayRaster downscale_gray(const GrayRaster& raster, double factor);
/// Factor (<= 1) that brings the longest side down to max_side.
double factor_for_max_side(int width, int height, int max_side);

/// `<name>.{png,bmp,jpg}`, `<name>-trimap.*`, `<name>-gt.*` inside `dir`; empty path when absent.
struct DatasetEntry {
  std::filesystem::path image;
  std::filesystem::path trimap;
  std::filesystem::path ground_truth;
};
DatasetEntry find_dataset_entry(const std::filesystem::path& dir, const std::string& name);

}  // namespace pccseg
