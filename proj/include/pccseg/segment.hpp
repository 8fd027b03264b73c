#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "json.hpp"
#include "pccseg/features.hpp"
#include "pccseg/image.hpp"
#include "pccseg/labels.hpp"
#include "pccseg/pcc.hpp"

namespace pccseg {

inline constexpr std::size_t kDefaultK = 100;

struct SegmentOptions {
  std::size_t k = kDefaultK;
  WeightVector lambda;
  PccParams pcc;
  ProgressFn progress;
};

struct SegmentationResult {
  ClassMap labels;
  std::size_t k = 0;
  WeightVector lambda;
  std::uint64_t seed = 0;
  double alpha = 0.0;  // NaN when no graph could be built
  double phi = 0.0;
  double baseline_phi = 0.0;
  std::size_t rounds = 0;
  bool converged = false;
  bool cancelled = false;
  std::size_t phase1_finalized = 0;
  std::size_t phase2_pixels = 0;
  std::size_t phase2_sweeps = 0;
  std::size_t node_count = 0;
  std::size_t edge_count = 0;

  /// 0 = background, 255 = foreground.
  GrayRaster mask() const;
  nlohmann::ordered_json stats_json() const;
};

/// features -> normalize -> graph -> phase 1 -> phase 2. Ignored trimap pixels come out background.
SegmentationResult segment(const RgbImage& image, const LabelMap& labels, const SegmentOptions& options);

/// Same pipeline starting from an already normalized feature matrix.
SegmentationResult segment_features(const FeatureMatrix& normalized, const LabelMap& labels,
                                    const SegmentOptions& options);

}  // namespace pccseg
