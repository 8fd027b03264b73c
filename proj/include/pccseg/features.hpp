#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "pccseg/image.hpp"

namespace pccseg {

inline constexpr std::size_t kFeatureCount = 23;

/// Column identifiers in matrix order.
const std::array<std::string_view, kFeatureCount>& feature_names();

/// Per-pixel feature rows (row-major, n x 23) plus the pixel grid they came from.
/// Synthetic matrices that do not come from an image use a width of n and a height of 1.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, int width, int height);
  /// Synthetic matrix with a 1-row grid.
  explicit FeatureMatrix(std::size_t rows) : FeatureMatrix(rows, static_cast<int>(rows), 1) {}

  std::size_t rows() const { return rows_; }
  static constexpr std::size_t dims() { return kFeatureCount; }
  int width() const { return width_; }
  int height() const { return height_; }

  double& at(std::size_t row, std::size_t dim) { return values_[row * kFeatureCount + dim]; }
  double at(std::size_t row, std::size_t dim) const { return values_[row * kFeatureCount + dim]; }

  std::span<double, kFeatureCount> row(std::size_t r) {
    return std::span<double, kFeatureCount>(values_.data() + r * kFeatureCount, kFeatureCount);
  }
  std::span<const double, kFeatureCount> row(std::size_t r) const {
    return std::span<const double, kFeatureCount>(values_.data() + r * kFeatureCount, kFeatureCount);
  }

  std::span<const double> values() const { return values_; }

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

/// Per-feature scale factors in [0, 1], at least one of them positive.
class WeightVector {
 public:
  /// All ones.
  WeightVector();
  /// Throws InvalidInput on wrong length, out-of-range entries or an all-zero vector.
  explicit WeightVector(std::span<const double> weights);
  WeightVector(std::initializer_list<double> weights)
      : WeightVector(std::span<const double>(weights.begin(), weights.size())) {}

  static WeightVector unit() { return WeightVector(); }

  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  std::span<const double, kFeatureCount> values() const { return weights_; }
  bool is_unit() const;

  friend bool operator==(const WeightVector&, const WeightVector&) = default;

 private:
  std::array<double, kFeatureCount> weights_;
};

/// Raw (un-normalized) 23 features of every pixel, rows in row-major pixel order.
FeatureMatrix extract_features(const RgbImage& image);

/// Column-wise standardization: mean 0, sample standard deviation 1.
/// Constant columns become all-zero.
FeatureMatrix normalize(const FeatureMatrix& fm);

/// Multiplies column j by weights[j].
FeatureMatrix apply_weights(const FeatureMatrix& fm, const WeightVector& weights);
FeatureMatrix apply_weights(const FeatureMatrix& fm, std::span<const double> weights);

/// CSV with a header of feature_names(), 17 significant digits.
void write_features_csv(std::ostream& out, const FeatureMatrix& fm);

/// Hexcone RGB -> HSV with inputs in [0,1]; h in [0,1).
std::array<double, 3> rgb_to_hsv(double r, double g, double b);

}  // namespace pccseg
