#include "pccseg/features.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

#include "pccseg/error.hpp"

namespace pccseg {

namespace {

enum Column : std::size_t {
  kRow, kCol, kR, kG, kB, kH, kS, kV, kExR, kExG, kExB,
  kMR, kMG, kMB, kSDR, kSDG, kSDB, kMH, kMS, kMV, kSDH, kSDS, kSDV
};

}  // namespace

const std::array<std::string_view, kFeatureCount>& feature_names() {
  static constexpr std::array<std::string_view, kFeatureCount> names = {
      "row", "col", "R",   "G",   "B",   "H",   "S",  "V",  "ExR", "ExG", "ExB", "MR",
      "MG",  "MB",  "SDR", "SDG", "SDB", "MH",  "MS", "MV", "SDH", "SDS", "SDV"};
  return names;
}

void RgbImage::validate() const {
  if (width < 1 || height < 1) throw InvalidInput("image has zero size");
  if (pixels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw InvalidInput("image pixel count does not match its geometry");
  }
}

FeatureMatrix::FeatureMatrix(std::size_t rows, int width, int height)
    : rows_(rows), width_(width), height_(height), values_(rows * kFeatureCount, 0.0) {}

WeightVector::WeightVector() { weights_.fill(1.0); }

WeightVector::WeightVector(std::span<const double> weights) {
  if (weights.size() != kFeatureCount) {
    throw InvalidInput("weight vector needs " + std::to_string(kFeatureCount) + " entries, got " +
                       std::to_string(weights.size()));
  }
  bool any_positive = false;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    const double w = weights[i];
    if (!(w >= 0.0 && w <= 1.0)) {
      throw InvalidInput("weight " + std::to_string(i) + " outside [0,1]: " + std::to_string(w));
    }
    any_positive = any_positive || w > 0.0;
    weights_[i] = w;
  }
  if (!any_positive) throw InvalidInput("weight vector is all zero");
}

bool WeightVector::is_unit() const {
  return std::all_of(weights_.begin(), weights_.end(), [](double w) { return w == 1.0; });
}

std::array<double, 3> rgb_to_hsv(double r, double g, double b) {
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double delta = mx - mn;
  double h = 0.0;
  if (delta > 0.0) {
    if (mx == r) {
      h = (g - b) / delta;
      if (h < 0.0) h += 6.0;
    } else if (mx == g) {
      h = (b - r) / delta + 2.0;
    } else {
      h = (r - g) / delta + 4.0;
    }
    h /= 6.0;
    if (h >= 1.0) h -= 1.0;
  }
  const double s = mx > 0.0 ? delta / mx : 0.0;
  return {h, s, mx};
}

FeatureMatrix extract_features(const RgbImage& image) {
  image.validate();
  const int w = image.width;
  const int h = image.height;
  FeatureMatrix fm(image.size(), w, h);

  // Per-pixel point features first; neighborhood statistics read them back.
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * w + c;
      const Rgb px = image.pixels[i];
      const double red = px.r / 255.0;
      const double green = px.g / 255.0;
      const double blue = px.b / 255.0;
      const auto hsv = rgb_to_hsv(red, green, blue);
      auto row = fm.row(i);
      row[kRow] = r;
      row[kCol] = c;
      row[kR] = red;
      row[kG] = green;
      row[kB] = blue;
      row[kH] = hsv[0];
      row[kS] = hsv[1];
      row[kV] = hsv[2];
      row[kExR] = 2.0 * red - green - blue;
      row[kExG] = 2.0 * green - red - blue;
      row[kExB] = 2.0 * blue - red - green;
    }
  }

  constexpr std::array<std::size_t, 6> base = {kR, kG, kB, kH, kS, kV};
  constexpr std::array<std::size_t, 6> mean_col = {kMR, kMG, kMB, kMH, kMS, kMV};
  constexpr std::array<std::size_t, 6> sd_col = {kSDR, kSDG, kSDB, kSDH, kSDS, kSDV};

  for (int r = 0; r < h; ++r) {
    const int r0 = std::max(r - 1, 0), r1 = std::min(r + 1, h - 1);
    for (int c = 0; c < w; ++c) {
      const int c0 = std::max(c - 1, 0), c1 = std::min(c + 1, w - 1);
      const double count = static_cast<double>((r1 - r0 + 1) * (c1 - c0 + 1));
      // Accumulate offsets from the center pixel: exact for constant neighborhoods.
      const auto center = fm.row(static_cast<std::size_t>(r) * w + c);
      std::array<double, 6> shift{};
      for (std::size_t f = 0; f < base.size(); ++f) shift[f] = center[base[f]];
      std::array<double, 6> sum{};
      std::array<double, 6> sq{};
      for (int rr = r0; rr <= r1; ++rr) {
        for (int cc = c0; cc <= c1; ++cc) {
          const auto nb = fm.row(static_cast<std::size_t>(rr) * w + cc);
          for (std::size_t f = 0; f < base.size(); ++f) {
            const double d = nb[base[f]] - shift[f];
            sum[f] += d;
            sq[f] += d * d;
          }
        }
      }
      auto row = fm.row(static_cast<std::size_t>(r) * w + c);
      for (std::size_t f = 0; f < base.size(); ++f) {
        const double mean_offset = sum[f] / count;
        const double var = sq[f] / count - mean_offset * mean_offset;
        row[mean_col[f]] = shift[f] + mean_offset;
        row[sd_col[f]] = var > 0.0 ? std::sqrt(var) : 0.0;
      }
    }
  }
  return fm;
}

FeatureMatrix normalize(const FeatureMatrix& fm) {
  FeatureMatrix out = fm;
  const std::size_t n = fm.rows();
  if (n == 0) return out;
  for (std::size_t d = 0; d < kFeatureCount; ++d) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += fm.at(i, d);
    const double mean = sum / static_cast<double>(n);
    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = fm.at(i, d) - mean;
      sq += x * x;
    }
    const double sd = n > 1 ? std::sqrt(sq / static_cast<double>(n - 1)) : 0.0;
    // Columns whose spread is pure rounding noise are treated as constant.
    const double scale = std::max(std::abs(mean), 1.0);
    if (!(sd > 1e-12 * scale)) {
      for (std::size_t i = 0; i < n; ++i) out.at(i, d) = 0.0;
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) out.at(i, d) = (fm.at(i, d) - mean) / sd;
  }
  return out;
}

FeatureMatrix apply_weights(const FeatureMatrix& fm, std::span<const double> weights) {
  if (weights.size() != kFeatureCount) {
    throw InvalidInput("weight vector length " + std::to_string(weights.size()) + " does not match " +
                       std::to_string(kFeatureCount) + " feature columns");
  }
  FeatureMatrix out = fm;
  for (std::size_t i = 0; i < fm.rows(); ++i) {
    for (std::size_t d = 0; d < kFeatureCount; ++d) out.at(i, d) = fm.at(i, d) * weights[d];
  }
  return out;
}

FeatureMatrix apply_weights(const FeatureMatrix& fm, const WeightVector& weights) {
  return apply_weights(fm, std::span<const double>(weights.values()));
}

void write_features_csv(std::ostream& out, const FeatureMatrix& fm) {
  const auto& names = feature_names();
  for (std::size_t d = 0; d < kFeatureCount; ++d) out << (d ? "," : "") << names[d];
  out << '\n';
  out << std::setprecision(17);
  for (std::size_t i = 0; i < fm.rows(); ++i) {
    for (std::size_t d = 0; d < kFeatureCount; ++d) out << (d ? "," : "") << fm.at(i, d);
    out << '\n';
  }
}

}  // namespace pccseg
