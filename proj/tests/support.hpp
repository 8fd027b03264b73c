#pragma once

// Test-only helpers: fixture generators and independent brute-force oracles.
// Nothing here calls into the code paths it is used to check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>

#include <unistd.h>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pccseg/features.hpp"
#include "pccseg/graph.hpp"
#include "pccseg/image.hpp"
#include "pccseg/labels.hpp"
#include "pccseg/rng.hpp"

namespace pccseg::testing {

inline std::filesystem::path fixture_dir() { return PCCSEG_FIXTURE_DIR; }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("pccseg-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline RgbImage random_image(int w, int h, std::uint64_t seed) {
  Rng rng(seed);
  RgbImage img(w, h);
  for (auto& px : img.pixels) {
    px = {static_cast<std::uint8_t>(rng() % 256), static_cast<std::uint8_t>(rng() % 256),
          static_cast<std::uint8_t>(rng() % 256)};
  }
  return img;
}

/// Two-region image: a centered square (foreground) on a background, channel means 60 apart,
/// Gaussian noise per channel. Returns the image and the ground-truth class of every pixel.
struct TwoRegionFixture {
  RgbImage image;
  ClassMap truth;
  LabelMap trimap;  // seeds only, no ignored pixels
};

inline TwoRegionFixture two_region_fixture(int size, double noise_sd, double seed_fraction, std::uint64_t seed) {
  TwoRegionFixture f;
  f.image = RgbImage(size, size);
  f.truth = {size, size, std::vector<std::uint8_t>(static_cast<std::size_t>(size) * size, kBackground)};
  f.trimap = LabelMap(size, size, PixelLabel::kUnlabeled);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, noise_sd);
  const std::array<double, 3> bg = {70.0, 90.0, 110.0};
  const std::array<double, 3> fg = {130.0, 150.0, 170.0};
  const int lo = size / 4, hi = size - size / 4;
  std::vector<std::size_t> bg_pixels, fg_pixels;
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      const bool inside = r >= lo && r < hi && c >= lo && c < hi;
      const auto& mean = inside ? fg : bg;
      std::array<std::uint8_t, 3> ch{};
      for (int k = 0; k < 3; ++k) ch[k] = static_cast<std::uint8_t>(std::clamp(std::lround(mean[k] + noise(rng)), 0L, 255L));
      const std::size_t p = static_cast<std::size_t>(r) * size + c;
      f.image.pixels[p] = {ch[0], ch[1], ch[2]};
      f.truth.classes[p] = inside ? kForeground : kBackground;
      (inside ? fg_pixels : bg_pixels).push_back(p);
    }
  }
  for (auto* region : {&bg_pixels, &fg_pixels}) {
    std::shuffle(region->begin(), region->end(), rng);
    const auto seeds = static_cast<std::size_t>(std::ceil(seed_fraction * static_cast<double>(region->size())));
    for (std::size_t s = 0; s < seeds; ++s) {
      f.trimap.codes[(*region)[s]] =
          region == &fg_pixels ? PixelLabel::kLabeledForeground : PixelLabel::kLabeledBackground;
    }
  }
  return f;
}

/// U[0, 1) draw from any 64-bit engine.
inline double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Feature matrix with i.i.d. standard normal entries.
inline FeatureMatrix random_features(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  FeatureMatrix fm(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < kFeatureCount; ++d) fm.at(i, d) = dist(rng);
  }
  return fm;
}

/// Identity node set with random labels; both classes guaranteed.
inline NodeSet random_nodes(std::size_t n, double labeled_fraction, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  NodeSet nodes;
  for (std::size_t i = 0; i < n; ++i) {
    nodes.rows.push_back(static_cast<std::uint32_t>(i));
    nodes.classes.push_back(u(rng) < labeled_fraction ? static_cast<std::int8_t>(rng() % 2) : kNoClass);
  }
  nodes.classes[0] = kBackground;
  nodes.classes[1] = kForeground;
  return nodes;
}

inline std::array<double, kFeatureCount> random_weights(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::array<double, kFeatureCount> w{};
  for (auto& x : w) x = u(rng);
  return w;
}

// ---------------------------------------------------------------------------
// Oracles

/// Hue/saturation/value the way Python's colorsys does it.
inline std::array<double, 3> oracle_hsv(double r, double g, double b) {
  const double maxc = std::max({r, g, b});
  const double minc = std::min({r, g, b});
  if (minc == maxc) return {0.0, 0.0, maxc};
  const double s = (maxc - minc) / maxc;
  const double rc = (maxc - r) / (maxc - minc);
  const double gc = (maxc - g) / (maxc - minc);
  const double bc = (maxc - b) / (maxc - minc);
  double h;
  if (r == maxc) h = bc - gc;
  else if (g == maxc) h = 2.0 + rc - bc;
  else h = 4.0 + gc - rc;
  h = std::fmod(h / 6.0, 1.0);
  if (h < 0.0) h += 1.0;
  return {h, s, maxc};
}

/// Straightforward per-pixel feature computation: two-pass mean / population SD over the
/// in-image 3x3 window.
inline std::array<double, kFeatureCount> oracle_features(const RgbImage& img, int r, int c) {
  auto base = [&](int rr, int cc) {
    const Rgb px = img.at(rr, cc);
    const double R = px.r / 255.0, G = px.g / 255.0, B = px.b / 255.0;
    const auto hsv = oracle_hsv(R, G, B);
    return std::array<double, 6>{R, G, B, hsv[0], hsv[1], hsv[2]};
  };
  std::vector<std::array<double, 6>> window;
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) {
      const int rr = r + dr, cc = c + dc;
      if (rr >= 0 && rr < img.height && cc >= 0 && cc < img.width) window.push_back(base(rr, cc));
    }
  }
  const auto self = base(r, c);
  std::array<double, kFeatureCount> f{};
  f[0] = r;
  f[1] = c;
  for (int k = 0; k < 6; ++k) f[2 + k] = self[k];
  f[8] = 2 * self[0] - self[1] - self[2];
  f[9] = 2 * self[1] - self[0] - self[2];
  f[10] = 2 * self[2] - self[0] - self[1];
  std::array<double, 6> mean{}, sd{};
  for (int k = 0; k < 6; ++k) {
    for (const auto& v : window) mean[k] += v[k];
    mean[k] /= static_cast<double>(window.size());
    for (const auto& v : window) sd[k] += (v[k] - mean[k]) * (v[k] - mean[k]);
    sd[k] = std::sqrt(sd[k] / static_cast<double>(window.size()));
  }
  // MR MG MB SDR SDG SDB MH MS MV SDH SDS SDV
  for (int k = 0; k < 3; ++k) {
    f[11 + k] = mean[k];
    f[14 + k] = sd[k];
    f[17 + k] = mean[3 + k];
    f[20 + k] = sd[3 + k];
  }
  return f;
}

inline double oracle_sq_distance(const FeatureMatrix& fm, std::span<const double> w, std::size_t i, std::size_t j) {
  double s = 0.0;
  for (std::size_t d = 0; d < kFeatureCount; ++d) {
    const double t = w[d] * (fm.at(i, d) - fm.at(j, d));
    s += t * t;
  }
  return s;
}

/// Sorts every pairwise distance per node and unions the first-k lists.
inline std::set<std::pair<std::uint32_t, std::uint32_t>> oracle_knn_edges(const FeatureMatrix& fm,
                                                                          const std::vector<std::uint32_t>& rows,
                                                                          std::size_t k,
                                                                          std::span<const double> w) {
  std::set<std::pair<std::uint32_t, std::uint32_t>> edges;
  const std::size_t n = rows.size();
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, std::uint32_t>> all;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) all.emplace_back(oracle_sq_distance(fm, w, rows[i], rows[j]), static_cast<std::uint32_t>(j));
    }
    std::sort(all.begin(), all.end());
    for (std::size_t t = 0; t < k; ++t) {
      const auto a = static_cast<std::uint32_t>(i), b = all[t].second;
      edges.emplace(std::min(a, b), std::max(a, b));
    }
  }
  return edges;
}

inline std::set<std::pair<std::uint32_t, std::uint32_t>> edge_set(const PixelGraph& g) {
  const auto list = g.edge_list();
  return {list.begin(), list.end()};
}

/// Direct scan over an explicit edge set.
inline std::pair<std::size_t, std::size_t> oracle_labeled_counts(
    const std::set<std::pair<std::uint32_t, std::uint32_t>>& edges, const std::vector<std::int8_t>& classes) {
  std::size_t same = 0, total = 0;
  for (auto [a, b] : edges) {
    if (classes[a] < 0 || classes[b] < 0) continue;
    ++total;
    if (classes[a] == classes[b]) ++same;
  }
  return {same, total};
}

/// Random connected-ish graph with labels over `classes` classes (every class seeded).
inline PixelGraph random_graph(std::size_t n, std::size_t avg_degree, int classes, double labeled_fraction,
                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (std::size_t i = 1; i < n; ++i) edges.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(rng() % i));
  const std::size_t extra = n * avg_degree / 2;
  for (std::size_t e = 0; e < extra; ++e) {
    edges.emplace_back(static_cast<std::uint32_t>(rng() % n), static_cast<std::uint32_t>(rng() % n));
  }
  PixelGraph g;
  g.class_count = classes;
  g.node_pixel.resize(n);
  g.node_class.assign(n, kNoClass);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    g.node_pixel[i] = static_cast<std::uint32_t>(i);
    if (u(rng) < labeled_fraction) g.node_class[i] = static_cast<std::int8_t>(rng() % classes);
  }
  for (int c = 0; c < classes && static_cast<std::size_t>(c) < n; ++c) g.node_class[static_cast<std::size_t>(c)] = static_cast<std::int8_t>(c);
  g.set_edges(n, edges);
  return g;
}

}  // namespace pccseg::testing

namespace pccseg::testing {

/// Two classes of equal size. Feature 0 separates them with a wide gap; features
/// 1..noise_features are i.i.d. noise; remaining features are zero. Rows are normalized.
struct SeparableDataset {
  FeatureMatrix fm;
  NodeSet nodes;
  std::vector<std::int8_t> truth;
};

inline SeparableDataset separable_dataset(std::size_t n, std::size_t noise_features, double labeled_fraction,
                                          std::uint64_t seed, bool all_separating = false) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SeparableDataset s;
  FeatureMatrix raw(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto cls = static_cast<std::int8_t>(i % 2);
    s.truth.push_back(cls);
    raw.at(i, 0) = (cls ? 10.0 : 0.0) + u(rng);
    for (std::size_t d = 1; d <= noise_features; ++d) {
      raw.at(i, d) = all_separating ? (cls ? 10.0 : 0.0) + u(rng) : noise(rng);
    }
    s.nodes.rows.push_back(static_cast<std::uint32_t>(i));
    s.nodes.classes.push_back(u(rng) < labeled_fraction ? cls : kNoClass);
  }
  s.nodes.classes[0] = 0;
  s.nodes.classes[1] = 1;
  s.fm = normalize(raw);
  return s;
}

}  // namespace pccseg::testing
