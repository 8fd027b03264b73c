#pragma once

#include <cstddef>
#include <string>

#include "pccseg/graph.hpp"

namespace pccseg {

/// Baseline separability values below this are clamped before taking the logarithm.
inline constexpr double kMinBaselinePhi = 1e-6;

struct IndexReport {
  std::size_t z_same = 0;   // labeled-labeled edges joining the same class
  std::size_t z_total = 0;  // labeled-labeled edges of any class pair
  double phi = 1.0;
  double sigma = 1.0;
  double alpha = 1.0;
  double baseline_phi = 1.0;
  bool baseline_saturated = false;  // baseline phi == 1, sigma fixed to 1

  std::string to_json() const;
  /// Aligned "key  value" lines.
  std::string to_text() const;
};

/// Each undirected edge counted once.
LabeledEdgeCounts count_labeled_edges(const PixelGraph& g);

/// z_same / z_total; 1 when there are no labeled-labeled edges.
double compute_phi(std::size_t z_same, std::size_t z_total);

/// ln(0.5) / ln(baseline_phi). A baseline of 1 yields 1. Throws InvalidInput unless 0 < baseline_phi <= 1.
double compute_sigma(double baseline_phi);

/// phi^sigma.
double compute_alpha(double phi, double sigma);

IndexReport make_index_report(LabeledEdgeCounts counts, double baseline_phi);

}  // namespace pccseg
