#include "pccseg/netindex.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "json.hpp"

#include "pccseg/error.hpp"

namespace pccseg {

LabeledEdgeCounts count_labeled_edges(const PixelGraph& g) {
  LabeledEdgeCounts c;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    if (!g.is_labeled(i)) continue;
    for (std::uint32_t j : g.adj(i)) {
      if (j <= i || !g.is_labeled(j)) continue;
      ++c.total;
      if (g.node_class[i] == g.node_class[j]) ++c.same;
    }
  }
  return c;
}

double compute_phi(std::size_t z_same, std::size_t z_total) {
  if (z_total == 0) return 1.0;
  return static_cast<double>(z_same) / static_cast<double>(z_total);
}

double compute_sigma(double baseline_phi) {
  if (!(baseline_phi > 0.0) || baseline_phi > 1.0) {
    throw InvalidInput("baseline phi must lie in (0, 1], got " + std::to_string(baseline_phi));
  }
  if (baseline_phi == 1.0) return 1.0;
  return std::log(0.5) / std::log(std::max(baseline_phi, kMinBaselinePhi));
}

double compute_alpha(double phi, double sigma) { return std::pow(phi, sigma); }

IndexReport make_index_report(LabeledEdgeCounts counts, double baseline_phi) {
  IndexReport r;
  r.z_same = counts.same;
  r.z_total = counts.total;
  r.phi = compute_phi(counts.same, counts.total);
  r.baseline_phi = baseline_phi;
  r.sigma = compute_sigma(baseline_phi);
  r.baseline_saturated = baseline_phi == 1.0;
  r.alpha = compute_alpha(r.phi, r.sigma);
  return r;
}

std::string IndexReport::to_json() const {
  nlohmann::ordered_json j;
  j["z_same"] = z_same;
  j["z_total"] = z_total;
  j["phi"] = phi;
  j["sigma"] = sigma;
  j["alpha"] = alpha;
  j["baseline_phi"] = baseline_phi;
  j["baseline_saturated"] = baseline_saturated;
  return j.dump();
}

std::string IndexReport::to_text() const {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "z_same              %zu\n"
                "z_total             %zu\n"
                "phi                 %.6f\n"
                "sigma               %.6f\n"
                "alpha               %.6f\n"
                "baseline_phi        %.6f\n"
                "baseline_saturated  %s\n",
                z_same, z_total, phi, sigma, alpha, baseline_phi, baseline_saturated ? "true" : "false");
  return buf;
}

}  // namespace pccseg
