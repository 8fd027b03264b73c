#include "pccseg/segment.hpp"

#include <cmath>
#include <limits>

#include "pccseg/error.hpp"
#include "pccseg/graph.hpp"
#include "pccseg/netindex.hpp"

namespace pccseg {

GrayRaster SegmentationResult::mask() const {
  GrayRaster m(labels.width, labels.height);
  for (std::size_t p = 0; p < labels.size(); ++p) m.pixels[p] = labels.classes[p] == kForeground ? 255 : 0;
  return m;
}

nlohmann::ordered_json SegmentationResult::stats_json() const {
  nlohmann::ordered_json j;
  j["width"] = labels.width;
  j["height"] = labels.height;
  j["k"] = k;
  j["seed"] = seed;
  j["alpha"] = std::isnan(alpha) ? nlohmann::ordered_json() : nlohmann::ordered_json(alpha);
  j["phi"] = std::isnan(phi) ? nlohmann::ordered_json() : nlohmann::ordered_json(phi);
  j["baseline_phi"] = std::isnan(baseline_phi) ? nlohmann::ordered_json() : nlohmann::ordered_json(baseline_phi);
  j["rounds"] = rounds;
  j["converged"] = converged;
  j["cancelled"] = cancelled;
  j["phase1_finalized"] = phase1_finalized;
  j["phase2_pixels"] = phase2_pixels;
  j["phase2_sweeps"] = phase2_sweeps;
  j["nodes"] = node_count;
  j["edges"] = edge_count;
  j["lambda"] = std::vector<double>(lambda.values().begin(), lambda.values().end());
  return j;
}

namespace {

void fill_index(SegmentationResult& result, const FeatureMatrix& fm, const NodeSet& nodes, std::size_t k,
                const WeightVector& lambda, LabeledEdgeCounts counts) {
  result.phi = compute_phi(counts.same, counts.total);
  if (lambda.is_unit()) {
    result.baseline_phi = result.phi;
  } else {
    const auto b = labeled_edge_counts(fm, nodes, k, WeightVector::unit());
    result.baseline_phi = compute_phi(b.same, b.total);
  }
  result.alpha = compute_alpha(result.phi, compute_sigma(result.baseline_phi));
}

}  // namespace

SegmentationResult segment(const RgbImage& image, const LabelMap& labels, const SegmentOptions& options) {
  image.validate();
  if (labels.width != image.width || labels.height != image.height || labels.size() != image.size()) {
    throw InvalidInput("trimap geometry does not match the image");
  }
  return segment_features(normalize(extract_features(image)), labels, options);
}

SegmentationResult segment_features(const FeatureMatrix& fm, const LabelMap& labels, const SegmentOptions& options) {
  if (labels.size() != fm.rows() || labels.width != fm.width() || labels.height != fm.height()) {
    throw InvalidInput("trimap geometry does not match the feature matrix");
  }
  options.pcc.validate(2);

  SegmentationResult result;
  result.labels = {labels.width, labels.height, std::vector<std::uint8_t>(labels.size(), kBackground)};
  result.k = options.k;
  result.lambda = options.lambda;
  result.seed = options.pcc.rng_seed;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  result.alpha = result.phi = result.baseline_phi = nan;

  const NodeSet nodes = node_set_from_labels(labels);
  result.node_count = nodes.size();

  if (labels.count(PixelLabel::kUnlabeled) == 0) {
    // Nothing to infer: the seeds are the answer.
    for (std::size_t p = 0; p < labels.size(); ++p) {
      result.labels.classes[p] = labels.codes[p] == PixelLabel::kLabeledForeground ? kForeground : kBackground;
    }
    try {
      validate_graph_inputs(fm, nodes, options.k);
      fill_index(result, fm, nodes, options.k, options.lambda,
                 labeled_edge_counts(fm, nodes, options.k, options.lambda));
    } catch (const Error&) {
      // Too few nodes for a graph at this k; alpha stays undefined.
    }
    return result;
  }

  const PixelGraph graph = build_graph(fm, nodes, options.k, options.lambda);
  result.edge_count = graph.edge_count();
  fill_index(result, fm, nodes, options.k, options.lambda, count_labeled_edges(graph));

  PccState state(graph);
  Rng rng(options.pcc.rng_seed);
  const Phase1Outcome phase1 = run_phase1(state, options.pcc, rng, options.progress);
  result.rounds = phase1.rounds;
  result.converged = phase1.converged;
  result.cancelled = phase1.cancelled;
  result.phase1_finalized = phase1.finalized_unlabeled;
  if (phase1.cancelled) return result;

  const Phase2Outcome phase2 = run_phase2(state, phase1, fm, options.lambda, options.pcc);
  result.phase2_pixels = phase2.free_pixels;
  result.phase2_sweeps = phase2.sweeps;
  result.labels.classes = phase2.pixel_class;
  return result;
}

}  // namespace pccseg
