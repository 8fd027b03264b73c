#include "pccseg/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pccseg/error.hpp"
#include "pccseg/parallel.hpp"
#include "pccseg/simd/distance.hpp"

namespace pccseg {

std::size_t LabelMap::count(PixelLabel code) const {
  return static_cast<std::size_t>(std::count(codes.begin(), codes.end(), code));
}

NodeSet node_set_from_labels(const LabelMap& labels) {
  NodeSet nodes;
  for (std::size_t p = 0; p < labels.size(); ++p) {
    if (labels.codes[p] == PixelLabel::kIgnoredBackground) continue;
    nodes.rows.push_back(static_cast<std::uint32_t>(p));
    nodes.classes.push_back(seed_class(labels.codes[p]));
  }
  return nodes;
}

void PixelGraph::set_edges(std::size_t n, std::span<const std::pair<std::uint32_t, std::uint32_t>> edges) {
  std::vector<std::vector<std::uint32_t>> lists(n);
  for (auto [a, b] : edges) {
    if (a >= n || b >= n) throw InvalidInput("edge endpoint out of range");
    if (a == b) continue;
    lists[a].push_back(b);
    lists[b].push_back(a);
  }
  offsets.assign(n + 1, 0);
  neighbors.clear();
  for (std::size_t i = 0; i < n; ++i) {
    auto& l = lists[i];
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
    neighbors.insert(neighbors.end(), l.begin(), l.end());
    offsets[i + 1] = neighbors.size();
  }
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> PixelGraph::edge_list() const {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  out.reserve(edge_count());
  for (std::size_t i = 0; i < node_count(); ++i) {
    for (std::uint32_t j : adj(i)) {
      if (i < j) out.emplace_back(static_cast<std::uint32_t>(i), j);
    }
  }
  return out;
}

double squared_distance(const FeatureMatrix& fm, std::span<const double> weights, std::size_t i, std::size_t j) {
  const auto a = fm.row(i);
  const auto b = fm.row(j);
  double acc = 0.0;
  for (std::size_t d = 0; d < kFeatureCount; ++d) {
    const double t = weights[d] * (a[d] - b[d]);
    acc = acc + t * t;
  }
  return acc;
}

double distance(const FeatureMatrix& fm, const WeightVector& lambda, std::size_t i, std::size_t j) {
  return std::sqrt(squared_distance(fm, lambda.values(), i, j));
}

NodeColumns::NodeColumns(const FeatureMatrix& fm, std::span<const std::uint32_t> rows)
    : count_(rows.size()), stride_((rows.size() + 7) / 8 * 8), data_(stride_ * kFeatureCount, 0.0) {
  for (std::size_t n = 0; n < count_; ++n) {
    const auto r = fm.row(rows[n]);
    for (std::size_t d = 0; d < kFeatureCount; ++d) data_[d * stride_ + n] = r[d];
  }
}

void NodeColumns::distances_from(std::size_t query, std::span<const double> weights, std::span<double> out) const {
  double q[kFeatureCount];
  for (std::size_t d = 0; d < kFeatureCount; ++d) q[d] = data_[d * stride_ + query];
  simd::weighted_sq_dist(q, weights.data(), data_.data(), stride_, kFeatureCount, count_, out.data());
}

namespace {

struct Candidate {
  double dist;
  std::uint32_t node;
  bool operator<(const Candidate& o) const { return dist < o.dist || (dist == o.dist && node < o.node); }
};

void select_nearest(std::span<const double> dist, std::size_t query, std::size_t k, std::vector<Candidate>& scratch,
                    std::vector<std::uint32_t>& out) {
  scratch.clear();
  for (std::size_t j = 0; j < dist.size(); ++j) {
    if (j != query) scratch.push_back({dist[j], static_cast<std::uint32_t>(j)});
  }
  k = std::min(k, scratch.size());
  std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k), scratch.end());
  std::sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k));
  out.resize(k);
  for (std::size_t t = 0; t < k; ++t) out[t] = scratch[t].node;
}

}  // namespace

void validate_graph_inputs(const FeatureMatrix& fm, const NodeSet& nodes, std::size_t k) {
  const std::size_t n = nodes.size();
  if (nodes.classes.size() != n) throw InvalidInput("node set rows and classes differ in length");
  for (auto r : nodes.rows) {
    if (r >= fm.rows()) throw InvalidInput("node row " + std::to_string(r) + " outside feature matrix");
  }
  if (k < 1) throw InvalidParameter("k must be at least 1");
  if (k >= n) {
    throw InvalidParameter("k = " + std::to_string(k) + " must be smaller than the node count " + std::to_string(n));
  }
  if (nodes.class_count < 2) throw InvalidInput("at least two classes are required");
  std::vector<bool> seen(static_cast<std::size_t>(nodes.class_count), false);
  for (auto c : nodes.classes) {
    if (c == kNoClass) continue;
    if (c < 0 || c >= nodes.class_count) throw InvalidInput("node class out of range: " + std::to_string(c));
    seen[static_cast<std::size_t>(c)] = true;
  }
  if (std::count(seen.begin(), seen.end(), true) < 2) {
    throw InvalidInput("labeled nodes must cover at least two classes");
  }
}

std::vector<std::uint32_t> nearest_neighbors(const NodeColumns& columns, std::size_t query, std::size_t k,
                                             std::span<const double> weights) {
  std::vector<double> dist(columns.size());
  columns.distances_from(query, weights, dist);
  std::vector<Candidate> scratch;
  std::vector<std::uint32_t> out;
  select_nearest(dist, query, k, scratch, out);
  return out;
}

PixelGraph build_graph(const FeatureMatrix& fm, const NodeSet& nodes, std::size_t k, const WeightVector& lambda) {
  validate_graph_inputs(fm, nodes, k);
  const std::size_t n = nodes.size();
  const NodeColumns columns(fm, nodes.rows);
  const auto weights = lambda.values();

  std::vector<std::uint32_t> knn(n * k);
  parallel_for(n, [&](std::size_t i) {
    thread_local std::vector<double> dist;
    thread_local std::vector<Candidate> scratch;
    thread_local std::vector<std::uint32_t> nearest;
    dist.resize(n);
    columns.distances_from(i, weights, dist);
    select_nearest(dist, i, k, scratch, nearest);
    std::copy(nearest.begin(), nearest.end(), knn.begin() + static_cast<std::ptrdiff_t>(i * k));
  });

  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  edges.reserve(n * k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < k; ++t) edges.emplace_back(static_cast<std::uint32_t>(i), knn[i * k + t]);
  }

  PixelGraph g;
  g.node_pixel = nodes.rows;
  g.node_class = nodes.classes;
  g.class_count = nodes.class_count;
  g.k = k;
  g.lambda = lambda;
  g.set_edges(n, edges);
  return g;
}

PixelGraph build_graph(const FeatureMatrix& fm, const LabelMap& labels, std::size_t k, const WeightVector& lambda) {
  if (labels.size() != fm.rows()) throw InvalidInput("label map and feature matrix differ in pixel count");
  return build_graph(fm, node_set_from_labels(labels), k, lambda);
}

LabeledEdgeCounts labeled_edge_counts(const NodeColumns& columns, const NodeSet& nodes, std::size_t k,
                                      const WeightVector& lambda) {
  const std::size_t n = nodes.size();
  std::vector<std::uint32_t> labeled;
  for (std::size_t i = 0; i < n; ++i) {
    if (nodes.classes[i] != kNoClass) labeled.push_back(static_cast<std::uint32_t>(i));
  }
  const auto weights = lambda.values();
  std::vector<std::vector<std::uint64_t>> found(labeled.size());
  parallel_for(labeled.size(), [&](std::size_t t) {
    thread_local std::vector<double> dist;
    thread_local std::vector<Candidate> scratch;
    thread_local std::vector<std::uint32_t> nearest;
    const std::uint32_t i = labeled[t];
    dist.resize(n);
    columns.distances_from(i, weights, dist);
    select_nearest(dist, i, k, scratch, nearest);
    for (std::uint32_t j : nearest) {
      if (nodes.classes[j] == kNoClass) continue;
      const std::uint64_t lo = std::min(i, j), hi = std::max(i, j);
      found[t].push_back(lo << 32 | hi);
    }
  });

  std::vector<std::uint64_t> pairs;
  for (auto& f : found) pairs.insert(pairs.end(), f.begin(), f.end());
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  LabeledEdgeCounts counts;
  counts.total = pairs.size();
  for (auto p : pairs) {
    if (nodes.classes[p >> 32] == nodes.classes[p & 0xffffffffu]) ++counts.same;
  }
  return counts;
}

LabeledEdgeCounts labeled_edge_counts(const FeatureMatrix& fm, const NodeSet& nodes, std::size_t k,
                                      const WeightVector& lambda) {
  validate_graph_inputs(fm, nodes, k);
  return labeled_edge_counts(NodeColumns(fm, nodes.rows), nodes, k, lambda);
}

}  // namespace pccseg
