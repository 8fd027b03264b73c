#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pccseg/features.hpp"
#include "pccseg/labels.hpp"

namespace pccseg {

/// The feature rows that become graph nodes, with the seed class of each (kNoClass = unlabeled).
struct NodeSet {
  std::vector<std::uint32_t> rows;
  std::vector<std::int8_t> classes;
  int class_count = 2;

  std::size_t size() const { return rows.size(); }
};

/// Every non-ignored pixel, in pixel order.
NodeSet node_set_from_labels(const LabelMap& labels);

/// Undirected, unweighted k-NN graph in compressed sparse row form.
struct PixelGraph {
  std::vector<std::uint32_t> node_pixel;  // node -> feature row / pixel index
  std::vector<std::int8_t> node_class;    // kNoClass for unlabeled nodes
  std::vector<std::size_t> offsets;       // size N + 1
  std::vector<std::uint32_t> neighbors;   // sorted within each node
  int class_count = 2;
  std::size_t k = 0;
  WeightVector lambda;

  std::size_t node_count() const { return node_pixel.size(); }
  std::size_t edge_count() const { return neighbors.size() / 2; }
  std::span<const std::uint32_t> adj(std::size_t node) const {
    return {neighbors.data() + offsets[node], offsets[node + 1] - offsets[node]};
  }
  std::size_t degree(std::size_t node) const { return offsets[node + 1] - offsets[node]; }
  bool is_labeled(std::size_t node) const { return node_class[node] != kNoClass; }

  /// Builds the CSR arrays from an undirected edge list (pairs in either orientation, duplicates allowed).
  void set_edges(std::size_t node_count, std::span<const std::pair<std::uint32_t, std::uint32_t>> edges);

  /// Sorted (i < j) edge pairs.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edge_list() const;
};

/// Euclidean distance between weighted rows i and j: sqrt(sum_d (w_d (f_id - f_jd))^2).
double distance(const FeatureMatrix& fm, const WeightVector& lambda, std::size_t i, std::size_t j);

/// Squared form of distance(), computed with the same operation order as the SIMD kernels.
double squared_distance(const FeatureMatrix& fm, std::span<const double> weights, std::size_t i, std::size_t j);

/// Column-major copy of the node rows; feeds the SIMD distance kernels.
class NodeColumns {
 public:
  NodeColumns(const FeatureMatrix& fm, std::span<const std::uint32_t> rows);

  std::size_t size() const { return count_; }
  std::size_t stride() const { return stride_; }
  const double* data() const { return data_.data(); }

  /// Squared weighted distances from node `query` to all nodes.
  void distances_from(std::size_t query, std::span<const double> weights, std::span<double> out) const;

 private:
  std::size_t count_ = 0;
  std::size_t stride_ = 0;
  std::vector<double> data_;
};

/// The k nearest other nodes of `query`, ordered by (distance, node index).
std::vector<std::uint32_t> nearest_neighbors(const NodeColumns& columns, std::size_t query, std::size_t k,
                                             std::span<const double> weights);

/// Throws InvalidParameter if k < 1 or k >= N, InvalidInput if the seeds do not span two classes
/// or a row index is out of range.
void validate_graph_inputs(const FeatureMatrix& fm, const NodeSet& nodes, std::size_t k);

/// Each node joined to its k nearest (ties prefer the lower node index), symmetrized by union.
/// Throws InvalidParameter if k < 1 or k >= N, InvalidInput if the seeds do not span two classes.
PixelGraph build_graph(const FeatureMatrix& fm, const NodeSet& nodes, std::size_t k, const WeightVector& lambda);
PixelGraph build_graph(const FeatureMatrix& fm, const LabelMap& labels, std::size_t k, const WeightVector& lambda);

/// Same-class and total edge counts among labeled nodes of build_graph(fm, nodes, k, lambda),
/// computed from the neighbor lists of labeled nodes only.
struct LabeledEdgeCounts {
  std::size_t same = 0;
  std::size_t total = 0;
  friend bool operator==(const LabeledEdgeCounts&, const LabeledEdgeCounts&) = default;
};
LabeledEdgeCounts labeled_edge_counts(const FeatureMatrix& fm, const NodeSet& nodes, std::size_t k,
                                      const WeightVector& lambda);
LabeledEdgeCounts labeled_edge_counts(const NodeColumns& columns, const NodeSet& nodes, std::size_t k,
                                      const WeightVector& lambda);

}  // namespace pccseg
