#pragma once

#include <filesystem>
#include <iosfwd>

#include "pccseg/graph.hpp"

namespace pccseg {

// Edge-list text format:
//
//   # pccseg-graph 1
//   # nodes <N>
//   # k <k>
//   # classes <C>
//   # lambda <23 weights>
//   # labels <N ints, -1 = unlabeled>
//   # pixels <N pixel indices>        (optional, identity when absent)
//   i j                               (one undirected edge per line, i < j)
//
// Binary format (little-endian): "PCCG", u32 version = 1, u64 N, u64 k, u32 C,
// 23 f64 lambda, N i8 labels, N u32 pixels, (N+1) u64 offsets, u64 nnz, nnz u32 neighbors.

void write_edge_list(std::ostream& out, const PixelGraph& g);
PixelGraph read_edge_list(std::istream& in);

void write_graph_binary(std::ostream& out, const PixelGraph& g);
PixelGraph read_graph_binary(std::istream& in);

void save_graph(const std::filesystem::path& path, const PixelGraph& g);
/// Picks the binary reader when the file starts with the magic bytes.
PixelGraph load_graph(const std::filesystem::path& path);

}  // namespace pccseg
