#include "pccseg/graph_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "pccseg/error.hpp"

namespace pccseg {

static_assert(std::endian::native == std::endian::little, "binary graph I/O assumes a little-endian host");

namespace {

constexpr std::array<char, 4> kMagic = {'P', 'C', 'C', 'G'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void put_array(std::ostream& out, const T* v, std::size_t n) {
  out.write(reinterpret_cast<const char*>(v), static_cast<std::streamsize>(n * sizeof(T)));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw FormatError("truncated binary graph");
  return v;
}

template <typename T>
void get_array(std::istream& in, T* v, std::size_t n) {
  in.read(reinterpret_cast<char*>(v), static_cast<std::streamsize>(n * sizeof(T)));
  if (!in) throw FormatError("truncated binary graph");
}

void check_structure(const PixelGraph& g) {
  const std::size_t n = g.node_count();
  if (g.node_class.size() != n || g.offsets.size() != n + 1) throw FormatError("inconsistent graph arrays");
  for (std::size_t i = 0; i < n; ++i) {
    if (g.offsets[i] > g.offsets[i + 1] || g.offsets[i + 1] > g.neighbors.size()) {
      throw FormatError("graph offsets are not monotone");
    }
    for (std::uint32_t j : g.adj(i)) {
      if (j >= n) throw FormatError("neighbor index out of range");
    }
  }
}

}  // namespace

void write_edge_list(std::ostream& out, const PixelGraph& g) {
  out << "# pccseg-graph 1\n";
  out << "# nodes " << g.node_count() << '\n';
  out << "# k " << g.k << '\n';
  out << "# classes " << g.class_count << '\n';
  out << "# lambda" << std::setprecision(17);
  for (double w : g.lambda.values()) out << ' ' << w;
  out << "\n# labels";
  for (auto c : g.node_class) out << ' ' << static_cast<int>(c);
  out << "\n# pixels";
  for (auto p : g.node_pixel) out << ' ' << p;
  out << '\n';
  for (auto [i, j] : g.edge_list()) out << i << ' ' << j << '\n';
}

PixelGraph read_edge_list(std::istream& in) {
  PixelGraph g;
  std::size_t n = 0;
  bool have_nodes = false;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    if (line[0] == '#') {
      std::string hash, key;
      ls >> hash >> key;
      if (key == "nodes") {
        ls >> n;
        have_nodes = true;
      } else if (key == "k") {
        ls >> g.k;
      } else if (key == "classes") {
        ls >> g.class_count;
      } else if (key == "lambda") {
        std::vector<double> w;
        for (double x; ls >> x;) w.push_back(x);
        g.lambda = WeightVector(w);
      } else if (key == "labels") {
        for (int c; ls >> c;) g.node_class.push_back(static_cast<std::int8_t>(c));
      } else if (key == "pixels") {
        for (std::uint32_t p; ls >> p;) g.node_pixel.push_back(p);
      }
      continue;
    }
    long long a = -1, b = -1;
    if (!(ls >> a >> b) || a < 0 || b < 0) {
      throw FormatError("edge list line " + std::to_string(line_no) + ": expected two node indices");
    }
    edges.emplace_back(static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b));
  }
  if (!have_nodes) throw FormatError("edge list is missing the '# nodes' header");
  if (g.node_class.empty()) g.node_class.assign(n, kNoClass);
  if (g.node_class.size() != n) throw FormatError("edge list labels do not match the node count");
  for (auto c : g.node_class) {
    if (c < kNoClass || c >= g.class_count) throw FormatError("edge list label out of range");
  }
  if (g.node_pixel.empty()) {
    g.node_pixel.resize(n);
    for (std::size_t i = 0; i < n; ++i) g.node_pixel[i] = static_cast<std::uint32_t>(i);
  }
  if (g.node_pixel.size() != n) throw FormatError("edge list pixels do not match the node count");
  try {
    g.set_edges(n, edges);
  } catch (const InvalidInput& e) {
    throw FormatError(std::string("edge list: ") + e.what());
  }
  return g;
}

void write_graph_binary(std::ostream& out, const PixelGraph& g) {
  out.write(kMagic.data(), kMagic.size());
  put(out, kVersion);
  put(out, static_cast<std::uint64_t>(g.node_count()));
  put(out, static_cast<std::uint64_t>(g.k));
  put(out, static_cast<std::uint32_t>(g.class_count));
  put_array(out, g.lambda.values().data(), kFeatureCount);
  put_array(out, g.node_class.data(), g.node_class.size());
  put_array(out, g.node_pixel.data(), g.node_pixel.size());
  for (auto o : g.offsets) put(out, static_cast<std::uint64_t>(o));
  put(out, static_cast<std::uint64_t>(g.neighbors.size()));
  put_array(out, g.neighbors.data(), g.neighbors.size());
}

PixelGraph read_graph_binary(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw FormatError("not a binary graph file");
  if (get<std::uint32_t>(in) != kVersion) throw FormatError("unsupported binary graph version");
  PixelGraph g;
  const auto n = static_cast<std::size_t>(get<std::uint64_t>(in));
  g.k = static_cast<std::size_t>(get<std::uint64_t>(in));
  g.class_count = static_cast<int>(get<std::uint32_t>(in));
  std::array<double, kFeatureCount> w{};
  get_array(in, w.data(), w.size());
  g.lambda = WeightVector(w);
  g.node_class.resize(n);
  get_array(in, g.node_class.data(), n);
  g.node_pixel.resize(n);
  get_array(in, g.node_pixel.data(), n);
  g.offsets.resize(n + 1);
  for (auto& o : g.offsets) o = static_cast<std::size_t>(get<std::uint64_t>(in));
  const auto nnz = static_cast<std::size_t>(get<std::uint64_t>(in));
  g.neighbors.resize(nnz);
  get_array(in, g.neighbors.data(), nnz);
  check_structure(g);
  return g;
}

void save_graph(const std::filesystem::path& path, const PixelGraph& g) {
  const bool binary = path.extension() == ".bin" || path.extension() == ".pccg";
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw InvalidInput("cannot write graph file: " + path.string());
  if (binary) {
    write_graph_binary(out, g);
  } else {
    write_edge_list(out, g);
  }
}

PixelGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open graph file: " + path.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  const bool binary = in.gcount() == 4 && magic == kMagic;
  in.clear();
  in.seekg(0);
  return binary ? read_graph_binary(in) : read_edge_list(in);
}

}  // namespace pccseg
