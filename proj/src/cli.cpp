#include "pccseg/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "pccseg/dataio.hpp"
#include "pccseg/error.hpp"
#include "pccseg/features.hpp"
#include "pccseg/graph.hpp"
#include "pccseg/graph_io.hpp"
#include "pccseg/netindex.hpp"
#include "pccseg/optimizer.hpp"
#include "pccseg/segment.hpp"
#include "pccseg/server.hpp"

namespace pccseg::cli {

namespace fs = std::filesystem;

namespace {

std::atomic<bool> g_shutdown{false};

struct Options {
  std::string image, trimap, gt, lambda_file, config, out, graph, baseline_graph, static_dir, format = "text";
  std::size_t k = kDefaultK;
  std::vector<std::size_t> k_sweep;
  bool optimize = false;
  bool normalized = false;
  bool json = false;
  std::uint64_t seed = 0;
  double downscale = 1.0;
  int max_side = 0;
  int port = -1;
  double baseline_phi = std::nan("");
};

/// Settings from --config: {"pcc": {...}, "ga": {...}, "server": {...}}.
struct FileConfig {
  PccParams pcc;
  GaConfig ga;
  server::ServerConfig server;
};

FileConfig load_config(const std::string& path) {
  FileConfig cfg;
  if (path.empty()) return cfg;
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "pcc") cfg.pcc.merge_json(value);
    else if (key == "ga") cfg.ga.merge_json(value);
    else if (key == "server") cfg.server.merge_json(value);
    else throw ConfigError("unknown config section: " + key);
  }
  return cfg;
}

/// A JSON array of 23 weights, or an object holding one under "lambda".
WeightVector load_lambda(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open lambda file: " + path);
  try {
    const auto j = nlohmann::json::parse(in);
    const auto& arr = j.is_object() ? j.at("lambda") : j;
    return WeightVector(arr.get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("lambda file " + path + ": " + e.what());
  }
}

fs::path output_dir(const Options& o) {
  fs::path dir = o.out;
  if (dir.empty()) {
    const char* env = std::getenv(kOutDirEnv);
    dir = env && *env ? env : ".";
  }
  fs::create_directories(dir);
  return dir;
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw InvalidInput(std::string("missing required option ") + flag);
}

struct Inputs {
  RgbImage image;
  LabelMap trimap;
  std::optional<GroundTruth> truth;
};

Inputs load_inputs(const Options& o, bool need_trimap) {
  require(o.image, "--image");
  if (need_trimap) require(o.trimap, "--trimap");
  Inputs in;
  in.image = load_image(o.image);
  GrayRaster tri, gt;
  if (!o.trimap.empty()) tri = load_gray(o.trimap);
  if (!o.gt.empty()) gt = load_gray(o.gt);

  double factor = o.downscale;
  if (o.max_side > 0) factor = std::min(factor, factor_for_max_side(in.image.width, in.image.height, o.max_side));
  if (factor < 1.0) {
    in.image = downscale_image(in.image, factor);
    if (!o.trimap.empty()) tri = downscale_gray(tri, factor);
    if (!o.gt.empty()) gt = downscale_gray(gt, factor);
  }
  if (!o.trimap.empty()) {
    in.trimap = trimap_from_raster(tri);
    if (in.trimap.width != in.image.width || in.trimap.height != in.image.height) {
      throw InvalidInput("trimap " + o.trimap + " does not match the image size");
    }
  }
  if (!o.gt.empty()) {
    in.truth = truth_from_raster(gt);
    if (in.truth->width != in.image.width || in.truth->height != in.image.height) {
      throw InvalidInput("ground truth " + o.gt + " does not match the image size");
    }
  }
  return in;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
}

OptimizationResult run_optimizer(const Options& o, const FeatureMatrix& fm, const LabelMap& trimap, GaConfig ga,
                                 const fs::path& dir, std::ostream& out) {
  ga.rng_seed = o.seed;
  ga.validate();
  const OptimizationResult r = optimize(fm, trimap, o.k, ga);
  write_text(dir / "lambda.json", r.to_json(ga).dump(2) + "\n");
  std::ofstream trace(dir / "trace.csv", std::ios::binary);
  write_trace_csv(trace, r.trace);
  out << "optimized alpha " << fmt(r.alpha) << " after " << r.trace.generations.size() << " generations ("
      << stop_reason_name(r.trace.stop_reason) << ")\n";
  return r;
}

int cmd_segment(const Options& o, std::ostream& out) {
  const FileConfig cfg = load_config(o.config);
  const Inputs in = load_inputs(o, true);
  const fs::path dir = output_dir(o);
  const FeatureMatrix fm = normalize(extract_features(in.image));

  WeightVector lambda = o.lambda_file.empty() ? WeightVector::unit() : load_lambda(o.lambda_file);
  if (o.optimize) lambda = run_optimizer(o, fm, in.trimap, cfg.ga, dir, out).lambda;

  std::vector<std::size_t> ks = o.k_sweep.empty() ? std::vector<std::size_t>{o.k} : o.k_sweep;
  std::ofstream csv(dir / "segment.csv", std::ios::binary);
  csv << "k,error_rate,alpha,rounds,seed\n";

  std::optional<std::size_t> best;
  double best_score = 0.0;
  std::vector<SegmentationResult> results;
  std::vector<std::optional<EvalReport>> reports;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    SegmentOptions opts;
    opts.k = ks[i];
    opts.lambda = lambda;
    opts.pcc = cfg.pcc;
    opts.pcc.rng_seed = o.seed + ks[i];
    SegmentationResult r = segment_features(fm, in.trimap, opts);
    std::optional<EvalReport> rep;
    if (in.truth) rep = error_rate(r.labels, in.trimap, *in.truth);
    save_mask(dir / ("mask_k" + std::to_string(ks[i]) + ".png"), r.labels);
    csv << ks[i] << ',' << (rep ? fmt(rep->error_rate) : "") << ',' << fmt(r.alpha) << ',' << r.rounds << ','
        << opts.pcc.rng_seed << '\n';
    out << "k=" << ks[i] << " alpha=" << fmt(r.alpha) << " rounds=" << r.rounds;
    if (rep) out << " error_rate=" << fmt(rep->error_rate);
    out << '\n';

    // Lowest error when ground truth is given, highest alpha otherwise; ties keep the earlier k.
    const double score = rep ? -rep->error_rate : (std::isnan(r.alpha) ? -1.0 : r.alpha);
    if (!best || score > best_score) {
      best = i;
      best_score = score;
    }
    results.push_back(std::move(r));
    reports.push_back(rep);
  }

  const auto& r = results[*best];
  save_mask(dir / "mask.png", r.labels);
  nlohmann::ordered_json summary;
  summary["best_k"] = r.k;
  summary["stats"] = r.stats_json();
  if (reports[*best]) summary["evaluation"] = reports[*best]->to_json();
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  out << "best k=" << r.k;
  if (reports[*best]) out << " error_rate=" << fmt(reports[*best]->error_rate);
  out << '\n';
  return kExitOk;
}

int cmd_optimize(const Options& o, std::ostream& out) {
  const FileConfig cfg = load_config(o.config);
  const Inputs in = load_inputs(o, true);
  const fs::path dir = output_dir(o);
  const FeatureMatrix fm = normalize(extract_features(in.image));
  run_optimizer(o, fm, in.trimap, cfg.ga, dir, out);
  return kExitOk;
}

int cmd_index(const Options& o, std::ostream& out) {
  IndexReport report;
  if (!o.graph.empty()) {
    const PixelGraph g = load_graph(o.graph);
    const auto counts = count_labeled_edges(g);
    double base = o.baseline_phi;
    if (!o.baseline_graph.empty()) {
      const auto b = count_labeled_edges(load_graph(o.baseline_graph));
      base = compute_phi(b.same, b.total);
    }
    if (std::isnan(base)) base = compute_phi(counts.same, counts.total);
    report = make_index_report(counts, base);
  } else {
    const Inputs in = load_inputs(o, true);
    const FeatureMatrix fm = normalize(extract_features(in.image));
    const NodeSet nodes = node_set_from_labels(in.trimap);
    const WeightVector lambda = o.lambda_file.empty() ? WeightVector::unit() : load_lambda(o.lambda_file);
    const auto counts = labeled_edge_counts(fm, nodes, o.k, lambda);
    const auto b = labeled_edge_counts(fm, nodes, o.k, WeightVector::unit());
    report = make_index_report(counts, compute_phi(b.same, b.total));
  }
  out << (o.json ? report.to_json() + "\n" : report.to_text());
  return kExitOk;
}

int cmd_features(const Options& o, std::ostream& out) {
  const Inputs in = load_inputs(o, false);
  FeatureMatrix fm = extract_features(in.image);
  if (o.normalized) fm = normalize(fm);
  const fs::path path = output_dir(o) / "features.csv";
  std::ofstream f(path, std::ios::binary);
  write_features_csv(f, fm);
  out << "wrote " << path.string() << '\n';
  return kExitOk;
}

int cmd_graph(const Options& o, std::ostream& out) {
  const Inputs in = load_inputs(o, true);
  const FeatureMatrix fm = normalize(extract_features(in.image));
  const WeightVector lambda = o.lambda_file.empty() ? WeightVector::unit() : load_lambda(o.lambda_file);
  const PixelGraph g = build_graph(fm, in.trimap, o.k, lambda);
  const fs::path path = output_dir(o) / (o.format == "binary" ? "graph.pccg" : "graph.txt");
  save_graph(path, g);
  out << "wrote " << path.string() << " (" << g.node_count() << " nodes, " << g.edge_count() << " edges)\n";
  return kExitOk;
}

int cmd_serve(const Options& o, std::ostream& out, std::ostream& err) {
  FileConfig cfg = load_config(o.config);
  if (o.port >= 0) cfg.server.port = o.port;
  if (!o.static_dir.empty()) cfg.server.static_dir = o.static_dir;
  server::SegServer srv(cfg.server);
  const int port = srv.bind();
  if (port < 0) {
    err << "error: cannot bind " << cfg.server.host << ':' << cfg.server.port << '\n';
    return kExitRuntimeError;
  }
  out << "listening on " << cfg.server.host << ':' << port << std::endl;
  g_shutdown = false;
  std::jthread watcher([&srv](std::stop_token stop) {
    while (!stop.stop_requested() && !g_shutdown.load()) std::this_thread::sleep_for(std::chrono::milliseconds(50));
    srv.stop();
  });
  srv.listen();
  return kExitOk;
}

}  // namespace

void request_shutdown() { g_shutdown = true; }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Particle competition and cooperation segmentation toolkit", "pccseg"};
  app.require_subcommand(1);
  Options o;

  auto inputs = [&o](CLI::App* c, bool trimap) {
    c->add_option("--image", o.image, "input image (PNG, BMP, JPEG)");
    if (trimap) {
      c->add_option("--trimap", o.trimap, "trimap: 0 ignored, 64 background, 128 unlabeled, 255 foreground");
      c->add_option("--gt", o.gt, "ground truth: 0 background, 255 foreground, other values unscored");
    }
    c->add_option("--downscale", o.downscale, "scale factor in (0, 1]")->check(CLI::Range(1e-6, 1.0));
    c->add_option("--max-side", o.max_side, "downscale so the longest side is at most this")->check(CLI::PositiveNumber);
    c->add_option("--out", o.out, std::string("output directory (default $") + kOutDirEnv + " or .)");
  };

  auto* seg = app.add_subcommand("segment", "segment an image from a trimap, optionally over a k sweep");
  inputs(seg, true);
  seg->add_option("--k", o.k, "neighbors per node")->check(CLI::PositiveNumber);
  seg->add_option("--k-sweep", o.k_sweep, "comma separated k values")->delimiter(',');
  seg->add_option("--lambda-file", o.lambda_file, "feature weights (JSON)");
  seg->add_flag("--optimize", o.optimize, "search feature weights first (graph size --k)");
  seg->add_option("--seed", o.seed, "base seed; each k runs with seed + k");
  seg->add_option("--config", o.config, "JSON file with pcc / ga sections");

  auto* opt = app.add_subcommand("optimize", "search feature weights with the genetic algorithm");
  inputs(opt, true);
  opt->add_option("--k", o.k, "neighbors per node")->check(CLI::PositiveNumber);
  opt->add_option("--seed", o.seed, "random seed");
  opt->add_option("--config", o.config, "JSON file with a ga section");

  auto* idx = app.add_subcommand("index", "report phi, sigma and alpha for a graph or an image");
  inputs(idx, true);
  idx->add_option("--graph", o.graph, "graph file (edge list or binary)");
  idx->add_option("--baseline-graph", o.baseline_graph, "graph giving the baseline phi");
  idx->add_option("--baseline-phi", o.baseline_phi, "baseline phi value");
  idx->add_option("--k", o.k, "neighbors per node")->check(CLI::PositiveNumber);
  idx->add_option("--lambda-file", o.lambda_file, "feature weights (JSON)");
  idx->add_flag("--json", o.json, "print JSON");

  auto* feat = app.add_subcommand("features", "write the per-pixel feature matrix as CSV");
  inputs(feat, false);
  feat->add_flag("--normalized", o.normalized, "z-score the columns");

  auto* graph = app.add_subcommand("graph", "build and export the k-NN graph");
  inputs(graph, true);
  graph->add_option("--k", o.k, "neighbors per node")->check(CLI::PositiveNumber);
  graph->add_option("--lambda-file", o.lambda_file, "feature weights (JSON)");
  graph->add_option("--format", o.format, "text or binary")->check(CLI::IsMember({"text", "binary"}));

  auto* serve = app.add_subcommand("serve", "run the segmentation HTTP service");
  serve->add_option("--port", o.port, "listen port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve->add_option("--config", o.config, "JSON file with a server section");
  serve->add_option("--static", o.static_dir, "directory served at /");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (seg->parsed()) return cmd_segment(o, out);
    if (opt->parsed()) return cmd_optimize(o, out);
    if (idx->parsed()) return cmd_index(o, out);
    if (feat->parsed()) return cmd_features(o, out);
    if (graph->parsed()) return cmd_graph(o, out);
    return cmd_serve(o, out, err);
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const InvalidParameter& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntimeError;
  }
}

}  // namespace pccseg::cli
