#include "pccseg/pcc.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pccseg/error.hpp"

namespace pccseg {

void PccParams::validate(int class_count) const {
  if (class_count < 2) throw ConfigError("PCC needs at least two classes");
  if (!(delta_v > 0.0 && delta_v <= 1.0)) throw ConfigError("delta_v must lie in (0, 1]");
  if (!(stop_threshold > 1.0 / class_count && stop_threshold <= 1.0)) {
    throw ConfigError("stop_threshold must lie in (1/C, 1]");
  }
  if (check_interval < 1) throw ConfigError("check_interval must be positive");
  if (stabilization_window < 1) throw ConfigError("stabilization_window must be positive");
  if (!(stabilization_epsilon > 0.0)) throw ConfigError("stabilization_epsilon must be positive");
  if (!(phase2_epsilon > 0.0)) throw ConfigError("phase2_epsilon must be positive");
}

void PccParams::merge_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("PCC configuration must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "delta_v") delta_v = value.get<double>();
      else if (key == "stop_threshold") stop_threshold = value.get<double>();
      else if (key == "check_interval") check_interval = value.get<std::size_t>();
      else if (key == "stabilization_window") stabilization_window = value.get<std::size_t>();
      else if (key == "stabilization_epsilon") stabilization_epsilon = value.get<double>();
      else if (key == "max_rounds") max_rounds = value.get<std::size_t>();
      else if (key == "phase2_epsilon") phase2_epsilon = value.get<double>();
      else if (key == "phase2_max_sweeps") phase2_max_sweeps = value.get<std::size_t>();
      else if (key == "rng_seed") rng_seed = value.get<std::uint64_t>();
      else if (key == "literal_phase2_weights") literal_phase2_weights = value.get<bool>();
      else throw ConfigError("unknown PCC option: " + key);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("PCC option " + key + ": " + e.what());
    }
  }
}

nlohmann::ordered_json PccParams::to_json() const {
  nlohmann::ordered_json j;
  j["delta_v"] = delta_v;
  j["stop_threshold"] = stop_threshold;
  j["check_interval"] = check_interval;
  j["stabilization_window"] = stabilization_window;
  j["stabilization_epsilon"] = stabilization_epsilon;
  j["max_rounds"] = max_rounds;
  j["phase2_epsilon"] = phase2_epsilon;
  j["phase2_max_sweeps"] = phase2_max_sweeps;
  j["rng_seed"] = rng_seed;
  j["literal_phase2_weights"] = literal_phase2_weights;
  return j;
}

PccState::PccState(const PixelGraph& graph) : graph_(&graph), classes_(graph.class_count) {
  const std::size_t n = graph.node_count();
  if (classes_ < 2) throw InvalidInput("PCC needs at least two classes");
  if (graph.node_class.size() != n) throw InvalidInput("graph labels do not match its node count");

  domination_.assign(n * classes_, 1.0 / classes_);
  const auto far = static_cast<std::uint32_t>(n > 0 ? n - 1 : 0);
  distance_.assign(static_cast<std::size_t>(classes_) * n, far);
  std::vector<bool> seen(static_cast<std::size_t>(classes_), false);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = graph.node_class[i];
    if (c == kNoClass) continue;
    if (c < 0 || c >= classes_) throw InvalidInput("node class out of range: " + std::to_string(c));
    seen[static_cast<std::size_t>(c)] = true;
    auto v = domination(i);
    std::fill(v.begin(), v.end(), 0.0);
    v[static_cast<std::size_t>(c)] = 1.0;
    distance(c, i) = 0;
    const auto node = static_cast<std::uint32_t>(i);
    particles_.push_back({c, node, node, node, 1.0});
  }
  for (int c = 0; c < classes_; ++c) {
    if (!seen[static_cast<std::size_t>(c)]) {
      throw InvalidInput("class " + std::to_string(c) + " has no labeled node");
    }
  }
}

double PccState::mean_max_domination() const {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < node_count(); ++i) {
    if (is_labeled(i)) continue;
    const auto v = domination(i);
    sum += *std::max_element(v.begin(), v.end());
    ++count;
  }
  return count ? sum / static_cast<double>(count) : 1.0;
}

double PccState::fraction_above(double threshold) const {
  std::size_t hit = 0, count = 0;
  for (std::size_t i = 0; i < node_count(); ++i) {
    if (is_labeled(i)) continue;
    const auto v = domination(i);
    if (*std::max_element(v.begin(), v.end()) > threshold) ++hit;
    ++count;
  }
  return count ? static_cast<double>(hit) / static_cast<double>(count) : 1.0;
}

void apply_visit(std::span<double> domination, int cls, double strength, double delta_v) {
  const std::size_t classes = domination.size();
  const double step = delta_v * strength / static_cast<double>(classes - 1);
  double removed = 0.0;
  for (std::size_t c = 0; c < classes; ++c) {
    if (static_cast<int>(c) == cls) continue;
    const double before = domination[c];
    const double after = std::max(0.0, before - step);
    domination[c] = after;
    removed += before - after;
  }
  auto& own = domination[static_cast<std::size_t>(cls)];
  own = std::min(1.0, own + removed);
}

namespace {

double greedy_weight(const PccState& state, int cls, std::uint32_t node) {
  const double d = 1.0 + static_cast<double>(state.distance(cls, node));
  return state.domination(node)[static_cast<std::size_t>(cls)] / (d * d);
}

bool strict_max(std::span<const double> v, int cls) {
  const double own = v[static_cast<std::size_t>(cls)];
  for (std::size_t c = 0; c < v.size(); ++c) {
    if (static_cast<int>(c) != cls && v[c] >= own) return false;
  }
  return true;
}

}  // namespace

void move_probabilities(const PccState& state, const Particle& particle, std::vector<double>& out) {
  const auto nbrs = state.graph().adj(particle.current);
  out.assign(nbrs.size(), 0.0);
  if (nbrs.empty()) return;
  double total = 0.0;
  for (std::size_t t = 0; t < nbrs.size(); ++t) {
    out[t] = greedy_weight(state, particle.cls, nbrs[t]);
    total += out[t];
  }
  const double uniform = 1.0 / static_cast<double>(nbrs.size());
  for (auto& p : out) p = 0.5 * uniform + (total > 0.0 ? 0.5 * p / total : 0.5 * uniform);
}

std::size_t sample_move(const PccState& state, const Particle& particle, Rng& rng) {
  const auto nbrs = state.graph().adj(particle.current);
  const std::size_t deg = nbrs.size();
  const double branch = uniform01(rng);
  const double u = uniform01(rng);
  const auto uniform_pick = [&] { return std::min(static_cast<std::size_t>(u * static_cast<double>(deg)), deg - 1); };
  if (branch < 0.5) return uniform_pick();

  double total = 0.0;
  for (std::uint32_t j : nbrs) total += greedy_weight(state, particle.cls, j);
  if (!(total > 0.0)) return uniform_pick();
  const double target = u * total;
  double acc = 0.0;
  std::size_t last_positive = deg - 1;
  for (std::size_t t = 0; t < deg; ++t) {
    const double wt = greedy_weight(state, particle.cls, nbrs[t]);
    if (wt > 0.0) last_positive = t;
    acc += wt;
    if (target < acc) return t;
  }
  // Rounding left the target at the very top of the cumulative sum.
  return last_positive;
}

void step_particle(PccState& state, Particle& particle, Rng& rng, double delta_v) {
  const std::uint32_t from = particle.current;
  const auto nbrs = state.graph().adj(from);
  if (nbrs.empty()) return;
  const std::uint32_t target = nbrs[sample_move(state, particle, rng)];

  auto v = state.domination(target);
  if (!state.is_labeled(target)) apply_visit(v, particle.cls, particle.strength, delta_v);
  particle.strength = v[static_cast<std::size_t>(particle.cls)];
  relax_distance(state.distance(particle.cls, from), state.distance(particle.cls, target));

  if (strict_max(v, particle.cls)) {
    particle.previous = from;
    particle.current = target;
  }
}

Phase1Outcome finalize_nodes(const PccState& state, double threshold) {
  Phase1Outcome out;
  const std::size_t n = state.node_count();
  out.node_label.assign(n, kNoClass);
  for (std::size_t i = 0; i < n; ++i) {
    if (state.is_labeled(i)) {
      out.node_label[i] = state.graph().node_class[i];
      continue;
    }
    const auto v = state.domination(i);
    const auto best = std::max_element(v.begin(), v.end());
    if (*best > threshold) {
      out.node_label[i] = static_cast<std::int8_t>(best - v.begin());
      ++out.finalized_unlabeled;
    }
  }
  return out;
}

Phase1Outcome run_phase1(PccState& state, const PccParams& params, Rng& rng, const ProgressFn& progress) {
  params.validate(state.class_count());
  std::vector<double> history;
  std::size_t round = 0;
  bool converged = false;
  bool cancelled = false;
  auto& particles = state.particles();

  while (round < params.max_rounds) {
    for (auto& p : particles) step_particle(state, p, rng, params.delta_v);
    ++round;
    if (round % params.check_interval != 0) continue;

    const double level = state.mean_max_domination();
    history.push_back(level);
    if (progress && !progress({round, level, state.fraction_above(params.stop_threshold)})) {
      cancelled = true;
      break;
    }
    if (history.size() >= params.stabilization_window) {
      const auto first = history.end() - static_cast<std::ptrdiff_t>(params.stabilization_window);
      const auto [lo, hi] = std::minmax_element(first, history.end());
      if (*hi - *lo < params.stabilization_epsilon) {
        converged = true;
        break;
      }
    }
  }

  Phase1Outcome out = finalize_nodes(state, params.stop_threshold);
  out.rounds = round;
  out.converged = converged;
  out.cancelled = cancelled;
  out.check_history = std::move(history);
  return out;
}

Phase2Outcome run_phase2(const PccState& state, const Phase1Outcome& phase1, const FeatureMatrix& fm,
                         const WeightVector& lambda, const PccParams& params) {
  const int w = fm.width();
  const int h = fm.height();
  const std::size_t pixels = fm.rows();
  if (static_cast<std::size_t>(w) * static_cast<std::size_t>(h) != pixels) {
    throw InvalidInput("feature matrix rows do not match its grid");
  }
  const auto classes = static_cast<std::size_t>(state.class_count());
  const PixelGraph& g = state.graph();
  if (phase1.node_label.size() != g.node_count()) throw InvalidInput("phase-1 labels do not match the graph");

  // Pixels outside the graph are fixed background; finalized nodes are fixed one-hot.
  std::vector<double> level(pixels * classes, 0.0);
  for (std::size_t p = 0; p < pixels; ++p) level[p * classes + kBackground] = 1.0;
  std::vector<std::uint32_t> free_pixels;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const std::size_t p = g.node_pixel[i];
    if (p >= pixels) throw InvalidInput("graph node maps outside the pixel grid");
    std::fill_n(level.begin() + static_cast<std::ptrdiff_t>(p * classes), classes, 0.0);
    if (phase1.node_label[i] != kNoClass) {
      level[p * classes + static_cast<std::size_t>(phase1.node_label[i])] = 1.0;
    } else {
      const auto v = state.domination(i);
      std::copy(v.begin(), v.end(), level.begin() + static_cast<std::ptrdiff_t>(p * classes));
      free_pixels.push_back(static_cast<std::uint32_t>(p));
    }
  }

  // Neighbor weights, fixed for the whole phase.
  struct Link {
    std::uint32_t pixel;
    double weight;
  };
  std::vector<std::size_t> link_start(free_pixels.size() + 1, 0);
  std::vector<Link> links;
  for (std::size_t f = 0; f < free_pixels.size(); ++f) {
    const std::size_t p = free_pixels[f];
    const int r = static_cast<int>(p / static_cast<std::size_t>(w));
    const int c = static_cast<int>(p % static_cast<std::size_t>(w));
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        if (dr == 0 && dc == 0) continue;
        const int rr = r + dr, cc = c + dc;
        if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
        const std::size_t q = static_cast<std::size_t>(rr) * w + cc;
        const double dist = distance(fm, lambda, p, q);
        links.push_back({static_cast<std::uint32_t>(q), params.literal_phase2_weights ? dist : 1.0 / (1.0 + dist)});
      }
    }
    link_start[f + 1] = links.size();
  }

  auto mean_max = [&](const std::vector<double>& lv) {
    if (free_pixels.empty()) return 1.0;
    double sum = 0.0;
    for (auto p : free_pixels) {
      const auto first = lv.begin() + static_cast<std::ptrdiff_t>(p * classes);
      sum += *std::max_element(first, first + static_cast<std::ptrdiff_t>(classes));
    }
    return sum / static_cast<double>(free_pixels.size());
  };

  Phase2Outcome out;
  out.free_pixels = free_pixels.size();
  double previous = mean_max(level);
  std::vector<double> next = level;
  std::vector<double> acc(classes);
  while (!free_pixels.empty() && out.sweeps < params.phase2_max_sweeps) {
    for (std::size_t f = 0; f < free_pixels.size(); ++f) {
      const std::size_t p = free_pixels[f];
      std::fill(acc.begin(), acc.end(), 0.0);
      double total = 0.0;
      for (std::size_t l = link_start[f]; l < link_start[f + 1]; ++l) {
        const auto& link = links[l];
        for (std::size_t c = 0; c < classes; ++c) acc[c] += link.weight * level[link.pixel * classes + c];
        total += link.weight;
      }
      if (total > 0.0) {
        for (std::size_t c = 0; c < classes; ++c) next[p * classes + c] = acc[c] / total;
      }
    }
    level.swap(next);
    std::copy(level.begin(), level.end(), next.begin());
    ++out.sweeps;
    const double current = mean_max(level);
    const bool settled = std::abs(current - previous) < params.phase2_epsilon;
    previous = current;
    if (settled) break;
  }

  out.pixel_class.assign(pixels, static_cast<std::uint8_t>(kBackground));
  for (std::size_t p = 0; p < pixels; ++p) {
    const auto first = level.begin() + static_cast<std::ptrdiff_t>(p * classes);
    // max_element returns the first maximum: ties go to the lowest class index.
    out.pixel_class[p] =
        static_cast<std::uint8_t>(std::max_element(first, first + static_cast<std::ptrdiff_t>(classes)) - first);
  }
  return out;
}

}  // namespace pccseg
