#include "pccseg/optimizer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>

#include "pccseg/error.hpp"
#include "pccseg/rng.hpp"

namespace pccseg {

void GaConfig::validate() const {
  if (population_size < 2) throw ConfigError("population_size must be at least 2");
  if (elite_count >= population_size) throw ConfigError("elite_count must be smaller than population_size");
  if (max_generations < 1) throw ConfigError("max_generations must be at least 1");
  if (!(crossover_fraction >= 0.0 && crossover_fraction <= 1.0)) {
    throw ConfigError("crossover_fraction must lie in [0, 1]");
  }
  if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0)) throw ConfigError("mutation_rate must lie in [0, 1]");
  if (stall_generations < 1) throw ConfigError("stall_generations must be at least 1");
  if (!(early_stop_alpha > 0.0)) throw ConfigError("early_stop_alpha must be positive");
}

void GaConfig::merge_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("GA configuration must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "population_size") population_size = value.get<std::size_t>();
      else if (key == "max_generations") max_generations = value.get<std::size_t>();
      else if (key == "crossover_fraction") crossover_fraction = value.get<double>();
      else if (key == "elite_count") elite_count = value.get<std::size_t>();
      else if (key == "mutation_rate") mutation_rate = value.get<double>();
      else if (key == "stall_generations") stall_generations = value.get<std::size_t>();
      else if (key == "rng_seed") rng_seed = value.get<std::uint64_t>();
      else if (key == "early_stop_alpha") early_stop_alpha = value.get<double>();
      else throw ConfigError("unknown GA option: " + key);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("GA option " + key + ": " + e.what());
    }
  }
}

nlohmann::ordered_json GaConfig::to_json() const {
  nlohmann::ordered_json j;
  j["population_size"] = population_size;
  j["max_generations"] = max_generations;
  j["crossover_fraction"] = crossover_fraction;
  j["elite_count"] = elite_count;
  j["mutation_rate"] = mutation_rate;
  j["stall_generations"] = stall_generations;
  j["rng_seed"] = rng_seed;
  j["early_stop_alpha"] = early_stop_alpha;
  return j;
}

std::string_view stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::kTargetReached: return "target_reached";
    case StopReason::kStalled: return "stalled";
    case StopReason::kMaxGenerations: return "max_generations";
    case StopReason::kCancelled: return "cancelled";
  }
  return "unknown";
}

nlohmann::ordered_json OptimizationResult::to_json(const GaConfig& cfg) const {
  nlohmann::ordered_json j;
  j["lambda"] = std::vector<double>(lambda.values().begin(), lambda.values().end());
  j["feature_names"] = std::vector<std::string>(feature_names().begin(), feature_names().end());
  j["alpha"] = alpha;
  j["baseline_phi"] = baseline_phi;
  j["sigma"] = sigma;
  j["k"] = k;
  j["generations"] = trace.generations.size();
  j["evaluations"] = trace.evaluations;
  j["stop_reason"] = std::string(stop_reason_name(trace.stop_reason));
  j["ga"] = cfg.to_json();
  return j;
}

double baseline_phi(const FeatureMatrix& fm, const NodeSet& nodes, std::size_t k) {
  const auto c = labeled_edge_counts(fm, nodes, k, WeightVector::unit());
  return compute_phi(c.same, c.total);
}

double fitness(const WeightVector& lambda, const FeatureMatrix& fm, const NodeSet& nodes, std::size_t k,
               double baseline) {
  const PixelGraph g = build_graph(fm, nodes, k, lambda);
  return make_index_report(count_labeled_edges(g), baseline).alpha;
}

double fitness(const WeightVector& lambda, const FeatureMatrix& fm, const LabelMap& labels, std::size_t k,
               double baseline) {
  return fitness(lambda, fm, node_set_from_labels(labels), k, baseline);
}

namespace {

NodeSet checked(const FeatureMatrix& fm, NodeSet nodes, std::size_t k) {
  validate_graph_inputs(fm, nodes, k);
  return nodes;
}

}  // namespace

FitnessFunction::FitnessFunction(const FeatureMatrix& fm, NodeSet nodes, std::size_t k)
    : nodes_(checked(fm, std::move(nodes), k)), k_(k), columns_(fm, nodes_.rows) {
  const auto c = labeled_edge_counts(columns_, nodes_, k_, WeightVector::unit());
  baseline_phi_ = compute_phi(c.same, c.total);
  sigma_ = compute_sigma(baseline_phi_);
}

double FitnessFunction::operator()(const WeightVector& lambda) {
  std::array<std::uint64_t, kFeatureCount> key{};
  for (std::size_t d = 0; d < kFeatureCount; ++d) key[d] = std::bit_cast<std::uint64_t>(lambda[d]);
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  ++evaluations_;
  const auto c = labeled_edge_counts(columns_, nodes_, k_, lambda);
  const double alpha = compute_alpha(compute_phi(c.same, c.total), sigma_);
  memo_.emplace(key, alpha);
  return alpha;
}

IndexReport FitnessFunction::report(const WeightVector& lambda) const {
  return make_index_report(labeled_edge_counts(columns_, nodes_, k_, lambda), baseline_phi_);
}

namespace {

using Genome = std::array<double, kFeatureCount>;

// At least one positive gene keeps the genome a valid weight vector.
void repair(Genome& g, Rng& rng) {
  if (std::any_of(g.begin(), g.end(), [](double x) { return x > 0.0; })) return;
  g[uniform_index(rng, kFeatureCount)] = 1.0 - uniform01(rng);
}

std::size_t tournament(const std::vector<double>& fit, Rng& rng) {
  const std::size_t a = uniform_index(rng, fit.size());
  const std::size_t b = uniform_index(rng, fit.size());
  if (fit[a] != fit[b]) return fit[a] > fit[b] ? a : b;
  return std::min(a, b);
}

// BLX-0.5: each child gene uniform on the parents' interval widened by half its length.
Genome blend(const Genome& p1, const Genome& p2, Rng& rng) {
  Genome child{};
  for (std::size_t d = 0; d < kFeatureCount; ++d) {
    const double lo = std::min(p1[d], p2[d]);
    const double hi = std::max(p1[d], p2[d]);
    const double span = hi - lo;
    const double x = lo - 0.5 * span + uniform01(rng) * 2.0 * span;
    child[d] = std::clamp(x, 0.0, 1.0);
  }
  return child;
}

bool mutate(Genome& g, double rate, Rng& rng) {
  bool changed = false;
  for (auto& x : g) {
    if (uniform01(rng) < rate) {
      x = uniform01(rng);
      changed = true;
    }
  }
  return changed;
}

}  // namespace

OptimizationResult optimize(const FeatureMatrix& fm, const NodeSet& nodes, std::size_t k, const GaConfig& cfg,
                            const GenerationCallback& on_generation) {
  cfg.validate();
  FitnessFunction fit_fn(fm, nodes, k);
  Rng rng(cfg.rng_seed);

  const std::size_t pop_size = cfg.population_size;
  std::vector<Genome> pop(pop_size);
  for (auto& g : pop) {
    for (auto& x : g) x = uniform01(rng);
    repair(g, rng);
  }

  OptimizationResult result;
  result.k = k;
  result.baseline_phi = fit_fn.baseline_phi();
  result.sigma = fit_fn.sigma();

  double best_alpha = -1.0;
  Genome best{};
  std::size_t stall = 0;
  std::vector<double> fit(pop_size);

  for (std::size_t gen = 0;; ++gen) {
    for (std::size_t i = 0; i < pop_size; ++i) fit[i] = fit_fn(WeightVector(pop[i]));

    // First individual with the highest fitness.
    const std::size_t top = static_cast<std::size_t>(std::max_element(fit.begin(), fit.end()) - fit.begin());
    if (fit[top] > best_alpha) {
      best_alpha = fit[top];
      best = pop[top];
      stall = 0;
    } else {
      ++stall;
    }

    GenerationRecord rec;
    rec.generation = gen;
    rec.best_alpha = best_alpha;
    rec.mean_alpha = std::accumulate(fit.begin(), fit.end(), 0.0) / static_cast<double>(pop_size);
    rec.best_lambda = WeightVector(best);
    rec.evaluations = fit_fn.evaluations();
    result.trace.generations.push_back(rec);

    StopReason reason{};
    bool stop = true;
    if (best_alpha >= cfg.early_stop_alpha) {
      reason = StopReason::kTargetReached;
    } else if (on_generation && !on_generation(rec)) {
      reason = StopReason::kCancelled;
    } else if (stall >= cfg.stall_generations) {
      reason = StopReason::kStalled;
    } else if (gen + 1 >= cfg.max_generations) {
      reason = StopReason::kMaxGenerations;
    } else {
      stop = false;
    }
    if (stop) {
      result.trace.stop_reason = reason;
      break;
    }

    std::vector<std::size_t> order(pop_size);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fit[a] > fit[b]; });

    std::vector<Genome> next;
    next.reserve(pop_size);
    for (std::size_t e = 0; e < cfg.elite_count; ++e) next.push_back(pop[order[e]]);
    const std::size_t offspring = pop_size - cfg.elite_count;
    const auto crossovers = static_cast<std::size_t>(std::lround(cfg.crossover_fraction * static_cast<double>(offspring)));
    for (std::size_t c = 0; c < crossovers; ++c) {
      const std::size_t a = tournament(fit, rng);
      const std::size_t b = tournament(fit, rng);
      Genome child = blend(pop[a], pop[b], rng);
      mutate(child, cfg.mutation_rate, rng);
      repair(child, rng);
      next.push_back(child);
    }
    while (next.size() < pop_size) {
      Genome child = pop[tournament(fit, rng)];
      if (!mutate(child, cfg.mutation_rate, rng)) child[uniform_index(rng, kFeatureCount)] = uniform01(rng);
      repair(child, rng);
      next.push_back(child);
    }
    pop = std::move(next);
  }

  result.lambda = WeightVector(best);
  result.alpha = best_alpha;
  result.trace.evaluations = fit_fn.evaluations();
  return result;
}

OptimizationResult optimize(const FeatureMatrix& fm, const LabelMap& labels, std::size_t k, const GaConfig& cfg,
                            const GenerationCallback& on_generation) {
  if (labels.size() != fm.rows()) throw InvalidInput("label map and feature matrix differ in pixel count");
  return optimize(fm, node_set_from_labels(labels), k, cfg, on_generation);
}

void write_trace_csv(std::ostream& out, const OptimizationTrace& trace) {
  out << "generation,best_alpha,mean_alpha,evaluations";
  for (auto name : feature_names()) out << ",lambda_" << name;
  out << '\n' << std::setprecision(17);
  for (const auto& g : trace.generations) {
    out << g.generation << ',' << g.best_alpha << ',' << g.mean_alpha << ',' << g.evaluations;
    for (double w : g.best_lambda.values()) out << ',' << w;
    out << '\n';
  }
}

}  // namespace pccseg
