#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "pccseg/features.hpp"
#include "pccseg/graph.hpp"
#include "pccseg/netindex.hpp"

namespace pccseg {

/// Real-coded genetic algorithm settings. Genes live in [0, 1].
struct GaConfig {
  std::size_t population_size = 200;
  std::size_t max_generations = 200;
  double crossover_fraction = 0.8;
  std::size_t elite_count = 2;
  double mutation_rate = 1.0 / kFeatureCount;
  std::size_t stall_generations = 50;
  std::uint64_t rng_seed = 0;
  double early_stop_alpha = 1.0 - 1e-9;

  /// Throws ConfigError.
  void validate() const;

  /// Overrides the fields present in `j` (unknown keys are rejected).
  void merge_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;
};

enum class StopReason { kTargetReached, kStalled, kMaxGenerations, kCancelled };
std::string_view stop_reason_name(StopReason r);

struct GenerationRecord {
  std::size_t generation = 0;
  double best_alpha = 0.0;
  double mean_alpha = 0.0;
  WeightVector best_lambda;
  std::size_t evaluations = 0;  // cumulative graph evaluations (cache misses)
};

struct OptimizationTrace {
  std::vector<GenerationRecord> generations;
  std::size_t evaluations = 0;
  StopReason stop_reason = StopReason::kMaxGenerations;
};

struct OptimizationResult {
  WeightVector lambda;
  double alpha = 0.0;
  double baseline_phi = 1.0;
  double sigma = 1.0;
  std::size_t k = 0;
  OptimizationTrace trace;

  nlohmann::ordered_json to_json(const GaConfig& cfg) const;
};

/// Reference route: builds the full candidate graph and returns its alpha.
double fitness(const WeightVector& lambda, const FeatureMatrix& fm, const NodeSet& nodes, std::size_t k,
               double baseline_phi);
double fitness(const WeightVector& lambda, const FeatureMatrix& fm, const LabelMap& labels, std::size_t k,
               double baseline_phi);

/// Phi of the unweighted graph.
double baseline_phi(const FeatureMatrix& fm, const NodeSet& nodes, std::size_t k);

/// Memoized alpha evaluation. Only the neighbor lists of labeled nodes are computed,
/// which yields the same labeled-labeled edge set as the full graph.
class FitnessFunction {
 public:
  FitnessFunction(const FeatureMatrix& fm, NodeSet nodes, std::size_t k);

  double baseline_phi() const { return baseline_phi_; }
  double sigma() const { return sigma_; }
  std::size_t k() const { return k_; }
  std::size_t evaluations() const { return evaluations_; }

  double operator()(const WeightVector& lambda);
  IndexReport report(const WeightVector& lambda) const;

 private:
  NodeSet nodes_;
  std::size_t k_;
  NodeColumns columns_;
  double baseline_phi_ = 1.0;
  double sigma_ = 1.0;
  std::size_t evaluations_ = 0;
  std::map<std::array<std::uint64_t, kFeatureCount>, double> memo_;
};

/// Return false to stop the search after the current generation.
using GenerationCallback = std::function<bool(const GenerationRecord&)>;

OptimizationResult optimize(const FeatureMatrix& fm, const NodeSet& nodes, std::size_t k, const GaConfig& cfg,
                            const GenerationCallback& on_generation = {});
OptimizationResult optimize(const FeatureMatrix& fm, const LabelMap& labels, std::size_t k, const GaConfig& cfg,
                            const GenerationCallback& on_generation = {});

/// generation,best_alpha,mean_alpha,evaluations,<23 best-lambda columns>
void write_trace_csv(std::ostream& out, const OptimizationTrace& trace);

}  // namespace pccseg
