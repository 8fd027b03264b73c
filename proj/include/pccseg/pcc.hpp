#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "json.hpp"
#include "pccseg/features.hpp"
#include "pccseg/graph.hpp"
#include "pccseg/rng.hpp"

namespace pccseg {

struct PccParams {
  double delta_v = 0.1;         // domination change rate
  double stop_threshold = 0.9;  // phase-1 finalization level
  std::size_t check_interval = 100;
  std::size_t stabilization_window = 10;
  double stabilization_epsilon = 1e-3;
  std::size_t max_rounds = 20000;
  double phase2_epsilon = 1e-4;
  std::size_t phase2_max_sweeps = 1000;
  std::uint64_t rng_seed = 0;
  /// Phase-2 neighbors weighted by raw feature distance instead of 1/(1+distance).
  bool literal_phase2_weights = false;

  /// Throws ConfigError.
  void validate(int class_count = 2) const;
  void merge_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;
};

struct Particle {
  int cls = 0;
  std::uint32_t home = 0;
  std::uint32_t current = 0;
  std::uint32_t previous = 0;
  double strength = 1.0;
};

/// Domination levels, team distance tables and particles over one graph.
/// The graph must outlive the state.
class PccState {
 public:
  /// One particle per labeled node; throws InvalidInput if a class has no labeled node.
  explicit PccState(const PixelGraph& graph);

  const PixelGraph& graph() const { return *graph_; }
  int class_count() const { return classes_; }
  std::size_t node_count() const { return graph_->node_count(); }
  bool is_labeled(std::size_t node) const { return graph_->is_labeled(node); }

  std::span<const double> domination(std::size_t node) const {
    return {domination_.data() + node * classes_, static_cast<std::size_t>(classes_)};
  }
  std::span<double> domination(std::size_t node) {
    return {domination_.data() + node * classes_, static_cast<std::size_t>(classes_)};
  }

  std::uint32_t distance(int cls, std::size_t node) const { return distance_[cls * node_count() + node]; }
  std::uint32_t& distance(int cls, std::size_t node) { return distance_[cls * node_count() + node]; }

  std::vector<Particle>& particles() { return particles_; }
  const std::vector<Particle>& particles() const { return particles_; }

  /// Mean over unlabeled nodes of the largest domination level (1 when every node is labeled).
  double mean_max_domination() const;
  /// Fraction of unlabeled nodes whose largest level exceeds `threshold`.
  double fraction_above(double threshold) const;

 private:
  const PixelGraph* graph_;
  int classes_;
  std::vector<double> domination_;
  std::vector<std::uint32_t> distance_;
  std::vector<Particle> particles_;
};

/// Domination update for a visit by a particle of class `cls` with the given strength:
/// each rival level drops by min(level, delta_v * strength / (C - 1)); the particle's class gains the total removed.
void apply_visit(std::span<double> domination, int cls, double strength, double delta_v = 0.1);

/// Team distance relaxation: target = min(target, from + 1).
inline void relax_distance(std::uint32_t from, std::uint32_t& target) {
  if (from + 1 < target) target = from + 1;
}

/// Movement distribution over adj(particle.current): half uniform, half proportional to
/// v_i^c (1 + d_c^i)^-2. When every greedy weight is zero the greedy half is uniform as well.
void move_probabilities(const PccState& state, const Particle& particle, std::vector<double>& out);

/// Index into adj(particle.current) drawn from move_probabilities().
std::size_t sample_move(const PccState& state, const Particle& particle, Rng& rng);

/// One move: choose a neighbor, update its domination (unlabeled only), the particle strength and
/// the team distance table, then stay if the particle's class is the strict maximum there, else go back.
void step_particle(PccState& state, Particle& particle, Rng& rng, double delta_v = 0.1);

struct Progress {
  std::size_t round = 0;
  double mean_max_domination = 0.0;
  double fraction_finalized = 0.0;
};
/// Called at every stop-criterion check; return false to cancel.
using ProgressFn = std::function<bool(const Progress&)>;

struct Phase1Outcome {
  std::size_t rounds = 0;
  bool converged = false;
  bool cancelled = false;
  std::vector<double> check_history;   // mean max domination at each check
  std::vector<std::int8_t> node_label;  // class, or kNoClass when left to phase 2
  std::size_t finalized_unlabeled = 0;
};

Phase1Outcome run_phase1(PccState& state, const PccParams& params, Rng& rng, const ProgressFn& progress = {});

/// Node finalization after phase 1: labeled nodes keep their class, others take the class whose level
/// exceeds the threshold.
Phase1Outcome finalize_nodes(const PccState& state, double threshold);

struct Phase2Outcome {
  std::size_t sweeps = 0;
  std::size_t free_pixels = 0;
  std::vector<std::uint8_t> pixel_class;  // per pixel of the feature grid
};

/// Neighborhood averaging over the 8-connected pixel grid for pixels left unlabeled by phase 1.
/// Pixels outside the graph are fixed background.
Phase2Outcome run_phase2(const PccState& state, const Phase1Outcome& phase1, const FeatureMatrix& fm,
                         const WeightVector& lambda, const PccParams& params);

}  // namespace pccseg
