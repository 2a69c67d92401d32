#pragma once

#include <span>
#include <vector>

#include "greenflow/cell_config.hpp"
#include "greenflow/fixed_point.hpp"
#include "greenflow/state_space.hpp"

namespace greenflow {

// A power vector for every state of the space, indexed like StateSpace.
// The entry of the empty state is kept but never used.
class PowerPolicy {
 public:
  PowerPolicy(int zones, int n_max, double initial_power_w);

  // Every zone of every state at the same power.
  static PowerPolicy uniform(const CellConfig& config, double power_w);

  int zones() const { return zones_; }
  int n_max() const { return n_max_; }
  std::size_t size() const { return powers_.size(); }

  const PowerVector& at(std::size_t index) const { return powers_.at(index); }
  PowerVector& at(std::size_t index) { return powers_.at(index); }
  const PowerVector& at(const CellState& state) const;
  void set(const CellState& state, PowerVector powers);

  // Throws ConfigError when a nonempty state is missing, has the wrong width,
  // or uses an out-of-bounds power on an occupied zone.
  void validate(double p_min_w, double p_max_w) const;

  friend bool operator==(const PowerPolicy&, const PowerPolicy&) = default;

 private:
  int zones_;
  int n_max_;
  std::vector<PowerVector> powers_;
};

struct StateEvaluation {
  FixedPointSolution solution;  // empty for the empty state
  StateMetrics metrics;         // zero throughput, b watts for the empty state
  std::vector<double> departure_rate_bps;  // per zone N_c * phi_c * R_a:c
};

StateEvaluation evaluate_state(const CellState& state, const PowerVector& powers, const CellConfig& config);

// Per-state fixed points and metrics for a whole policy, indexed like StateSpace.
std::vector<StateEvaluation> evaluate_policy(const PowerPolicy& policy, const CellConfig& config);

struct StationaryDistribution {
  std::vector<double> pi;       // aligned with StateSpace
  double gamma = 1.0;           // normalizing constant, unnormalized weight of the empty state is 1
  double log_gamma = 0.0;
  double blocking_probability = 0.0;
  double blocked_arrival_rate = 0.0;  // arrivals/second
};

StationaryDistribution stationary_distribution(const StateSpace& space, std::span<const StateEvaluation> states,
                                               const CellConfig& config);
StationaryDistribution stationary_distribution(const StateSpace& space, std::span<const StateEvaluation> states,
                                               const CellConfig& config, StationaryMethod method);
StationaryDistribution stationary_distribution(const PowerPolicy& policy, const CellConfig& config);

struct Blocking {
  double probability = 0.0;
  double rate_per_s = 0.0;
};

// Probability mass of the full states and (sum_i lambda_i) times it.
Blocking blocking(const StateSpace& space, std::span<const double> pi, std::span<const ZoneConfig> zones);
Blocking blocking(const StationaryDistribution& dist, int n_max, std::span<const ZoneConfig> zones);

inline bool meets_qos(double blocking_probability, const FlowParams& flow) {
  return blocking_probability <= flow.epsilon;
}

// sum over nonempty states of pi(s) * eta_s.
double global_efficiency(std::span<const double> pi, std::span<const StateEvaluation> states);
double global_efficiency(const PowerPolicy& policy, const CellConfig& config);

}  // namespace greenflow
