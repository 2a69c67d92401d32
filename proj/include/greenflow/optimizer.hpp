#pragma once

#include <vector>

#include "greenflow/cell_config.hpp"
#include "greenflow/flow_level.hpp"
#include "greenflow/state_space.hpp"

namespace greenflow {

struct StateOptimum {
  PowerVector powers;  // unoccupied zones are left at p_min_w
  double efficiency_bits_per_joule = 0.0;
};

struct OptimizationResult {
  PowerPolicy policy;
  double objective = 0.0;  // global efficiency of `policy`, bits/joule
  double blocking_probability = 0.0;
  bool feasible = false;
  std::vector<double> trace;  // penalized objective after seeding and after every sweep
};

// Geometric grid from p_min_w to p_max_w, both ends included.
std::vector<double> power_grid(const CellConfig& config);

// eta - penalty * max(0, blocking - epsilon)
double penalized_objective(double eta, double blocking_probability, const CellConfig& config);

// Maximizes the efficiency of one state over the per-zone power box.
//
// Grid search followed by golden-section refinement around the best grid
// point; with several occupied zones the search starts from the best
// equal-power grid point and cycles over zones until the relative gain drops
// below the configured tolerance, then polishes with a Nelder-Mead simplex in
// log power (skipped when refine is off).
StateOptimum optimize_state(const CellState& state, const CellConfig& config);

// optimize_state for every nonempty state, ignoring traffic dynamics.
PowerPolicy local_policy(const CellConfig& config);

// Maximizes global efficiency subject to blocking <= epsilon.
//
// Cyclic coordinate ascent over (state, zone) powers on the penalized
// objective, with joint diagonal moves for pairs of zones sharing a state,
// started from the local policy and `multistart` random grid policies. The best feasible policy visited is returned; when none is
// feasible, the one with the highest penalized objective.
OptimizationResult optimize_policy(const CellConfig& config);
OptimizationResult optimize_policy(const CellConfig& config, const PowerPolicy& local);

struct PolicyScore {
  double eta = 0.0;
  double blocking_probability = 0.0;
  double penalized = 0.0;
  bool feasible = false;
};

PolicyScore score_policy(const PowerPolicy& policy, const CellConfig& config);

}  // namespace greenflow
