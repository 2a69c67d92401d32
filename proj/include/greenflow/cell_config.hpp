#pragma once

#include <cstdint>
#include <vector>

#include "greenflow/fixed_point.hpp"
#include "greenflow/rate_model.hpp"

namespace greenflow {

struct FlowParams {
  double file_bits = 8e6;  // mean flow size S
  double epsilon = 0.01;   // maximum tolerable blocking probability

  void validate() const;
};

// How the stationary distribution of the flow-level chain is obtained.
enum class StationaryMethod {
  kBalance,      // global balance equations of the chain, solved numerically
  kProductForm,  // closed product form with coordinate substitution
};

struct OptimizerConfig {
  int points_per_decade = 8;
  bool refine = true;            // golden-section refinement around the best grid point
  double tolerance = 1e-6;       // relative objective improvement that ends the ascent
  int max_sweeps = 50;
  int multistart = 2;            // random seeds on top of the local policy
  std::uint64_t seed = 1;
  double penalty = 1e15;         // bits/joule per unit of excess blocking probability

  void validate() const;
};

struct CellConfig {
  std::vector<ZoneConfig> zones;
  TrafficParams traffic;
  FlowParams flow;
  double b_w = 0.1;
  int n_max = 4;
  double p_min_w = 1e-4;
  double p_max_w = 10.0;
  RateCurve curve;
  OptimizerConfig optimizer;
  StationaryMethod stationary_method = StationaryMethod::kBalance;
  SolverOptions solver;

  int zone_count() const { return static_cast<int>(zones.size()); }
  // Omega_c = S * lambda_c, bits/second.
  double offered_traffic(std::size_t zone) const { return flow.file_bits * zones.at(zone).lambda_per_s; }

  void validate() const;
};

}  // namespace greenflow
