#pragma once

#include <span>
#include <vector>

#include "greenflow/rate_model.hpp"
#include "greenflow/state_space.hpp"

namespace greenflow {

struct TrafficParams {
  double packet_bits = 12000.0;
  double packet_period_s = 6e-4;

  // R_p = S_p / T_P, bits/second demanded by each backlogged user.
  double packet_rate() const { return packet_bits / packet_period_s; }
  void validate() const;
};

// Per-zone transmit power in watts, one entry per zone.
using PowerVector = std::vector<double>;

struct FixedPointSolution {
  std::vector<double> phi;       // activity probability per zone (0 for empty zones)
  std::vector<double> r_active;  // throughput while active, bits/s (0 for empty zones)
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;  // max_j |phi_j - min(R_p / R_a:j, 1)|
};

struct StateMetrics {
  double total_throughput_bps = 0.0;
  double total_power_w = 0.0;
  double efficiency_bits_per_joule = 0.0;
};

struct SolverOptions {
  double damping = 0.5;
  double tolerance = 1e-9;
  int max_iterations = 10000;
  // Picard sweeps before switching to the accelerated fallback.
  int picard_budget = 2000;
};

// min(R_p / r_active, 1). Throws StarvedZoneError when r_active is zero.
double activity_probability(double r_active, const TrafficParams& traffic);

// Per-zone active throughput at a fixed activity vector.
//
// For zone j this is R(rho_j) * E[1 / (1 + K_j)], K_j being the number of
// active users among the other N(s) - 1 users, each user of zone k active
// independently with probability phi[k]. Evaluated by enumerating every
// activity configuration (i_1, ..., i_M). Empty zones get 0.
std::vector<double> contention_throughput(std::span<const int> counts, std::span<const double> phi,
                                          std::span<const double> full_rates);

// Expected power average over active users, sum over configurations with at
// least one active user of P(config) * (sum_j P_j i_j) / (sum_j i_j).
double expected_active_power(std::span<const int> counts, std::span<const double> phi,
                             std::span<const double> powers);

// Single-zone fixed point using the closed form
// R_a = R (1 - (1 - phi)^N) / (N phi).
FixedPointSolution solve_homogeneous(int n_users, double rho, const RateCurve& curve,
                                     const TrafficParams& traffic, const SolverOptions& options = {});

// Heterogeneous fixed point given the full-bandwidth rate of every zone.
FixedPointSolution solve_with_rates(std::span<const int> counts, std::span<const double> full_rates,
                                    const TrafficParams& traffic, const SolverOptions& options = {});

FixedPointSolution solve_heterogeneous(const CellState& state, std::span<const double> powers,
                                       std::span<const ZoneConfig> zones, const RateCurve& curve,
                                       const TrafficParams& traffic, const SolverOptions& options = {});

// b + expected_active_power(...). The empty state costs b.
double state_power(const CellState& state, std::span<const double> powers,
                   const FixedPointSolution& solution, double b_w);

StateMetrics metrics_from_solution(const CellState& state, std::span<const double> powers,
                                   const FixedPointSolution& solution, double b_w);

StateMetrics state_metrics(const CellState& state, std::span<const double> powers,
                           std::span<const ZoneConfig> zones, const RateCurve& curve,
                           const TrafficParams& traffic, double b_w, const SolverOptions& options = {});

}  // namespace greenflow
