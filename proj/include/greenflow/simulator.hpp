#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "greenflow/cell_config.hpp"
#include "greenflow/flow_level.hpp"

namespace greenflow {

struct SimConfig {
  double horizon_s = 1e4;
  double warmup_s = 0.0;
  std::uint64_t seed = 1;
  int replications = 1;

  void validate() const;
};

struct ReplicationStats {
  std::vector<double> occupancy;  // time fraction per state after warmup
  double blocking = 0.0;          // blocked / offered after warmup
  double eta = 0.0;               // sum_s occupancy(s) * eta_s
  std::uint64_t offered = 0;      // counters below cover the whole run
  std::uint64_t blocked = 0;
  std::uint64_t accepted = 0;
  std::uint64_t departed = 0;
  std::uint64_t in_system_at_end = 0;
  std::uint64_t events = 0;

  friend bool operator==(const ReplicationStats&, const ReplicationStats&) = default;
};

struct SimResult {
  std::vector<double> empirical_pi;
  std::vector<double> pi_stderr;
  double empirical_blocking = 0.0;
  double blocking_stderr = 0.0;
  double empirical_eta = 0.0;
  double eta_stderr = 0.0;
  std::vector<ReplicationStats> replications;

  friend bool operator==(const SimResult&, const SimResult&) = default;
};

// Discrete-event simulation of the flow-level chain under a fixed policy.
//
// Poisson arrivals per zone; arrivals finding N_max users are blocked. In
// state s each zone-c user leaves at rate phi_c(s) R_a:c(s) / S. Replication
// r uses an RNG seeded with seed + r, so results are reproducible.
// Replications run in parallel; `trace` (CSV `time,event,zone,state_after`)
// forces a single thread and records every event.
SimResult simulate(const PowerPolicy& policy, const CellConfig& config, const SimConfig& sim,
                   std::ostream* trace = nullptr);

double total_variation(const std::vector<double>& p, const std::vector<double>& q);

}  // namespace greenflow
