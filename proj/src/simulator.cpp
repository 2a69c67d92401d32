#include "greenflow/simulator.hpp"

#include <cmath>
#include <future>
#include <limits>
#include <ostream>
#include <random>

#include "greenflow/error.hpp"
#include "greenflow/state_space.hpp"

namespace greenflow {

void SimConfig::validate() const {
  if (!(warmup_s >= 0.0) || !std::isfinite(warmup_s)) throw ConfigError("simulation warmup must be >= 0");
  if (!(horizon_s > warmup_s) || !std::isfinite(horizon_s)) {
    throw ConfigError("simulation horizon must exceed the warmup");
  }
  if (replications < 1) throw ConfigError("simulation needs at least one replication");
}

namespace {

void write_event(std::ostream& out, double time, const char* event, std::size_t zone, const CellState& after) {
  out << time << ',' << event << ',' << zone + 1 << ",\"" << after.to_string() << "\"\n";
}

ReplicationStats run_replication(const StateSpace& space, const std::vector<StateEvaluation>& states,
                                 const CellConfig& config, const SimConfig& sim, std::uint64_t seed,
                                 std::ostream* trace) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto exponential = [&](double rate) {
    return -std::log1p(-unit(rng)) / rate;
  };
  const std::size_t m = config.zones.size();
  constexpr double kNever = std::numeric_limits<double>::infinity();

  // Arrival streams are independent of the state; departures are resampled
  // after every event, which is exact for exponential clocks.
  std::vector<double> next_arrival(m, kNever);
  for (std::size_t c = 0; c < m; ++c) {
    if (config.zones[c].lambda_per_s > 0.0) next_arrival[c] = exponential(config.zones[c].lambda_per_s);
  }

  ReplicationStats r;
  r.occupancy.assign(space.size(), 0.0);
  std::uint64_t offered_after = 0;
  std::uint64_t blocked_after = 0;
  CellState s{std::vector<int>(m, 0)};
  std::size_t index = 0;
  double now = 0.0;

  while (true) {
    const auto& dep = states[index].departure_rate_bps;
    double dep_total = 0.0;
    for (double d : dep) dep_total += d / config.flow.file_bits;

    std::size_t arrival_zone = 0;
    for (std::size_t c = 1; c < m; ++c) {
      if (next_arrival[c] < next_arrival[arrival_zone]) arrival_zone = c;
    }
    const double departure_at = dep_total > 0.0 ? now + exponential(dep_total) : kNever;
    const double arrival_at = next_arrival[arrival_zone];
    // Ties go to the arrival.
    const bool is_arrival = arrival_at <= departure_at;
    const double t_event = std::min(is_arrival ? arrival_at : departure_at, sim.horizon_s);

    if (t_event > sim.warmup_s) r.occupancy[index] += t_event - std::max(now, sim.warmup_s);
    now = t_event;
    if (now >= sim.horizon_s) break;
    ++r.events;

    if (is_arrival) {
      const auto c = arrival_zone;
      next_arrival[c] = now + exponential(config.zones[c].lambda_per_s);
      ++r.offered;
      const bool counted = now > sim.warmup_s;
      offered_after += counted;
      if (s.total() >= config.n_max) {
        ++r.blocked;
        blocked_after += counted;
        if (trace) write_event(*trace, now, "blocked", c, s);
        continue;
      }
      ++r.accepted;
      ++s.counts[c];
      if (trace) write_event(*trace, now, "arrival", c, s);
    } else {
      double pick = unit(rng) * dep_total;
      std::size_t c = 0;
      for (; c + 1 < m; ++c) {
        const double rate = dep[c] / config.flow.file_bits;
        if (pick < rate && s.counts[c] > 0) break;
        pick -= rate;
      }
      while (s.counts[c] == 0) --c;  // rounding at the last occupied zone
      ++r.departed;
      --s.counts[c];
      if (trace) write_event(*trace, now, "departure", c, s);
    }
    index = StateSpace::rank(s, config.n_max);
  }

  const double observed = sim.horizon_s - sim.warmup_s;
  for (double& o : r.occupancy) o /= observed;
  r.in_system_at_end = static_cast<std::uint64_t>(s.total());
  r.blocking = offered_after ? static_cast<double>(blocked_after) / static_cast<double>(offered_after) : 0.0;
  for (std::size_t i = 0; i < space.size(); ++i) r.eta += r.occupancy[i] * states[i].metrics.efficiency_bits_per_joule;
  return r;
}

// Mean and standard error of the mean across replications.
std::pair<double, double> mean_stderr(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  if (x.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

}  // namespace

SimResult simulate(const PowerPolicy& policy, const CellConfig& config, const SimConfig& sim, std::ostream* trace) {
  sim.validate();
  const StateSpace space(config.zone_count(), config.n_max);
  // Policy fixed points are needed for every state the chain may visit.
  const auto states = evaluate_policy(policy, config);

  SimResult result;
  if (trace) {
    *trace << "time,event,zone,state_after\n";
    for (int r = 0; r < sim.replications; ++r) {
      result.replications.push_back(
          run_replication(space, states, config, sim, sim.seed + static_cast<std::uint64_t>(r), trace));
    }
  } else {
    std::vector<std::future<ReplicationStats>> jobs;
    for (int r = 0; r < sim.replications; ++r) {
      jobs.push_back(std::async(std::launch::async, [&, r] {
        return run_replication(space, states, config, sim, sim.seed + static_cast<std::uint64_t>(r), nullptr);
      }));
    }
    for (auto& j : jobs) result.replications.push_back(j.get());
  }

  const auto& reps = result.replications;
  std::vector<double> column(reps.size());
  result.empirical_pi.resize(space.size());
  result.pi_stderr.resize(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    for (std::size_t r = 0; r < reps.size(); ++r) column[r] = reps[r].occupancy[i];
    std::tie(result.empirical_pi[i], result.pi_stderr[i]) = mean_stderr(column);
  }
  for (std::size_t r = 0; r < reps.size(); ++r) column[r] = reps[r].blocking;
  std::tie(result.empirical_blocking, result.blocking_stderr) = mean_stderr(column);
  for (std::size_t r = 0; r < reps.size(); ++r) column[r] = reps[r].eta;
  std::tie(result.empirical_eta, result.eta_stderr) = mean_stderr(column);
  return result;
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw Error("total_variation: size mismatch");
  double tv = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) tv += std::abs(p[i] - q[i]);
  return 0.5 * tv;
}

}  // namespace greenflow
