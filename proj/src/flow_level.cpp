#include "greenflow/flow_level.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "greenflow/error.hpp"

namespace greenflow {

PowerPolicy::PowerPolicy(int zones, int n_max, double initial_power_w)
    : zones_(zones),
      n_max_(n_max),
      powers_(StateSpace::count(zones, n_max), PowerVector(static_cast<std::size_t>(zones), initial_power_w)) {}

PowerPolicy PowerPolicy::uniform(const CellConfig& config, double power_w) {
  return PowerPolicy(config.zone_count(), config.n_max, power_w);
}

namespace {

std::size_t checked_rank(const CellState& state, int zones, int n_max) {
  bool ok = state.zones() == static_cast<std::size_t>(zones) && state.total() <= n_max;
  for (int c : state.counts) ok = ok && c >= 0;
  if (!ok) throw ConfigError("state {" + state.to_string() + "} is outside the policy's state space");
  return StateSpace::rank(state, n_max);
}

}  // namespace

const PowerVector& PowerPolicy::at(const CellState& state) const {
  return powers_.at(checked_rank(state, zones_, n_max_));
}

void PowerPolicy::set(const CellState& state, PowerVector powers) {
  if (powers.size() != static_cast<std::size_t>(zones_)) {
    throw ConfigError("policy entry for {" + state.to_string() + "} has the wrong number of zones");
  }
  powers_.at(checked_rank(state, zones_, n_max_)) = std::move(powers);
}

void PowerPolicy::validate(double p_min_w, double p_max_w) const {
  if (powers_.size() != StateSpace::count(zones_, n_max_)) throw ConfigError("policy does not cover the state space");
  const StateSpace space(zones_, n_max_);
  for (std::size_t i = 1; i < powers_.size(); ++i) {
    const auto& p = powers_[i];
    if (p.size() != static_cast<std::size_t>(zones_)) {
      throw ConfigError("policy entry for {" + space.state(i).to_string() + "} has the wrong number of zones");
    }
    for (std::size_t z = 0; z < p.size(); ++z) {
      if (space.state(i).counts[z] == 0) continue;
      if (!std::isfinite(p[z]) || p[z] < p_min_w || p[z] > p_max_w) {
        throw ConfigError("policy power " + std::to_string(p[z]) + " W for zone " + std::to_string(z + 1) +
                          " in state {" + space.state(i).to_string() + "} is outside [p_min_w, p_max_w]");
      }
    }
  }
}

StateEvaluation evaluate_state(const CellState& state, const PowerVector& powers, const CellConfig& config) {
  StateEvaluation e;
  e.departure_rate_bps.assign(state.zones(), 0.0);
  if (state.empty()) {
    e.metrics.total_power_w = config.b_w;
    return e;
  }
  e.solution = solve_heterogeneous(state, powers, config.zones, config.curve, config.traffic, config.solver);
  e.metrics = metrics_from_solution(state, powers, e.solution, config.b_w);
  for (std::size_t c = 0; c < state.zones(); ++c) {
    e.departure_rate_bps[c] = state.counts[c] * e.solution.phi[c] * e.solution.r_active[c];
  }
  return e;
}

std::vector<StateEvaluation> evaluate_policy(const PowerPolicy& policy, const CellConfig& config) {
  const StateSpace space(config.zone_count(), config.n_max);
  if (policy.zones() != space.zones() || policy.n_max() != space.n_max()) {
    throw ConfigError("policy shape does not match the configured state space");
  }
  std::vector<StateEvaluation> out;
  out.reserve(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) out.push_back(evaluate_state(space.state(i), policy.at(i), config));
  return out;
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

StationaryDistribution normalize_log_weights(const std::vector<double>& log_w) {
  const double top = *std::max_element(log_w.begin(), log_w.end());
  double sum = 0.0;
  for (double lw : log_w) sum += std::exp(lw - top);
  StationaryDistribution d;
  d.log_gamma = top + std::log(sum);
  d.gamma = std::exp(d.log_gamma);
  d.pi.resize(log_w.size());
  for (std::size_t i = 0; i < log_w.size(); ++i) d.pi[i] = std::exp(log_w[i] - d.log_gamma);
  return d;
}

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

StationaryDistribution product_form(const StateSpace& space, std::span<const StateEvaluation> states,
                                    const CellConfig& config) {
  std::vector<double> log_w(space.size(), 0.0);
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto& s = space.state(i);
    double lw = log_factorial(s.total());
    for (int n : s.counts) lw -= log_factorial(n);
    for (std::size_t c = 0; c < s.zones() && lw > kNegInf; ++c) {
      const int n_c = s.counts[c];
      if (n_c == 0) continue;
      const double omega = config.offered_traffic(c);
      if (omega <= 0.0) {
        lw = kNegInf;
        break;
      }
      lw += n_c * std::log(omega);
      // s(N_c = j): coordinate c replaced by j, other coordinates unchanged.
      CellState sub = s;
      for (int j = 1; j <= n_c; ++j) {
        sub.counts[c] = j;
        lw -= std::log(states[StateSpace::rank(sub, space.n_max())].departure_rate_bps[c]);
      }
    }
    log_w[i] = lw;
  }
  return normalize_log_weights(log_w);
}

StationaryDistribution balance_equations(const StateSpace& space, std::span<const StateEvaluation> states,
                                         const CellConfig& config) {
  const auto n = static_cast<Eigen::Index>(space.size());
  std::vector<Eigen::Triplet<double>> entries;
  // Columns of Q^T: outflow from state i. Row 0 is replaced by sum(pi) = 1.
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = space.state(static_cast<std::size_t>(i));
    double out = 0.0;
    for (const auto& t : neighbors(s, space.n_max())) {
      const auto c = static_cast<std::size_t>(t.zone);
      const double rate = t.kind == Transition::Kind::kArrival
                              ? config.zones[c].lambda_per_s
                              : states[static_cast<std::size_t>(i)].departure_rate_bps[c] / config.flow.file_bits;
      if (rate <= 0.0) continue;
      out += rate;
      const auto j = static_cast<Eigen::Index>(StateSpace::rank(t.target, space.n_max()));
      if (j != 0) entries.emplace_back(j, i, rate);
    }
    if (i != 0) entries.emplace_back(i, i, -out);
    entries.emplace_back(0, i, 1.0);
  }
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(entries.begin(), entries.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw Error("balance equations: factorization failed");
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs[0] = 1.0;
  const Eigen::VectorXd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success) throw Error("balance equations: solve failed");

  StationaryDistribution d;
  d.pi.resize(space.size());
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    d.pi[static_cast<std::size_t>(i)] = std::max(x[i], 0.0);
    sum += d.pi[static_cast<std::size_t>(i)];
  }
  for (double& p : d.pi) p /= sum;
  d.log_gamma = -std::log(d.pi[0]);
  d.gamma = 1.0 / d.pi[0];
  return d;
}

}  // namespace

StationaryDistribution stationary_distribution(const StateSpace& space, std::span<const StateEvaluation> states,
                                               const CellConfig& config, StationaryMethod method) {
  if (states.size() != space.size()) throw ConfigError("state evaluations do not cover the state space");
  auto d = method == StationaryMethod::kBalance ? balance_equations(space, states, config)
                                                : product_form(space, states, config);
  const auto b = blocking(space, d.pi, config.zones);
  d.blocking_probability = b.probability;
  d.blocked_arrival_rate = b.rate_per_s;
  return d;
}

StationaryDistribution stationary_distribution(const StateSpace& space, std::span<const StateEvaluation> states,
                                               const CellConfig& config) {
  return stationary_distribution(space, states, config, config.stationary_method);
}

StationaryDistribution stationary_distribution(const PowerPolicy& policy, const CellConfig& config) {
  const StateSpace space(config.zone_count(), config.n_max);
  const auto states = evaluate_policy(policy, config);
  return stationary_distribution(space, states, config);
}

Blocking blocking(const StateSpace& space, std::span<const double> pi, std::span<const ZoneConfig> zones) {
  Blocking b;
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (space.state(i).total() == space.n_max()) b.probability += pi[i];
  }
  double lambda = 0.0;
  for (const auto& z : zones) lambda += z.lambda_per_s;
  b.rate_per_s = lambda * b.probability;
  return b;
}

Blocking blocking(const StationaryDistribution& dist, int n_max, std::span<const ZoneConfig> zones) {
  return blocking(StateSpace(static_cast<int>(zones.size()), n_max), dist.pi, zones);
}

double global_efficiency(std::span<const double> pi, std::span<const StateEvaluation> states) {
  double eta = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) eta += pi[i] * states[i].metrics.efficiency_bits_per_joule;
  return eta;
}

double global_efficiency(const PowerPolicy& policy, const CellConfig& config) {
  const StateSpace space(config.zone_count(), config.n_max);
  const auto states = evaluate_policy(policy, config);
  const auto d = stationary_distribution(space, states, config);
  return global_efficiency(d.pi, states);
}

}  // namespace greenflow
