#include "greenflow/fixed_point.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "greenflow/error.hpp"

namespace greenflow {

namespace {

constexpr int kLogFactorialTable = 1024;

const std::array<double, kLogFactorialTable>& log_factorials() {
  static const auto table = [] {
    std::array<double, kLogFactorialTable> t{};
    for (int n = 1; n < kLogFactorialTable; ++n) t[n] = t[n - 1] + std::log(static_cast<double>(n));
    return t;
  }();
  return table;
}

double log_factorial(int n) {
  if (n < kLogFactorialTable) return log_factorials()[static_cast<std::size_t>(n)];
  return std::lgamma(static_cast<double>(n) + 1.0);
}

double log_choose(int n, int k) { return log_factorial(n) - log_factorial(k) - log_factorial(n - k); }

// Binomial(n, p) pmf; pow(0, 0) == 1 covers p = 0 and p = 1.
std::vector<double> binomial_pmf(int n, double p) {
  std::vector<double> pmf(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) {
    pmf[static_cast<std::size_t>(i)] = std::exp(log_choose(n, i)) * std::pow(p, i) * std::pow(1.0 - p, n - i);
  }
  return pmf;
}

// Visits every configuration (i_1, ..., i_M) with 0 <= i_k <= counts[k],
// passing its probability under independent per-user activity.
template <typename Visit>
void for_each_configuration(std::span<const int> counts, std::span<const double> phi, Visit&& visit) {
  const std::size_t m = counts.size();
  std::vector<std::vector<double>> pmf(m);
  for (std::size_t k = 0; k < m; ++k) pmf[k] = binomial_pmf(counts[k], phi[k]);
  std::vector<int> config(m, 0);
  while (true) {
    double weight = 1.0;
    for (std::size_t k = 0; k < m; ++k) weight *= pmf[k][static_cast<std::size_t>(config[k])];
    visit(std::span<const int>(config), weight);
    std::size_t k = m;
    while (k > 0) {
      --k;
      if (config[k] < counts[k]) {
        ++config[k];
        break;
      }
      config[k] = 0;
      if (k == 0) return;
    }
    if (m == 0) return;
  }
}

void check_sizes(std::size_t counts, std::size_t other, const char* what) {
  if (counts != other) {
    throw ConfigError(std::string(what) + " has " + std::to_string(other) + " entries, expected " +
                      std::to_string(counts));
  }
}

struct Evaluation {
  std::vector<double> r_active;
  std::vector<double> target;  // min(R_p / R_a, 1)
  double residual = 0.0;
};

Evaluation evaluate(std::span<const int> counts, std::span<const double> phi, std::span<const double> rates,
                    double packet_rate) {
  Evaluation e;
  e.r_active = contention_throughput(counts, phi, rates);
  e.target.assign(counts.size(), 0.0);
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (counts[j] == 0) continue;
    e.target[j] = std::min(packet_rate / e.r_active[j], 1.0);
    e.residual = std::max(e.residual, std::abs(phi[j] - e.target[j]));
  }
  return e;
}

FixedPointSolution finish(std::vector<double> phi, Evaluation e, bool converged, int iterations) {
  FixedPointSolution s;
  s.phi = std::move(phi);
  s.r_active = std::move(e.r_active);
  s.converged = converged;
  s.iterations = iterations;
  s.residual = e.residual;
  return s;
}

}  // namespace

void TrafficParams::validate() const {
  if (!(packet_bits > 0.0) || !std::isfinite(packet_bits)) throw ConfigError("packet_bits must be > 0");
  if (!(packet_period_s > 0.0) || !std::isfinite(packet_period_s)) {
    throw ConfigError("packet_period_s must be > 0");
  }
}

double activity_probability(double r_active, const TrafficParams& traffic) {
  if (!(r_active > 0.0)) throw StarvedZoneError("zone starved: active throughput is zero");
  return std::min(traffic.packet_rate() / r_active, 1.0);
}

std::vector<double> contention_throughput(std::span<const int> counts, std::span<const double> phi,
                                          std::span<const double> full_rates) {
  check_sizes(counts.size(), phi.size(), "activity vector");
  check_sizes(counts.size(), full_rates.size(), "rate vector");
  std::vector<double> out(counts.size(), 0.0);
  std::vector<int> others(counts.begin(), counts.end());
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (counts[j] == 0) continue;
    --others[j];
    double expected_share = 0.0;
    for_each_configuration(others, phi, [&](std::span<const int> config, double weight) {
      int active = 0;
      for (int i : config) active += i;
      expected_share += weight / static_cast<double>(active + 1);
    });
    ++others[j];
    out[j] = full_rates[j] * expected_share;
  }
  return out;
}

double expected_active_power(std::span<const int> counts, std::span<const double> phi,
                             std::span<const double> powers) {
  check_sizes(counts.size(), phi.size(), "activity vector");
  check_sizes(counts.size(), powers.size(), "power vector");
  double total = 0.0;
  for_each_configuration(counts, phi, [&](std::span<const int> config, double weight) {
    int active = 0;
    double power_sum = 0.0;
    for (std::size_t k = 0; k < config.size(); ++k) {
      active += config[k];
      power_sum += powers[k] * config[k];
    }
    if (active > 0) total += weight * power_sum / active;
  });
  return total;
}

FixedPointSolution solve_homogeneous(int n_users, double rho, const RateCurve& curve,
                                     const TrafficParams& traffic, const SolverOptions& options) {
  if (n_users < 1) throw Error("solve_homogeneous: no users");
  if (!(rho > 0.0)) throw StarvedZoneError("solve_homogeneous: zero SINR with users present");
  const double rate = curve.throughput(rho);
  if (!(rate > 0.0)) throw StarvedZoneError("solve_homogeneous: zero throughput with users present");
  const double n = n_users;
  const double packet_rate = traffic.packet_rate();

  const auto r_active = [&](double phi) {
    // sum_i C(N-1,i) phi^i (1-phi)^(N-1-i) / (i+1) == (1 - (1-phi)^N) / (N phi)
    return rate * -std::expm1(n * std::log1p(-phi)) / (n * phi);
  };
  const auto target = [&](double phi) { return std::min(packet_rate / r_active(phi), 1.0); };
  const auto done = [&](double phi, bool converged, int iterations) {
    FixedPointSolution s;
    s.phi = {phi};
    s.r_active = {r_active(phi)};
    s.converged = converged;
    s.iterations = iterations;
    s.residual = std::abs(phi - target(phi));
    return s;
  };

  double phi = 1.0;
  int it = 0;
  for (; it < std::min(options.picard_budget, options.max_iterations); ++it) {
    const double t = target(phi);
    if (std::abs(t - phi) <= options.tolerance) return done(phi, true, it);
    phi = (1.0 - options.damping) * phi + options.damping * t;
  }
  // phi * R_a(phi) is increasing in phi, so phi - target(phi) changes sign once.
  double lo = 0.0;
  double hi = 1.0;
  if (target(1.0) >= 1.0) return done(1.0, true, it);
  while (hi - lo > 1e-16 && it < options.max_iterations) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (mid - target(mid) < 0.0 ? lo : hi) = mid;
    ++it;
  }
  auto s = done(hi, true, it);
  if (s.residual > options.tolerance) {
    throw ConvergenceError("solve_homogeneous: no convergence for N=" + std::to_string(n_users), s.residual);
  }
  return s;
}

FixedPointSolution solve_with_rates(std::span<const int> counts, std::span<const double> full_rates,
                                    const TrafficParams& traffic, const SolverOptions& options) {
  check_sizes(counts.size(), full_rates.size(), "rate vector");
  std::vector<std::size_t> busy;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (counts[j] < 0) throw ConfigError("negative user count");
    if (counts[j] == 0) continue;
    if (!(full_rates[j] > 0.0)) {
      throw StarvedZoneError("zone " + std::to_string(j + 1) + " has users but zero throughput");
    }
    busy.push_back(j);
  }
  if (busy.empty()) throw Error("fixed point: no users");
  const double packet_rate = traffic.packet_rate();

  std::vector<double> phi(counts.size(), 0.0);
  for (auto j : busy) phi[j] = 1.0;

  // Damped Picard from the overload point.
  int it = 0;
  Evaluation e = evaluate(counts, phi, full_rates, packet_rate);
  const int picard = std::min(options.picard_budget, options.max_iterations);
  for (; it < picard; ++it) {
    if (e.residual <= options.tolerance) return finish(std::move(phi), std::move(e), true, it);
    for (auto j : busy) phi[j] = (1.0 - options.damping) * phi[j] + options.damping * e.target[j];
    e = evaluate(counts, phi, full_rates, packet_rate);
  }
  if (e.residual <= options.tolerance) return finish(std::move(phi), std::move(e), true, it);

  if (busy.size() == 1) {
    // Bisection on the scalar residual phi - min(R_p / R_a(phi), 1).
    const auto j = busy.front();
    auto at = [&](double x) {
      phi[j] = x;
      return evaluate(counts, phi, full_rates, packet_rate);
    };
    double lo = 0.0;
    double hi = 1.0;
    while (hi - lo > 1e-16 && it < options.max_iterations) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const auto m = at(mid);
      (mid - m.target[j] < 0.0 ? lo : hi) = mid;
      ++it;
    }
    e = at(hi);
  } else {
    // Safeguarded Newton on F(phi) = phi - target(phi) over the busy zones.
    const auto dim = static_cast<Eigen::Index>(busy.size());
    while (e.residual > options.tolerance && it < options.max_iterations) {
      Eigen::VectorXd f(dim);
      for (Eigen::Index a = 0; a < dim; ++a) f[a] = phi[busy[a]] - e.target[busy[a]];
      Eigen::MatrixXd jac(dim, dim);
      for (Eigen::Index b = 0; b < dim; ++b) {
        auto probe = phi;
        const double h = phi[busy[b]] > 0.5 ? -1e-7 : 1e-7;
        probe[busy[b]] += h;
        const auto pe = evaluate(counts, probe, full_rates, packet_rate);
        for (Eigen::Index a = 0; a < dim; ++a) {
          const double fa = probe[busy[a]] - pe.target[busy[a]];
          jac(a, b) = (fa - f[a]) / h;
        }
      }
      const Eigen::VectorXd step = jac.fullPivLu().solve(-f);
      double scale = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 40; ++ls, scale *= 0.5) {
        auto trial = phi;
        for (Eigen::Index a = 0; a < dim; ++a) {
          trial[busy[a]] = std::clamp(phi[busy[a]] + scale * step[a], 1e-300, 1.0);
        }
        auto te = evaluate(counts, trial, full_rates, packet_rate);
        if (te.residual < e.residual) {
          phi = std::move(trial);
          e = std::move(te);
          moved = true;
          break;
        }
      }
      ++it;
      if (!moved) {
        // Newton stalled: fall back to a plain damped Picard step.
        for (auto j : busy) phi[j] = (1.0 - options.damping) * phi[j] + options.damping * e.target[j];
        e = evaluate(counts, phi, full_rates, packet_rate);
      }
    }
  }
  if (e.residual > options.tolerance) {
    throw ConvergenceError("fixed point did not converge after " + std::to_string(it) +
                               " iterations (residual " + std::to_string(e.residual) + ")",
                           e.residual);
  }
  return finish(std::move(phi), std::move(e), true, it);
}

FixedPointSolution solve_heterogeneous(const CellState& state, std::span<const double> powers,
                                       std::span<const ZoneConfig> zones, const RateCurve& curve,
                                       const TrafficParams& traffic, const SolverOptions& options) {
  check_sizes(state.zones(), powers.size(), "power vector");
  check_sizes(state.zones(), zones.size(), "zone list");
  if (state.empty()) throw Error("fixed point: no users");
  std::vector<double> rates(state.zones(), 0.0);
  for (std::size_t j = 0; j < state.zones(); ++j) {
    if (state.counts[j] == 0) continue;
    if (!(powers[j] > 0.0)) {
      throw StarvedZoneError("zone " + std::to_string(j + 1) + " has users but zero power");
    }
    rates[j] = curve.throughput(sinr(powers[j], zones[j].sigma2_w));
  }
  try {
    return solve_with_rates(state.counts, rates, traffic, options);
  } catch (const ConvergenceError& e) {
    throw ConvergenceError("state {" + state.to_string() + "}: " + e.what(), e.residual());
  }
}

double state_power(const CellState& state, std::span<const double> powers, const FixedPointSolution& solution,
                   double b_w) {
  if (state.empty()) return b_w;
  return b_w + expected_active_power(state.counts, solution.phi, powers);
}

StateMetrics metrics_from_solution(const CellState& state, std::span<const double> powers,
                                   const FixedPointSolution& solution, double b_w) {
  StateMetrics m;
  for (std::size_t j = 0; j < state.zones(); ++j) {
    m.total_throughput_bps += state.counts[j] * solution.phi[j] * solution.r_active[j];
  }
  m.total_power_w = state_power(state, powers, solution, b_w);
  m.efficiency_bits_per_joule = m.total_throughput_bps / m.total_power_w;
  return m;
}

StateMetrics state_metrics(const CellState& state, std::span<const double> powers,
                           std::span<const ZoneConfig> zones, const RateCurve& curve,
                           const TrafficParams& traffic, double b_w, const SolverOptions& options) {
  const auto solution = solve_heterogeneous(state, powers, zones, curve, traffic, options);
  return metrics_from_solution(state, powers, solution, b_w);
}

}  // namespace greenflow
