#include "greenflow/fixed_point.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "greenflow/error.hpp"

namespace greenflow {
namespace {

// Rate of exactly 1e6 at any positive SINR.
RateCurve flat_curve(double rate = 1e6) { return RateCurve::table({{0.0, rate}}); }

TrafficParams traffic_with_rate(double packet_rate) { return {packet_rate * 1e-3, 1e-3}; }

// Exhaustive enumeration of the 2^N activity patterns of individual users.
struct BruteForce {
  std::vector<double> r_active;
  double active_power = 0.0;
};

BruteForce brute_force(const std::vector<int>& counts, const std::vector<double>& phi,
                       const std::vector<double>& rates, const std::vector<double>& powers) {
  std::vector<std::size_t> zone_of;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    for (int u = 0; u < counts[j]; ++u) zone_of.push_back(j);
  }
  const std::size_t n = zone_of.size();
  BruteForce out;
  out.r_active.assign(counts.size(), 0.0);
  // Expected share of the first user of each zone, conditioned on being active.
  std::vector<double> share(counts.size(), 0.0);
  for (std::uint64_t mask = 0; mask < (1ull << n); ++mask) {
    double prob = 1.0;
    int active = 0;
    double psum = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
      const bool on = (mask >> u) & 1u;
      prob *= on ? phi[zone_of[u]] : 1.0 - phi[zone_of[u]];
      if (on) {
        ++active;
        psum += powers[zone_of[u]];
      }
    }
    if (active > 0) out.active_power += prob * psum / active;
    for (std::size_t j = 0; j < counts.size(); ++j) {
      if (counts[j] == 0) continue;
      std::size_t first = 0;
      while (zone_of[first] != j) ++first;
      if (!((mask >> first) & 1u)) continue;
      // prob / phi_j is the probability of the other users' pattern.
      share[j] += prob / phi[j] / active;
    }
  }
  for (std::size_t j = 0; j < counts.size(); ++j) out.r_active[j] = rates[j] * share[j];
  return out;
}

TEST(ActivityProbability, Examples) {
  EXPECT_DOUBLE_EQ(activity_probability(1e6, traffic_with_rate(3e5)), 0.3);
  EXPECT_DOUBLE_EQ(activity_probability(1e6, traffic_with_rate(1e6)), 1.0);
  EXPECT_DOUBLE_EQ(activity_probability(1e6, traffic_with_rate(2e6)), 1.0);
  EXPECT_THROW(activity_probability(0.0, traffic_with_rate(1e5)), StarvedZoneError);
}

TEST(Homogeneous, SingleUser) {
  const auto s = solve_homogeneous(1, 1.0, flat_curve(), traffic_with_rate(3e5));
  EXPECT_NEAR(s.phi[0], 0.3, 1e-9);
  EXPECT_NEAR(s.r_active[0], 1e6, 1e-3);
}

TEST(Homogeneous, TwoUsersQuadraticOracle) {
  // phi (2 - phi) = 0.6
  const double phi = 1.0 - std::sqrt(0.4);
  EXPECT_NEAR(phi, 0.3675444679663241, 1e-15);
  const auto s = solve_homogeneous(2, 1.0, flat_curve(), traffic_with_rate(3e5));
  EXPECT_NEAR(s.phi[0], phi, 1e-9);
  EXPECT_NEAR(s.r_active[0], 816227.766, 1e-2);
  EXPECT_LE(s.residual, 1e-9);
}

TEST(Homogeneous, FourUsersClosedForm) {
  // (1 - phi)^4 = 1 - 4 R_p / R
  SolverOptions tight;
  tight.tolerance = 1e-13;
  const auto s = solve_homogeneous(4, 1.0, flat_curve(), traffic_with_rate(2e5), tight);
  EXPECT_NEAR(s.phi[0], 1.0 - std::pow(0.2, 0.25), 1e-12);
  // the default tolerance bounds the residual, not the error in phi
  const auto d = solve_homogeneous(4, 1.0, flat_curve(), traffic_with_rate(2e5));
  EXPECT_NEAR(d.phi[0], 1.0 - std::pow(0.2, 0.25), 1e-8);
}

TEST(Homogeneous, Overload) {
  const auto s = solve_homogeneous(4, 1.0, flat_curve(), traffic_with_rate(1e6));
  EXPECT_EQ(s.phi[0], 1.0);
  EXPECT_DOUBLE_EQ(s.r_active[0], 0.25e6);
}

TEST(Homogeneous, Errors) {
  EXPECT_THROW(solve_homogeneous(0, 1.0, flat_curve(), traffic_with_rate(1e5)), Error);
  EXPECT_THROW(solve_homogeneous(1, 0.0, flat_curve(), traffic_with_rate(1e5)), StarvedZoneError);
}

// Property: at M = 1 the enumeration equals R (1 - (1-phi)^N) / (N phi).
TEST(ContentionProperty, BinomialIdentity) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(1e-6, 1.0);
  for (int n = 1; n <= 8; ++n) {
    for (int k = 0; k < 20; ++k) {
      const double phi = u(rng);
      const int counts[] = {n};
      const double phis[] = {phi};
      const double rates[] = {3.7e6};
      const double got = contention_throughput(counts, phis, rates)[0];
      const double expected = 3.7e6 * -std::expm1(n * std::log1p(-phi)) / (n * phi);
      EXPECT_NEAR(got, expected, 1e-12 * expected) << "N=" << n << " phi=" << phi;
    }
  }
}

// Property: multinomial sums equal exhaustive per-user enumeration.
TEST(ContentionProperty, MatchesBruteForce) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int n1 = 0; n1 <= 6; ++n1) {
    for (int n2 = 0; n1 + n2 <= 6; ++n2) {
      if (n1 + n2 == 0) continue;
      const std::vector<int> counts{n1, n2};
      const std::vector<double> phi{u(rng), u(rng)};
      const std::vector<double> rates{2e6, 5e6};
      const std::vector<double> powers{0.3, 1.7};
      const auto bf = brute_force(counts, phi, rates, powers);
      const auto ra = contention_throughput(counts, phi, rates);
      for (std::size_t j = 0; j < 2; ++j) {
        if (counts[j] == 0) continue;
        EXPECT_NEAR(ra[j], bf.r_active[j], 1e-12 * bf.r_active[j]);
      }
      EXPECT_NEAR(expected_active_power(counts, phi, powers), bf.active_power, 1e-12 * bf.active_power);
    }
  }
}

// Property: more activity elsewhere never raises a user's active throughput.
TEST(ContentionProperty, MonotoneInActivity) {
  const int counts[] = {2, 3};
  const double rates[] = {1e6, 4e6};
  double prev = INFINITY;
  for (double p = 0.05; p <= 1.0; p += 0.05) {
    const double phis[] = {0.5, p};
    const double r = contention_throughput(counts, phis, rates)[0];
    EXPECT_LE(r, prev);
    prev = r;
  }
}

TEST(Heterogeneous, SingleZoneReduction) {
  const RateCurve curve;
  const TrafficParams traffic;
  const ZoneConfig zones[] = {{1e-3, 1.0, ""}};
  for (int n = 1; n <= 6; ++n) {
    for (double p : {1e-3, 1e-2, 0.1}) {
      const double powers[] = {p};
      const auto het = solve_heterogeneous(CellState{{n}}, powers, zones, curve, traffic);
      const auto hom = solve_homogeneous(n, p / 1e-3, curve, traffic);
      EXPECT_NEAR(het.phi[0], hom.phi[0], 1e-9) << n << " " << p;
      EXPECT_NEAR(het.r_active[0], hom.r_active[0], 1e-9 * hom.r_active[0]);
    }
  }
}

TEST(Heterogeneous, SymmetricZones) {
  const ZoneConfig zones[] = {{1e-3, 1.0, ""}, {1e-3, 1.0, ""}};
  const double powers[] = {0.01, 0.01};
  const auto s = solve_heterogeneous(CellState{{2, 2}}, powers, zones, RateCurve(), TrafficParams());
  EXPECT_NEAR(s.phi[0], s.phi[1], 1e-9);
  EXPECT_NEAR(s.r_active[0], s.r_active[1], 1e-6);
}

TEST(Heterogeneous, AllOverloaded) {
  const int counts[] = {2, 3};
  const double rates[] = {1e6, 4e6};
  const auto s = solve_with_rates(counts, rates, traffic_with_rate(1e9));
  EXPECT_EQ(s.phi[0], 1.0);
  EXPECT_EQ(s.phi[1], 1.0);
  EXPECT_DOUBLE_EQ(s.r_active[0], 1e6 / 5);
  EXPECT_DOUBLE_EQ(s.r_active[1], 4e6 / 5);
}

// Property: swapping zones swaps the solution.
TEST(HeterogeneousProperty, PermutationSymmetry) {
  const ZoneConfig a{1e-3, 1.0, ""};
  const ZoneConfig b{3e-4, 2.0, ""};
  const ZoneConfig zs[] = {a, b};
  const ZoneConfig swapped[] = {b, a};
  const double p[] = {0.004, 0.02};
  const double ps[] = {0.02, 0.004};
  const auto s = solve_heterogeneous(CellState{{2, 1}}, p, zs, RateCurve(), TrafficParams());
  const auto t = solve_heterogeneous(CellState{{1, 2}}, ps, swapped, RateCurve(), TrafficParams());
  EXPECT_NEAR(s.phi[0], t.phi[1], 1e-9);
  EXPECT_NEAR(s.phi[1], t.phi[0], 1e-9);
}

// Property: the returned point satisfies the fixed-point equation and phi is in (0, 1].
TEST(HeterogeneousProperty, ResidualAndRange) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> logp(-4.0, 0.0);
  const ZoneConfig zones[] = {{1e-3, 1.0, ""}, {1.25e-4, 1.0, ""}, {4e-3, 1.0, ""}};
  const TrafficParams traffic;
  const StateSpace space(3, 5);
  for (std::size_t i = 1; i < space.size(); ++i) {
    const auto& st = space.state(i);
    const double powers[] = {std::pow(10.0, logp(rng)), std::pow(10.0, logp(rng)), std::pow(10.0, logp(rng))};
    const auto s = solve_heterogeneous(st, powers, zones, RateCurve(), traffic);
    ASSERT_TRUE(s.converged);
    EXPECT_LE(s.residual, 1e-9);
    for (std::size_t j = 0; j < 3; ++j) {
      if (st.counts[j] == 0) {
        EXPECT_EQ(s.phi[j], 0.0);
        continue;
      }
      EXPECT_GT(s.phi[j], 0.0);
      EXPECT_LE(s.phi[j], 1.0);
      EXPECT_NEAR(s.phi[j], std::min(traffic.packet_rate() / s.r_active[j], 1.0), 1e-9);
    }
  }
}

TEST(Heterogeneous, NearCriticalLoadConverges) {
  // R_p just below the rate at which a single zone saturates
  const int counts[] = {3, 2};
  const double rates[] = {1e6, 1e6};
  const double critical = 1e6 / 5;
  for (double f : {0.9, 0.99, 0.999, 0.9999, 1.0001}) {
    const auto s = solve_with_rates(counts, rates, traffic_with_rate(f * critical));
    EXPECT_LE(s.residual, 1e-9) << f;
  }
}

TEST(Heterogeneous, Errors) {
  const ZoneConfig zones[] = {{1e-3, 1.0, ""}, {1e-3, 1.0, ""}};
  const double zero[] = {0.0, 0.01};
  EXPECT_THROW(solve_heterogeneous(CellState{{1, 1}}, zero, zones, RateCurve(), TrafficParams()),
               StarvedZoneError);
  EXPECT_NO_THROW(solve_heterogeneous(CellState{{0, 1}}, zero, zones, RateCurve(), TrafficParams()));
  const double ok[] = {0.01, 0.01};
  EXPECT_THROW(solve_heterogeneous(CellState{{0, 0}}, ok, zones, RateCurve(), TrafficParams()), Error);
  const double wrong_width[] = {0.01};
  EXPECT_THROW(solve_heterogeneous(CellState{{1, 1}}, wrong_width, zones, RateCurve(), TrafficParams()),
               ConfigError);
  SolverOptions tight;
  tight.max_iterations = 2;
  tight.picard_budget = 2;
  const double p[] = {1.0, 0.5};
  try {
    solve_heterogeneous(CellState{{1, 2}}, p, zones, RateCurve(), TrafficParams(), tight);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.residual(), 1e-9);
    EXPECT_NE(std::string(e.what()).find("1,2"), std::string::npos);
  }
}

TEST(StatePower, Examples) {
  FixedPointSolution s;
  s.phi = {0.3};
  const double p[] = {1.0};
  EXPECT_NEAR(state_power(CellState{{1}}, p, s, 0.1), 0.4, 1e-15);
  s.phi = {0.5};
  EXPECT_NEAR(state_power(CellState{{2}}, p, s, 0.1), 0.85, 1e-15);
  EXPECT_EQ(state_power(CellState{{0}}, p, s, 0.1), 0.1);
}

TEST(StateMetrics, Examples) {
  FixedPointSolution s;
  s.phi = {0.3};
  s.r_active = {1e6};
  const double p[] = {1.0};
  EXPECT_NEAR(metrics_from_solution(CellState{{1}}, p, s, 0.1).efficiency_bits_per_joule, 7.5e5, 1e-6);

  // Overloaded single zone: eta = R / (b + P)
  const ZoneConfig zones[] = {{1e-3, 1.0, ""}};
  const double q[] = {0.002};
  const auto m = state_metrics(CellState{{4}}, q, zones, RateCurve(), traffic_with_rate(1e9), 0.1);
  const double r = RateCurve().throughput(2.0);
  EXPECT_NEAR(m.efficiency_bits_per_joule, r / 0.102, 1e-9 * r);
}

// Property: for two zones, P-bar lies between b + min P and b + max P whenever anyone is active.
TEST(StatePowerProperty, Bounded) {
  const ZoneConfig zones[] = {{1e-3, 1.0, ""}, {2e-4, 1.0, ""}};
  const StateSpace space(2, 6);
  for (std::size_t i = 1; i < space.size(); ++i) {
    const double p[] = {0.003, 0.05};
    const auto& st = space.state(i);
    const auto sol = solve_heterogeneous(st, p, zones, RateCurve(), TrafficParams());
    const double pw = state_power(st, p, sol, 0.1);
    EXPECT_GE(pw, 0.1);
    EXPECT_LE(pw, 0.1 + 0.05 + 1e-15);
  }
}

// Property: single-zone efficiency is unimodal along a geometric power grid.
TEST(StateMetricsProperty, UnimodalInPower) {
  const ZoneConfig zones[] = {{1e-3, 1.0, ""}};
  for (int n : {1, 2, 4}) {
    std::vector<double> eta;
    for (int k = 0; k < 64; ++k) {
      const double p[] = {1e-4 * std::pow(1e5, k / 63.0)};
      eta.push_back(state_metrics(CellState{{n}}, p, zones, RateCurve(), TrafficParams(), 0.1)
                        .efficiency_bits_per_joule);
    }
    const auto peak = std::max_element(eta.begin(), eta.end()) - eta.begin();
    for (long k = 1; k <= peak; ++k) EXPECT_GE(eta[k], eta[k - 1]) << n;
    for (long k = peak + 1; k < 64; ++k) EXPECT_LE(eta[k], eta[k - 1]) << n;
  }
}

}  // namespace
}  // namespace greenflow
