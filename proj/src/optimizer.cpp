#include "greenflow/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <utility>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "greenflow/error.hpp"

namespace greenflow {

namespace {

constexpr double kInvPhi = 0.6180339887498949;  // 1 / golden ratio

bool better(double candidate, double incumbent) {
  if (!std::isfinite(incumbent)) return candidate > incumbent;
  return candidate > incumbent + 1e-12 * std::abs(incumbent);
}

struct LinePoint {
  double x;
  double f;
};

// Maximizes f over one power coordinate. The incumbent only moves on strict
// improvement; among grid points of equal value the lowest power wins.
template <typename F>
LinePoint line_maximize(F&& f, const std::vector<double>& grid, LinePoint incumbent, bool refine) {
  std::size_t best_k = 0;
  double best_grid = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double v = f(grid[k]);
    if (better(v, best_grid)) {
      best_grid = v;
      best_k = k;
    }
  }
  LinePoint best = incumbent;
  if (better(best_grid, best.f)) best = {grid[best_k], best_grid};
  if (!refine || grid.size() < 3) return best;

  // Golden-section search in log power on the bracket around the best grid point.
  double a = std::log(grid[best_k == 0 ? 0 : best_k - 1]);
  double b = std::log(grid[std::min(best_k + 1, grid.size() - 1)]);
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(std::exp(c));
  double fd = f(std::exp(d));
  for (int it = 0; it < 40 && (b - a) > 1e-9; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(std::exp(d));
    }
  }
  const LinePoint golden = fc >= fd ? LinePoint{std::exp(c), fc} : LinePoint{std::exp(d), fd};
  if (better(golden.f, best.f)) best = golden;
  return best;
}

std::vector<std::size_t> occupied(const CellState& s) {
  std::vector<std::size_t> out;
  for (std::size_t z = 0; z < s.zones(); ++z) {
    if (s.counts[z] > 0) out.push_back(z);
  }
  return out;
}

bool converged(double previous, double current, double tolerance) {
  return current - previous <= tolerance * std::max(std::abs(previous), 1e-300);
}

// Incrementally updated evaluation of a whole policy.
class PolicyEvaluator {
 public:
  PolicyEvaluator(const CellConfig& config, PowerPolicy policy)
      : config_(config),
        space_(config.zone_count(), config.n_max),
        policy_(std::move(policy)),
        states_(evaluate_policy(policy_, config)) {
    score_ = score(states_);
  }

  const PowerPolicy& policy() const { return policy_; }
  const PolicyScore& current() const { return score_; }
  const StateSpace& space() const { return space_; }

  PolicyScore trial(std::size_t index, const PowerVector& powers) {
    const auto saved = std::exchange(states_[index], evaluate_state(space_.state(index), powers, config_));
    const auto s = score(states_);
    states_[index] = saved;
    return s;
  }

  void commit(std::size_t index, PowerVector powers) {
    states_[index] = evaluate_state(space_.state(index), powers, config_);
    policy_.at(index) = std::move(powers);
    score_ = score(states_);
  }

 private:
  PolicyScore score(const std::vector<StateEvaluation>& states) const {
    const auto d = stationary_distribution(space_, states, config_);
    PolicyScore s;
    s.eta = global_efficiency(d.pi, states);
    s.blocking_probability = d.blocking_probability;
    s.feasible = meets_qos(d.blocking_probability, config_.flow);
    s.penalized = penalized_objective(s.eta, d.blocking_probability, config_);
    return s;
  }

  const CellConfig& config_;
  StateSpace space_;
  PowerPolicy policy_;
  std::vector<StateEvaluation> states_;
  PolicyScore score_;
};

struct AscentOutcome {
  PowerPolicy best_feasible;
  PolicyScore best_feasible_score;
  bool any_feasible = false;
  PowerPolicy final_policy;
  PolicyScore final_score;
  std::vector<double> trace;
};

AscentOutcome ascend(const CellConfig& config, PowerPolicy seed, const std::vector<double>& grid) {
  PolicyEvaluator ev(config, std::move(seed));
  AscentOutcome out{ev.policy(), ev.current(), ev.current().feasible, ev.policy(), ev.current(), {}};
  const auto note_feasible = [&] {
    const auto& s = ev.current();
    if (s.feasible && (!out.any_feasible || s.eta > out.best_feasible_score.eta)) {
      out.best_feasible = ev.policy();
      out.best_feasible_score = s;
      out.any_feasible = true;
    }
  };
  out.trace.push_back(ev.current().penalized);
  const auto& opt = config.optimizer;
  for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    const double before = ev.current().penalized;
    for (std::size_t i = 1; i < ev.space().size(); ++i) {
      for (auto z : occupied(ev.space().state(i))) {
        PowerVector powers = ev.policy().at(i);
        const auto objective = [&](double p) {
          powers[z] = p;
          return ev.trial(i, powers).penalized;
        };
        const LinePoint start{ev.policy().at(i)[z], ev.current().penalized};
        const auto best = line_maximize(objective, grid, start, opt.refine);
        if (best.x != start.x) {
          powers[z] = best.x;
          ev.commit(i, powers);
          note_feasible();
        }
      }
      const auto zones = occupied(ev.space().state(i));
      if (zones.size() < 2) continue;
      // Joint moves of two zones of the same state, one grid step (then finer
      // steps when refining) along each diagonal.
      const double ratio = grid[1] / grid[0];
      std::vector<double> steps{ratio};
      if (opt.refine) steps.insert(steps.end(), {std::sqrt(ratio), std::sqrt(std::sqrt(ratio))});
      for (double step : steps) {
        bool moved = true;
        while (moved) {
          moved = false;
          for (std::size_t a = 0; a < zones.size(); ++a) {
            for (std::size_t b = a + 1; b < zones.size(); ++b) {
              for (const auto& [fa, fb] : {std::pair{step, step}, {step, 1 / step}, {1 / step, step},
                                           {1 / step, 1 / step}}) {
                PowerVector trial = ev.policy().at(i);
                trial[zones[a]] = std::clamp(trial[zones[a]] * fa, grid.front(), grid.back());
                trial[zones[b]] = std::clamp(trial[zones[b]] * fb, grid.front(), grid.back());
                if (trial == ev.policy().at(i)) continue;
                if (better(ev.trial(i, trial).penalized, ev.current().penalized)) {
                  ev.commit(i, std::move(trial));
                  note_feasible();
                  moved = true;
                }
              }
            }
          }
        }
      }
    }
    out.trace.push_back(ev.current().penalized);
    if (converged(before, ev.current().penalized, opt.tolerance)) break;
  }
  out.final_policy = ev.policy();
  out.final_score = ev.current();
  return out;
}

}  // namespace

std::vector<double> power_grid(const CellConfig& config) {
  const double decades = std::log10(config.p_max_w / config.p_min_w);
  const int steps = std::max(1, static_cast<int>(std::ceil(decades * config.optimizer.points_per_decade - 1e-9)));
  std::vector<double> grid(static_cast<std::size_t>(steps) + 1);
  for (int k = 0; k <= steps; ++k) {
    grid[static_cast<std::size_t>(k)] = config.p_min_w * std::pow(config.p_max_w / config.p_min_w,
                                                                 static_cast<double>(k) / steps);
  }
  grid.front() = config.p_min_w;
  grid.back() = config.p_max_w;
  return grid;
}

double penalized_objective(double eta, double blocking_probability, const CellConfig& config) {
  return eta - config.optimizer.penalty * std::max(0.0, blocking_probability - config.flow.epsilon);
}

StateOptimum optimize_state(const CellState& state, const CellConfig& config) {
  if (state.empty()) throw Error("optimize_state: empty state has no power to optimize");
  const auto zones = occupied(state);
  const auto grid = power_grid(config);
  const auto& opt = config.optimizer;
  PowerVector powers(state.zones(), config.p_min_w);
  const auto eta = [&](const PowerVector& p) {
    return state_metrics(state, p, config.zones, config.curve, config.traffic, config.b_w, config.solver)
        .efficiency_bits_per_joule;
  };

  // Best equal-power grid point.
  LinePoint start{grid.front(), -std::numeric_limits<double>::infinity()};
  for (double g : grid) {
    for (auto z : zones) powers[z] = g;
    const double v = eta(powers);
    if (better(v, start.f)) start = {g, v};
  }
  for (auto z : zones) powers[z] = start.x;
  double value = start.f;

  const auto coordinate_sweeps = [&] {
    for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
      const double before = value;
      for (auto z : zones) {
        PowerVector trial = powers;
        const auto objective = [&](double p) {
          trial[z] = p;
          return eta(trial);
        };
        const auto best = line_maximize(objective, grid, {powers[z], value}, opt.refine);
        powers[z] = best.x;
        value = best.f;
      }
      if (zones.size() == 1 || converged(before, value, opt.tolerance)) break;
    }
  };
  coordinate_sweeps();
  if (zones.size() < 2 || !opt.refine) return {powers, value};

  // Coordinate moves stall on ridges where a zone sits at full activity.
  // Polish with a simplex search in log power, then sweep again.
  struct Ctx {
    const std::vector<std::size_t>* zones;
    PowerVector base;
    double lo, hi;
    const decltype(eta)* f;
  } ctx{&zones, powers, std::log(config.p_min_w), std::log(config.p_max_w), &eta};
  const auto to_powers = [](const Ctx& c, const gsl_vector* x) {
    PowerVector p = c.base;
    for (std::size_t k = 0; k < c.zones->size(); ++k) {
      p[(*c.zones)[k]] = std::exp(std::clamp(gsl_vector_get(x, k), c.lo, c.hi));
    }
    return p;
  };
  gsl_multimin_function fn;
  fn.n = zones.size();
  fn.params = &ctx;
  fn.f = [](const gsl_vector* x, void* params) {
    const auto& c = *static_cast<Ctx*>(params);
    return -(*c.f)(decltype(to_powers){}(c, x));
  };
  const std::size_t n = zones.size();
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(n), gsl_vector_free);
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> steps(gsl_vector_alloc(n), gsl_vector_free);
  std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> nm(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n), gsl_multimin_fminimizer_free);
  for (int round = 0; round < opt.max_sweeps; ++round) {
    for (std::size_t k = 0; k < n; ++k) gsl_vector_set(x.get(), k, std::log(powers[zones[k]]));
    gsl_vector_set_all(steps.get(), std::log(grid[1] / grid[0]));
    gsl_multimin_fminimizer_set(nm.get(), &fn, x.get(), steps.get());
    for (int it = 0; it < 2000; ++it) {
      if (gsl_multimin_fminimizer_iterate(nm.get()) != GSL_SUCCESS) break;
      if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(nm.get()), 1e-9) == GSL_SUCCESS) break;
    }
    const double v = -gsl_multimin_fminimizer_minimum(nm.get());
    if (!better(v, value)) break;
    powers = to_powers(ctx, gsl_multimin_fminimizer_x(nm.get()));
    value = eta(powers);
    coordinate_sweeps();
  }
  return {powers, value};
}

PowerPolicy local_policy(const CellConfig& config) {
  const StateSpace space(config.zone_count(), config.n_max);
  PowerPolicy policy = PowerPolicy::uniform(config, config.p_min_w);
  // States whose occupied zones have the same (sigma2, count) profile share an optimum.
  using Profile = std::vector<std::pair<double, int>>;
  std::map<Profile, PowerVector> cache;
  for (std::size_t i = 1; i < space.size(); ++i) {
    const auto& s = space.state(i);
    const auto zones = occupied(s);
    std::vector<std::size_t> order = zones;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::pair(config.zones[a].sigma2_w, s.counts[a]) < std::pair(config.zones[b].sigma2_w, s.counts[b]);
    });
    Profile key;
    for (auto z : order) key.emplace_back(config.zones[z].sigma2_w, s.counts[z]);
    auto it = cache.find(key);
    if (it == cache.end()) {
      const auto best = optimize_state(s, config);
      PowerVector sorted;
      for (auto z : order) sorted.push_back(best.powers[z]);
      it = cache.emplace(std::move(key), std::move(sorted)).first;
    }
    PowerVector powers(s.zones(), config.p_min_w);
    for (std::size_t k = 0; k < order.size(); ++k) powers[order[k]] = it->second[k];
    policy.at(i) = std::move(powers);
  }
  return policy;
}

PolicyScore score_policy(const PowerPolicy& policy, const CellConfig& config) {
  const StateSpace space(config.zone_count(), config.n_max);
  const auto states = evaluate_policy(policy, config);
  const auto d = stationary_distribution(space, states, config);
  PolicyScore s;
  s.eta = global_efficiency(d.pi, states);
  s.blocking_probability = d.blocking_probability;
  s.feasible = meets_qos(d.blocking_probability, config.flow);
  s.penalized = penalized_objective(s.eta, d.blocking_probability, config);
  return s;
}

OptimizationResult optimize_policy(const CellConfig& config) { return optimize_policy(config, local_policy(config)); }

OptimizationResult optimize_policy(const CellConfig& config, const PowerPolicy& local) {
  const auto grid = power_grid(config);
  const StateSpace space(config.zone_count(), config.n_max);
  std::vector<PowerPolicy> seeds{local};
  std::mt19937_64 rng(config.optimizer.seed);
  std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
  for (int k = 0; k < config.optimizer.multistart; ++k) {
    PowerPolicy p = PowerPolicy::uniform(config, config.p_min_w);
    for (std::size_t i = 1; i < space.size(); ++i) {
      for (auto z : occupied(space.state(i))) p.at(i)[z] = grid[pick(rng)];
    }
    seeds.push_back(std::move(p));
  }

  std::vector<AscentOutcome> runs;
  runs.reserve(seeds.size());
  for (auto& seed : seeds) runs.push_back(ascend(config, std::move(seed), grid));

  const AscentOutcome* chosen = nullptr;
  for (const auto& r : runs) {
    if (r.any_feasible && (!chosen || !chosen->any_feasible || r.best_feasible_score.eta > chosen->best_feasible_score.eta)) {
      chosen = &r;
    }
  }
  if (chosen) {
    return {chosen->best_feasible, chosen->best_feasible_score.eta, chosen->best_feasible_score.blocking_probability,
            true, chosen->trace};
  }
  chosen = &runs.front();
  for (const auto& r : runs) {
    if (r.final_score.penalized > chosen->final_score.penalized) chosen = &r;
  }
  return {chosen->final_policy, chosen->final_score.eta, chosen->final_score.blocking_probability, false,
          chosen->trace};
}

}  // namespace greenflow
