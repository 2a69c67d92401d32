#include "greenflow/cli_app.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "greenflow/config.hpp"
#include "greenflow/error.hpp"
#include "greenflow/flow_level.hpp"
#include "greenflow/optimizer.hpp"
#include "greenflow/simulator.hpp"
#include "greenflow/state_space.hpp"
#include "greenflow/sweep.hpp"

namespace greenflow {

using nlohmann::json;

namespace {

std::vector<double> parse_powers(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string field;
  while (std::getline(in, field, ',')) {
    field.erase(0, field.find_first_not_of(' '));
    field.erase(field.find_last_not_of(' ') + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(field, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != field.size()) throw ConfigError("bad power list '" + text + "'");
    out.push_back(v);
  }
  return out;
}

// Writes to --out when given, stdout otherwise.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw ConfigError("cannot write '" + path + "'");
    }
    out_ = file_.is_open() ? &file_ : &fallback;
  }
  std::ostream& stream() { return *out_; }

 private:
  std::ofstream file_;
  std::ostream* out_;
};

json solution_json(const CellState& state, const PowerVector& powers, const CellConfig& config) {
  const auto e = evaluate_state(state, powers, config);
  json zones = json::array();
  for (std::size_t z = 0; z < state.zones(); ++z) {
    zones.push_back({{"zone", z + 1},
                     {"users", state.counts[z]},
                     {"power_w", powers[z]},
                     {"sinr", sinr(powers[z], config.zones[z].sigma2_w)},
                     {"phi", e.solution.phi[z]},
                     {"r_active_bps", e.solution.r_active[z]}});
  }
  return {{"state", state.to_string()},
          {"zones", zones},
          {"converged", e.solution.converged},
          {"iterations", e.solution.iterations},
          {"residual", e.solution.residual},
          {"total_throughput_bps", e.metrics.total_throughput_bps},
          {"total_power_w", e.metrics.total_power_w},
          {"eta_bits_per_joule", e.metrics.efficiency_bits_per_joule}};
}

PowerPolicy choose_policy(const std::string& name, const CellConfig& config) {
  if (name == "local") return local_policy(config);
  if (name == "global") return optimize_policy(config).policy;
  if (name.rfind("uniform:", 0) == 0) {
    const auto p = parse_powers(name.substr(8));
    if (p.size() != 1) throw ConfigError("uniform policy takes one power");
    return PowerPolicy::uniform(config, p.front());
  }
  throw ConfigError("unknown policy '" + name + "' (use local, global or uniform:<watts>)");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Flow-level energy-efficiency analysis of a downlink base station"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_path;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "cell configuration (JSON)")->required();
    sub->add_option("-o,--out", out_path, "output file (default: stdout)");
  };

  std::string state_text;
  std::string power_text;
  auto* solve = app.add_subcommand("solve-state", "fixed point and efficiency of one state");
  add_common(solve);
  solve->add_option("--state", state_text, "user counts \"N1,...,NM\"")->required();
  solve->add_option("--power", power_text, "per-zone powers in watts \"P1,...,PM\"")->required();

  auto* local = app.add_subcommand("local-opt", "per-state efficiency optima");
  add_common(local);

  auto* global = app.add_subcommand("global-opt", "policy maximizing global efficiency under the QoS constraint");
  add_common(global);

  SimConfig sim;
  std::string policy_name = "local";
  std::string trace_path;
  auto* simulate_cmd = app.add_subcommand("simulate", "discrete-event simulation of the flow-level chain");
  add_common(simulate_cmd);
  simulate_cmd->add_option("--seed", sim.seed, "master seed");
  simulate_cmd->add_option("--horizon", sim.horizon_s, "simulated seconds")->required();
  simulate_cmd->add_option("--warmup", sim.warmup_s, "discarded seconds");
  simulate_cmd->add_option("--replications", sim.replications, "independent replications");
  simulate_cmd->add_option("--policy", policy_name, "local, global or uniform:<watts>");
  simulate_cmd->add_option("--trace", trace_path, "event trace CSV");

  std::string spec_path;
  auto* sweep = app.add_subcommand("sweep", "local vs global comparison over a swept parameter");
  add_common(sweep);
  sweep->add_option("--spec", spec_path, "sweep specification (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    const CellConfig config = load_config(config_path);
    Sink sink(out_path, out);
    auto& os = sink.stream();

    if (*solve) {
      const auto state = CellState::parse(state_text);
      const auto powers = parse_powers(power_text);
      if (state.zones() != config.zones.size() || powers.size() != config.zones.size()) {
        throw ConfigError("--state and --power need one entry per configured zone");
      }
      os << solution_json(state, powers, config).dump(2) << '\n';
    } else if (*local) {
      const StateSpace space(config.zone_count(), config.n_max);
      const auto policy = local_policy(config);
      os << "state,powers_w,throughput_bps,power_w,eta_bits_per_joule\n" << std::setprecision(12);
      for (std::size_t i = 1; i < space.size(); ++i) {
        const auto e = evaluate_state(space.state(i), policy.at(i), config);
        os << '"' << space.state(i).to_string() << "\",\"" << json(policy.at(i)).dump() << "\","
           << e.metrics.total_throughput_bps << ',' << e.metrics.total_power_w << ','
           << e.metrics.efficiency_bits_per_joule << '\n';
      }
    } else if (*global) {
      const auto local_p = local_policy(config);
      const auto local_score = score_policy(local_p, config);
      const auto result = optimize_policy(config, local_p);
      const json doc = {{"eta_global_bits_per_joule", result.objective},
                        {"blocking_global", result.blocking_probability},
                        {"feasible", result.feasible},
                        {"eta_local_bits_per_joule", local_score.eta},
                        {"blocking_local", local_score.blocking_probability},
                        {"epsilon", config.flow.epsilon},
                        {"trace", result.trace},
                        {"policy", policy_to_json(result.policy)}};
      os << doc.dump(2) << '\n';
    } else if (*simulate_cmd) {
      const auto policy = choose_policy(policy_name, config);
      std::ofstream trace;
      if (!trace_path.empty()) {
        trace.open(trace_path);
        if (!trace) throw ConfigError("cannot write '" + trace_path + "'");
        trace << std::setprecision(12);
      }
      const auto r = simulate(policy, config, sim, trace.is_open() ? &trace : nullptr);
      const auto analytic = stationary_distribution(policy, config);
      const StateSpace space(config.zone_count(), config.n_max);
      json states = json::array();
      for (std::size_t i = 0; i < space.size(); ++i) {
        states.push_back({{"state", space.state(i).to_string()},
                          {"empirical_pi", r.empirical_pi[i]},
                          {"stderr", r.pi_stderr[i]},
                          {"analytic_pi", analytic.pi[i]}});
      }
      const json doc = {{"empirical_blocking", r.empirical_blocking},
                        {"blocking_stderr", r.blocking_stderr},
                        {"analytic_blocking", analytic.blocking_probability},
                        {"empirical_eta_bits_per_joule", r.empirical_eta},
                        {"eta_stderr", r.eta_stderr},
                        {"total_variation", total_variation(r.empirical_pi, analytic.pi)},
                        {"replications", r.replications.size()},
                        {"states", states}};
      os << doc.dump(2) << '\n';
    } else if (*sweep) {
      const auto spec = load_sweep_spec(spec_path);
      write_sweep_csv(os, run_sweep(config, spec));
    }
    return 0;
  } catch (const std::exception& e) {
    err << "greenflow: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace greenflow
