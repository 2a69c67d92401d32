#include "greenflow/sweep.hpp"

#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "greenflow/error.hpp"
#include "greenflow/optimizer.hpp"
#include "greenflow/state_space.hpp"

namespace greenflow {

using nlohmann::json;

void SweepSpec::validate() const {
  if (values.empty()) throw ConfigError("sweep spec: 'values' must not be empty");
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("sweep spec: values must be positive");
  }
}

SweepSpec parse_sweep_spec(const json& doc) {
  if (!doc.is_object()) throw ConfigError("sweep spec must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key != "variable" && key != "values" && key != "mode") throw ConfigError("unknown sweep spec key '" + key + "'");
  }
  SweepSpec spec;
  if (!doc.contains("variable") || !doc["variable"].is_string()) {
    throw ConfigError("sweep spec key 'variable' must be a string");
  }
  const auto var = doc["variable"].get<std::string>();
  if (var == "traffic_scale") {
    spec.variable = SweepSpec::Variable::kTrafficScale;
  } else if (var == "power") {
    spec.variable = SweepSpec::Variable::kPower;
  } else if (var == "b") {
    spec.variable = SweepSpec::Variable::kB;
  } else {
    throw ConfigError("sweep spec key 'variable' must be traffic_scale, power or b");
  }
  if (!doc.contains("values") || !doc["values"].is_array()) throw ConfigError("sweep spec key 'values' must be an array");
  for (const auto& v : doc["values"]) {
    if (!v.is_number()) throw ConfigError("sweep spec key 'values' must hold numbers");
    spec.values.push_back(v.get<double>());
  }
  if (doc.contains("mode")) {
    const auto& m = doc["mode"];
    if (m == "local") {
      spec.mode = SweepSpec::Mode::kLocal;
    } else if (m == "global") {
      spec.mode = SweepSpec::Mode::kGlobal;
    } else if (m == "both") {
      spec.mode = SweepSpec::Mode::kBoth;
    } else {
      throw ConfigError("sweep spec key 'mode' must be local, global or both");
    }
  }
  spec.validate();
  return spec;
}

SweepSpec load_sweep_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open sweep spec '" + path.string() + "'");
  try {
    return parse_sweep_spec(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError("sweep spec '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

CellConfig apply_sweep_value(const CellConfig& base, SweepSpec::Variable variable, double value) {
  CellConfig c = base;
  switch (variable) {
    case SweepSpec::Variable::kTrafficScale:
      for (auto& z : c.zones) z.lambda_per_s *= value;
      break;
    case SweepSpec::Variable::kPower:
      c.p_max_w = value;
      break;
    case SweepSpec::Variable::kB:
      c.b_w = value;
      break;
  }
  c.validate();
  return c;
}

std::vector<SweepPoint> run_sweep(const CellConfig& base, const SweepSpec& spec) {
  spec.validate();
  std::vector<std::future<SweepPoint>> jobs;
  for (double value : spec.values) {
    jobs.push_back(std::async(std::launch::async, [&base, &spec, value] {
      const CellConfig config = apply_sweep_value(base, spec.variable, value);
      const PowerPolicy local = local_policy(config);
      SweepPoint point{value, {}, {}, {}, {}, false, local};
      if (spec.mode != SweepSpec::Mode::kGlobal) {
        const auto s = score_policy(local, config);
        point.eta_local = s.eta;
        point.blocking_local = s.blocking_probability;
      }
      if (spec.mode != SweepSpec::Mode::kLocal) {
        auto result = optimize_policy(config, local);
        point.eta_global = result.objective;
        point.blocking_global = result.blocking_probability;
        point.feasible_global = result.feasible;
        point.policy = std::move(result.policy);
      }
      return point;
    }));
  }
  std::vector<SweepPoint> out;
  out.reserve(jobs.size());
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

json policy_to_json(const PowerPolicy& policy) {
  const StateSpace space(policy.zones(), policy.n_max());
  json out = json::object();
  for (std::size_t i = 1; i < space.size(); ++i) out[space.state(i).to_string()] = policy.at(i);
  return out;
}

namespace {

std::string csv_quote(const std::string& field) {
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

std::string format(std::optional<double> v) {
  if (!v) return {};
  std::ostringstream s;
  s << std::setprecision(12) << *v;
  return s.str();
}

}  // namespace

void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points) {
  out << kSweepCsvHeader << '\n';
  for (const auto& p : points) {
    out << format(p.value) << ',' << format(p.eta_local) << ',' << format(p.eta_global) << ','
        << format(p.blocking_local) << ',' << format(p.blocking_global) << ','
        << csv_quote(policy_to_json(p.policy).dump()) << '\n';
  }
}

}  // namespace greenflow
