#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "greenflow/cell_config.hpp"
#include "greenflow/flow_level.hpp"

namespace greenflow {

struct SweepSpec {
  enum class Variable {
    kTrafficScale,  // multiplies every zone's arrival rate
    kPower,         // upper power bound p_max_w
    kB,             // constant consumption b_w
  };
  enum class Mode { kLocal, kGlobal, kBoth };

  Variable variable = Variable::kTrafficScale;
  std::vector<double> values;
  Mode mode = Mode::kBoth;

  void validate() const;
};

// {"variable": "traffic_scale" | "power" | "b", "values": [...], "mode": "local" | "global" | "both"}
SweepSpec parse_sweep_spec(const nlohmann::json& doc);
SweepSpec load_sweep_spec(const std::filesystem::path& path);

struct SweepPoint {
  double value = 0.0;
  std::optional<double> eta_local;
  std::optional<double> eta_global;
  std::optional<double> blocking_local;
  std::optional<double> blocking_global;
  bool feasible_global = false;
  PowerPolicy policy;  // global policy when computed, local otherwise
};

CellConfig apply_sweep_value(const CellConfig& base, SweepSpec::Variable variable, double value);

// Points are evaluated concurrently and returned in input order.
std::vector<SweepPoint> run_sweep(const CellConfig& base, const SweepSpec& spec);

inline constexpr const char* kSweepCsvHeader =
    "sweep_value,eta_local_bits_per_joule,eta_global_bits_per_joule,blocking_local,blocking_global,policy_json";

void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points);

// {"N1,...,NM": [P1, ..., PM], ...} over the nonempty states.
nlohmann::json policy_to_json(const PowerPolicy& policy);

}  // namespace greenflow
