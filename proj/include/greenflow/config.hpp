#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "greenflow/cell_config.hpp"

namespace greenflow {

// Reads a cell configuration.
//
// Required keys: zones[] (sigma2_w, lambda_per_s, optional label),
// packet_bits, packet_period_s, file_bits, b_w, n_max, epsilon, p_min_w,
// p_max_w. Optional: rate_curve ({"type": "analytic", bandwidth_hz,
// efficiency, rate_cap_bps} or {"type": "table", "path": csv} or
// {"type": "table", "points": [{sinr_db, rate_bps}, ...]}), optimizer
// (points_per_decade, refine, tolerance, max_sweeps, multistart, seed,
// penalty) and stationary_method ("balance" or "product_form").
// Unknown keys are rejected. Relative table paths resolve against the
// config file's directory.
CellConfig load_config(const std::filesystem::path& path);
CellConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});

nlohmann::json to_json(const CellConfig& config);

std::string to_string(StationaryMethod method);

}  // namespace greenflow
