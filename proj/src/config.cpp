#include "greenflow/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "greenflow/error.hpp"

namespace greenflow {

using nlohmann::json;

void FlowParams::validate() const {
  if (!(file_bits > 0.0) || !std::isfinite(file_bits)) throw ConfigError("file_bits must be > 0");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
}

void OptimizerConfig::validate() const {
  if (points_per_decade < 4) throw ConfigError("optimizer.points_per_decade must be >= 4");
  if (!(tolerance > 0.0)) throw ConfigError("optimizer.tolerance must be > 0");
  if (max_sweeps < 1) throw ConfigError("optimizer.max_sweeps must be >= 1");
  if (multistart < 0) throw ConfigError("optimizer.multistart must be >= 0");
  if (!(penalty >= 0.0)) throw ConfigError("optimizer.penalty must be >= 0");
}

void CellConfig::validate() const {
  if (zones.empty()) throw ConfigError("at least one zone is required");
  for (const auto& z : zones) z.validate();
  traffic.validate();
  flow.validate();
  if (!(b_w >= 0.0) || !std::isfinite(b_w)) throw ConfigError("b_w must be >= 0");
  if (n_max < 1) throw ConfigError("n_max must be >= 1");
  if (!(p_min_w > 0.0)) throw ConfigError("p_min_w must be > 0");
  if (!(p_max_w > p_min_w) || !std::isfinite(p_max_w)) throw ConfigError("p_max_w must exceed p_min_w");
  optimizer.validate();
}

std::string to_string(StationaryMethod method) {
  return method == StationaryMethod::kBalance ? "balance" : "product_form";
}

namespace {

void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) throw ConfigError("unknown config key '" + where + key + "'");
  }
}

const json& require(const json& obj, const std::string& where, const std::string& key) {
  if (!obj.contains(key)) throw ConfigError("missing config key '" + where + key + "'");
  return obj.at(key);
}

double number(const json& v, const std::string& name) {
  if (!v.is_number()) throw ConfigError("config key '" + name + "' must be a number");
  return v.get<double>();
}

double number_at(const json& obj, const std::string& where, const std::string& key) {
  return number(require(obj, where, key), where + key);
}

std::int64_t integer(const json& v, const std::string& name) {
  if (!v.is_number_integer()) throw ConfigError("config key '" + name + "' must be an integer");
  return v.get<std::int64_t>();
}

RateCurve parse_curve(const json& c, const std::filesystem::path& base_dir) {
  if (!c.is_object()) throw ConfigError("config key 'rate_curve' must be an object");
  const auto& type = require(c, "rate_curve.", "type");
  if (!type.is_string()) throw ConfigError("config key 'rate_curve.type' must be a string");
  if (type == "analytic") {
    reject_unknown(c, "rate_curve.", {"type", "bandwidth_hz", "efficiency", "rate_cap_bps"});
    AnalyticRate a;
    if (c.contains("bandwidth_hz")) a.bandwidth_hz = number(c["bandwidth_hz"], "rate_curve.bandwidth_hz");
    if (c.contains("efficiency")) a.efficiency = number(c["efficiency"], "rate_curve.efficiency");
    if (c.contains("rate_cap_bps")) a.rate_cap_bps = number(c["rate_cap_bps"], "rate_curve.rate_cap_bps");
    return RateCurve::analytic(a);
  }
  if (type == "table") {
    reject_unknown(c, "rate_curve.", {"type", "path", "points"});
    if (c.contains("path") == c.contains("points")) {
      throw ConfigError("config key 'rate_curve' of type table needs exactly one of 'path' or 'points'");
    }
    if (c.contains("path")) {
      if (!c["path"].is_string()) throw ConfigError("config key 'rate_curve.path' must be a string");
      std::filesystem::path p = c["path"].get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      return RateCurve::load_csv(p);
    }
    const auto& pts = c["points"];
    if (!pts.is_array()) throw ConfigError("config key 'rate_curve.points' must be an array");
    std::vector<RatePoint> points;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::string where = "rate_curve.points[" + std::to_string(i) + "].";
      if (!pts[i].is_object()) throw ConfigError("config key '" + where + "' must be an object");
      reject_unknown(pts[i], where, {"sinr_db", "rate_bps"});
      points.push_back({number_at(pts[i], where, "sinr_db"), number_at(pts[i], where, "rate_bps")});
    }
    return RateCurve::table(std::move(points));
  }
  throw ConfigError("config key 'rate_curve.type' must be 'analytic' or 'table'");
}

OptimizerConfig parse_optimizer(const json& o) {
  if (!o.is_object()) throw ConfigError("config key 'optimizer' must be an object");
  reject_unknown(o, "optimizer.",
                 {"points_per_decade", "refine", "tolerance", "max_sweeps", "multistart", "seed", "penalty"});
  OptimizerConfig opt;
  if (o.contains("points_per_decade")) {
    opt.points_per_decade = static_cast<int>(integer(o["points_per_decade"], "optimizer.points_per_decade"));
  }
  if (o.contains("refine")) {
    if (!o["refine"].is_boolean()) throw ConfigError("config key 'optimizer.refine' must be a boolean");
    opt.refine = o["refine"].get<bool>();
  }
  if (o.contains("tolerance")) opt.tolerance = number(o["tolerance"], "optimizer.tolerance");
  if (o.contains("max_sweeps")) opt.max_sweeps = static_cast<int>(integer(o["max_sweeps"], "optimizer.max_sweeps"));
  if (o.contains("multistart")) opt.multistart = static_cast<int>(integer(o["multistart"], "optimizer.multistart"));
  if (o.contains("seed")) {
    const auto s = integer(o["seed"], "optimizer.seed");
    if (s < 0) throw ConfigError("config key 'optimizer.seed' must be nonnegative");
    opt.seed = static_cast<std::uint64_t>(s);
  }
  if (o.contains("penalty")) opt.penalty = number(o["penalty"], "optimizer.penalty");
  return opt;
}

}  // namespace

CellConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(doc, "", {"zones", "packet_bits", "packet_period_s", "file_bits", "b_w", "n_max", "epsilon",
                           "p_min_w", "p_max_w", "rate_curve", "optimizer", "stationary_method"});
  CellConfig config;
  const auto& zones = require(doc, "", "zones");
  if (!zones.is_array()) throw ConfigError("config key 'zones' must be an array");
  for (std::size_t i = 0; i < zones.size(); ++i) {
    const std::string where = "zones[" + std::to_string(i) + "].";
    const auto& z = zones[i];
    if (!z.is_object()) throw ConfigError("config key 'zones[" + std::to_string(i) + "]' must be an object");
    reject_unknown(z, where, {"sigma2_w", "lambda_per_s", "label"});
    ZoneConfig zone;
    zone.sigma2_w = number_at(z, where, "sigma2_w");
    zone.lambda_per_s = number_at(z, where, "lambda_per_s");
    if (z.contains("label")) {
      if (!z["label"].is_string()) throw ConfigError("config key '" + where + "label' must be a string");
      zone.label = z["label"].get<std::string>();
    } else {
      zone.label = "zone" + std::to_string(i + 1);
    }
    config.zones.push_back(std::move(zone));
  }
  config.traffic.packet_bits = number_at(doc, "", "packet_bits");
  config.traffic.packet_period_s = number_at(doc, "", "packet_period_s");
  config.flow.file_bits = number_at(doc, "", "file_bits");
  config.flow.epsilon = number_at(doc, "", "epsilon");
  config.b_w = number_at(doc, "", "b_w");
  config.n_max = static_cast<int>(integer(require(doc, "", "n_max"), "n_max"));
  config.p_min_w = number_at(doc, "", "p_min_w");
  config.p_max_w = number_at(doc, "", "p_max_w");
  if (doc.contains("rate_curve")) config.curve = parse_curve(doc["rate_curve"], base_dir);
  if (doc.contains("optimizer")) config.optimizer = parse_optimizer(doc["optimizer"]);
  if (doc.contains("stationary_method")) {
    const auto& m = doc["stationary_method"];
    if (m == "balance") {
      config.stationary_method = StationaryMethod::kBalance;
    } else if (m == "product_form") {
      config.stationary_method = StationaryMethod::kProductForm;
    } else {
      throw ConfigError("config key 'stationary_method' must be 'balance' or 'product_form'");
    }
  }
  config.validate();
  return config;
}

CellConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

json to_json(const CellConfig& config) {
  json doc;
  for (const auto& z : config.zones) {
    doc["zones"].push_back({{"sigma2_w", z.sigma2_w}, {"lambda_per_s", z.lambda_per_s}, {"label", z.label}});
  }
  doc["packet_bits"] = config.traffic.packet_bits;
  doc["packet_period_s"] = config.traffic.packet_period_s;
  doc["file_bits"] = config.flow.file_bits;
  doc["b_w"] = config.b_w;
  doc["n_max"] = config.n_max;
  doc["epsilon"] = config.flow.epsilon;
  doc["p_min_w"] = config.p_min_w;
  doc["p_max_w"] = config.p_max_w;
  if (const auto* a = config.curve.analytic_params()) {
    doc["rate_curve"] = {{"type", "analytic"},
                         {"bandwidth_hz", a->bandwidth_hz},
                         {"efficiency", a->efficiency},
                         {"rate_cap_bps", a->rate_cap_bps}};
  } else {
    json pts = json::array();
    for (const auto& p : *config.curve.table_points()) pts.push_back({{"sinr_db", p.sinr_db}, {"rate_bps", p.rate_bps}});
    doc["rate_curve"] = {{"type", "table"}, {"points", pts}};
  }
  const auto& o = config.optimizer;
  doc["optimizer"] = {{"points_per_decade", o.points_per_decade}, {"refine", o.refine},
                      {"tolerance", o.tolerance},                 {"max_sweeps", o.max_sweeps},
                      {"multistart", o.multistart},               {"seed", o.seed},
                      {"penalty", o.penalty}};
  doc["stationary_method"] = to_string(config.stationary_method);
  return doc;
}

}  // namespace greenflow
