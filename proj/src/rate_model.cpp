#include "greenflow/rate_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "greenflow/error.hpp"

namespace greenflow {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_number(const std::string& text, int line) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(value)) {
    throw ConfigError("rate table line " + std::to_string(line) + ": bad number '" + text + "'");
  }
  return value;
}

}  // namespace

RateCurve RateCurve::analytic(const AnalyticRate& params) {
  if (!(params.bandwidth_hz > 0.0) || !std::isfinite(params.bandwidth_hz)) {
    throw ConfigError("analytic rate curve: bandwidth_hz must be > 0");
  }
  if (!(params.efficiency > 0.0) || !std::isfinite(params.efficiency)) {
    throw ConfigError("analytic rate curve: efficiency must be > 0");
  }
  if (!(params.rate_cap_bps > 0.0) || !std::isfinite(params.rate_cap_bps)) {
    throw ConfigError("analytic rate curve: rate_cap_bps must be > 0");
  }
  return RateCurve(params);
}

RateCurve RateCurve::table(std::vector<RatePoint> points) {
  if (points.empty()) throw ConfigError("rate table is empty");
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (!std::isfinite(p.sinr_db) || !std::isfinite(p.rate_bps) || p.rate_bps < 0.0) {
      throw ConfigError("rate table point " + std::to_string(i) + " is not a finite nonnegative rate");
    }
    if (i > 0) {
      if (!(p.sinr_db > points[i - 1].sinr_db)) {
        throw ConfigError("rate table sinr_db must be strictly increasing (point " + std::to_string(i) + ")");
      }
      if (p.rate_bps < points[i - 1].rate_bps) {
        throw ConfigError("rate table rates must be nondecreasing (point " + std::to_string(i) + ")");
      }
    }
  }
  return RateCurve(Table{std::move(points)});
}

RateCurve RateCurve::from_csv(std::istream& in) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line) != "sinr_db,rate_bps") {
    throw ConfigError("rate table header must be 'sinr_db,rate_bps'");
  }
  std::vector<RatePoint> points;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw ConfigError("rate table line " + std::to_string(line_no) + ": expected two columns");
    }
    points.push_back({parse_number(trim(line.substr(0, comma)), line_no),
                      parse_number(trim(line.substr(comma + 1)), line_no)});
  }
  return table(std::move(points));
}

RateCurve RateCurve::load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open rate table '" + path.string() + "'");
  return from_csv(in);
}

const std::vector<RatePoint>* RateCurve::table_points() const {
  const auto* t = std::get_if<Table>(&model_);
  return t ? &t->points : nullptr;
}

double RateCurve::throughput(double rho) const {
  if (!(rho > 0.0)) return 0.0;
  if (const auto* a = std::get_if<AnalyticRate>(&model_)) {
    return std::min(a->efficiency * a->bandwidth_hz * std::log2(1.0 + rho), a->rate_cap_bps);
  }
  const auto& pts = std::get<Table>(model_).points;
  const double db = 10.0 * std::log10(rho);
  if (db <= pts.front().sinr_db) return pts.front().rate_bps;
  if (db >= pts.back().sinr_db) return pts.back().rate_bps;
  const auto hi = std::upper_bound(pts.begin(), pts.end(), db,
                                   [](double x, const RatePoint& p) { return x < p.sinr_db; });
  const auto lo = hi - 1;
  const double t = (db - lo->sinr_db) / (hi->sinr_db - lo->sinr_db);
  return lo->rate_bps + t * (hi->rate_bps - lo->rate_bps);
}

double RateCurve::saturation_rate() const {
  if (const auto* a = std::get_if<AnalyticRate>(&model_)) return a->rate_cap_bps;
  return std::get<Table>(model_).points.back().rate_bps;
}

double sinr(double power_w, double sigma2_w) {
  if (!(power_w >= 0.0)) throw ConfigError("sinr: power must be >= 0");
  if (!(sigma2_w > 0.0)) throw ConfigError("sinr: sigma2 must be > 0");
  return power_w / sigma2_w;
}

void ZoneConfig::validate() const {
  if (!(sigma2_w > 0.0) || !std::isfinite(sigma2_w)) {
    throw ConfigError("zone '" + label + "': sigma2_w must be > 0");
  }
  if (!(lambda_per_s >= 0.0) || !std::isfinite(lambda_per_s)) {
    throw ConfigError("zone '" + label + "': lambda_per_s must be >= 0");
  }
}

}  // namespace greenflow
