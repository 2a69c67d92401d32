#pragma once

#include <cmath>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace greenflow {

struct RatePoint {
  double sinr_db;
  double rate_bps;
};

// Truncated Shannon curve: min(efficiency * bandwidth * log2(1 + rho), cap).
struct AnalyticRate {
  double bandwidth_hz = 20e6;
  double efficiency = 0.6;
  double rate_cap_bps = 100e6;
};

// Full-bandwidth throughput R(rho) as a function of linear average SINR.
//
// Either an analytic truncated-Shannon curve or a link-level table indexed by
// SINR in dB. Tables are interpolated linearly in the dB domain and clamp to
// their first/last rate outside the tabulated range; rho = 0 always maps to 0.
// Immutable after construction.
class RateCurve {
 public:
  RateCurve() = default;  // default analytic curve

  static RateCurve analytic(const AnalyticRate& params);
  static RateCurve table(std::vector<RatePoint> points);
  // CSV with header `sinr_db,rate_bps`, ascending sinr_db.
  static RateCurve from_csv(std::istream& in);
  static RateCurve load_csv(const std::filesystem::path& path);

  double throughput(double rho) const;
  // Rate reached once the curve has saturated.
  double saturation_rate() const;

  bool is_table() const { return std::holds_alternative<Table>(model_); }
  const AnalyticRate* analytic_params() const { return std::get_if<AnalyticRate>(&model_); }
  const std::vector<RatePoint>* table_points() const;

 private:
  struct Table {
    std::vector<RatePoint> points;
  };
  explicit RateCurve(std::variant<AnalyticRate, Table> model) : model_(std::move(model)) {}

  std::variant<AnalyticRate, Table> model_{AnalyticRate{}};
};

double sinr(double power_w, double sigma2_w);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

struct ZoneConfig {
  double sigma2_w = 1e-3;
  double lambda_per_s = 0.0;
  std::string label;

  void validate() const;
};

}  // namespace greenflow
