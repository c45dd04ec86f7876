#pragma once

#include "hrdair/harness/trial.hpp"

#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

namespace hrdair {

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {
      "scheme", "trial",   "seed", "K",        "B",          "J",           "pA_dbm",  "N",       "Na",     "epsilon",
      "G",      "h_low",   "h_mc", "h_mc_se",  "accuracy",   "agg_mse_db",  "outer_iters", "wall_ms", "sigmaF2"};
  return cols;
}

namespace detail {

inline std::string csv_number(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

template <class T>
std::string csv_optional(const std::optional<T>& v) {
  if (!v) return "";
  if constexpr (std::is_floating_point_v<T>) return csv_number(*v);
  else return std::to_string(*v);
}

}  // namespace detail

/// Writes the header comment, the column line and one row per result. wall_ms is left empty
/// when omit_timing is set so that repeated runs are byte-identical.
inline void write_csv(std::ostream& out, const std::vector<TrialResult>& rows, bool omit_timing = false) {
  out << "# agg_mse_db = " << kExactAggregationDb << " marks exact aggregation (pfa)\n";
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  using detail::csv_number;
  using detail::csv_optional;
  for (const auto& r : rows) {
    const SystemConfig& c = r.config;
    out << scheme_name(r.scheme) << ',' << r.trial << ',' << r.seed << ',' << c.agents << ',' << c.total_bits << ','
        << c.sequence_length << ',' << csv_number(c.agent_power_dbm) << ',' << c.ris_elements << ','
        << c.active_elements << ',' << csv_optional(r.epsilon) << ',' << csv_optional(r.g) << ','
        << csv_optional(r.h_low) << ',' << csv_number(r.h_mc) << ',' << csv_number(r.h_mc_se) << ','
        << csv_number(r.accuracy) << ',' << csv_optional(r.agg_mse_db) << ',' << csv_optional(r.outer_iters) << ','
        << (omit_timing ? "" : csv_number(r.wall_ms)) << ',' << csv_number(c.feature_noise_var) << '\n';
  }
}

inline void save_csv(const std::string& path, const std::vector<TrialResult>& rows, bool omit_timing = false) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  write_csv(f, rows, omit_timing);
}

}  // namespace hrdair
