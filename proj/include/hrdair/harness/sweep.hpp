#pragma once

#include "hrdair/harness/trial.hpp"

#include <string>
#include <vector>

namespace hrdair {

/// Seed of trial i for base seed s. Trial i uses the same seed at every sweep value.
inline std::uint64_t trial_seed(std::uint64_t base, int trial) {
  return detail::splitmix64(base + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(trial + 1));
}

inline bool is_sweep_key(const std::string& key) {
  for (const char* k : {"K", "B", "J", "pA_dbm", "N", "Na", "sigmaF2", "epsilon"})
    if (key == k) return true;
  return false;
}

/// Applies one sweep assignment. "epsilon" is the uniform-correlation coefficient; sweeping N sets Na = floor(N/8).
inline SystemConfig apply_sweep_value(const SystemConfig& base, const std::string& key, const std::string& value) {
  if (!is_sweep_key(key)) throw ConfigError("cannot sweep over '" + key + "'");
  SystemConfig cfg = base;
  if (key == "epsilon") {
    set_config_value(cfg, "correlation_eps", value);
  } else if (key == "N") {
    set_config_value(cfg, "N", value);
    cfg.active_elements = cfg.ris_elements / 8;
  } else {
    set_config_value(cfg, key, value);
  }
  cfg.finalize();
  return cfg;
}

struct SweepSpec {
  std::string key;  // empty: no sweep
  std::vector<std::string> values;
};

inline SweepSpec parse_sweep(const std::string& arg) {
  SweepSpec s;
  if (arg.empty()) return s;
  const auto eq = arg.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size())
    throw ConfigError("sweep must look like key=v1,v2,...");
  s.key = detail::trim(arg.substr(0, eq));
  std::string rest = arg.substr(eq + 1);
  std::size_t pos = 0;
  while (pos <= rest.size()) {
    const auto comma = rest.find(',', pos);
    const std::string v = detail::trim(rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
    if (v.empty()) throw ConfigError("empty value in sweep '" + arg + "'");
    s.values.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return s;
}

/// Runs every (sweep value, trial) and returns rows in (scheme, sweep value, trial) order.
inline std::vector<TrialResult> run_sweep(const SystemConfig& base, const std::vector<Scheme>& schemes, int trials,
                                          std::uint64_t seed, const SweepSpec& sweep = {}) {
  std::vector<SystemConfig> cfgs;
  if (sweep.key.empty()) cfgs.push_back(base);
  for (const auto& v : sweep.values) cfgs.push_back(apply_sweep_value(base, sweep.key, v));

  const std::size_t S = schemes.size(), V = cfgs.size(), R = static_cast<std::size_t>(trials);
  std::vector<TrialResult> grid(S * V * R);
  for (std::size_t v = 0; v < V; ++v)
    for (std::size_t r = 0; r < R; ++r) {
      auto rows = run_trials(cfgs[v], schemes, trial_seed(seed, static_cast<int>(r)), static_cast<int>(r));
      for (std::size_t s = 0; s < S; ++s) grid[(s * V + v) * R + r] = std::move(rows[s]);
    }
  return grid;
}

}  // namespace hrdair
