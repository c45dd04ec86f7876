#pragma once

#include "hrdair/core.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace hrdair {

struct Point3 {
  double x = 0, y = 0, z = 0;
};

inline double distance(const Point3& a, const Point3& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}

/// Every scalar parameter of one simulated network and inference task.
/// dBm inputs are converted to watts by finalize(); all arithmetic downstream uses watts.
struct SystemConfig {
  // network dimensions
  int agents = 24;           // K
  int en_antennas = 16;      // M
  int ris_elements = 64;     // N
  int active_elements = 8;   // Na
  int block_length = 20;     // D
  int sequence_length = 70;  // J
  int total_bits = 40;       // B
  int feature_dim = 100;     // W
  int classes = 20;          // L

  // power budgets and noise (dBm)
  double agent_power_dbm = 20.0;
  double ris_power_dbm = 23.0;
  double ris_noise_dbm = -70.0;
  double en_noise_dbm = -80.0;

  double block_norm_bound = 18.9;    // beta
  double detection_mse_const = 1.0;  // eta
  double feature_noise_var = 0.5;    // sigma_F^2
  double delta_out = 1e-5;
  double delta_in = 1e-6;

  // propagation
  double pathloss_ae = 3.7, pathloss_ar = 2.2, pathloss_re = 2.0;
  double rician_ae = 0.0, rician_ar = 1.0, rician_re = kInf;
  Point3 en_position{5, 0, 15};
  Point3 ris_position{0, 10, 15};
  Point3 agent_center{25, 50, 0};
  double agent_radius = 20.0;

  // synthetic task
  double mean_scale = 0.35;  // std-dev of class-centroid entries
  double class_variance = 1.0;
  std::uint64_t task_seed = 20240101;
  std::uint64_t codebook_seed = 7;

  // algorithm knobs
  int min_block_bits = 1;
  int max_block_bits = 12;
  int correlation_mode = 1;  // 1: eps-uniform, 2: from local features
  double correlation_eps = 0.6;
  double md_truncation_pct = 20.0;
  double swomp_threshold = 0.5;
  int swomp_max_stages = 10;
  int rounds = 100;  // inference rounds per trial
  int max_outer_iters = 50;
  int max_inner_iters = 500;
  int entropy_samples = 2000;

  // derived by finalize()
  double agent_power_w = 0, ris_power_w = 0, ris_noise_w = 0, en_noise_w = 0;

  int blocks() const { return feature_dim / block_length; }
  /// Upper bound on |nu_k|^2 from the agent power budget.
  double max_coeff_sq() const {
    return agent_power_w / (block_norm_bound * block_norm_bound * sequence_length);
  }
  /// beta^2 J, the signal-energy scale that multiplies every alignment term.
  double signal_scale() const { return block_norm_bound * block_norm_bound * sequence_length; }

  void validate() const;
  /// Validates and fills the watt-valued fields.
  SystemConfig& finalize() {
    validate();
    agent_power_w = dbm_to_watts(agent_power_dbm);
    ris_power_w = dbm_to_watts(ris_power_dbm);
    ris_noise_w = dbm_to_watts(ris_noise_dbm);
    en_noise_w = dbm_to_watts(en_noise_dbm);
    return *this;
  }
};

inline SystemConfig default_config() { return SystemConfig{}.finalize(); }

inline void SystemConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (agents < 1) fail("K must be >= 1");
  if (en_antennas < 1) fail("M must be >= 1");
  if (ris_elements < 0) fail("N must be >= 0");
  if (active_elements < 0 || active_elements > ris_elements) fail("Na must lie in [0, N]");
  if (block_length < 2) fail("D must be >= 2");
  if (sequence_length < 1) fail("J must be >= 1");
  if (feature_dim < 1 || feature_dim % block_length != 0) fail("W must be a positive multiple of D");
  if (classes < 1) fail("L must be >= 1");
  if (min_block_bits < 0 || max_block_bits < min_block_bits) fail("invalid per-block bit range");
  if (total_bits < blocks() * min_block_bits) fail("B is below the per-block bit floor times T");
  if (total_bits > blocks() * max_block_bits) fail("B exceeds the per-block bit cap times T");
  if (!(delta_out > 0 && delta_out < 1)) fail("delta_out must lie in (0, 1)");
  if (!(delta_in > 0 && delta_in < 1)) fail("delta_in must lie in (0, 1)");
  for (double p : {agent_power_dbm, ris_power_dbm, ris_noise_dbm, en_noise_dbm})
    if (!std::isfinite(p)) fail("power/noise levels must be finite dBm values");
  if (!(block_norm_bound > 0)) fail("beta must be positive");
  if (!(detection_mse_const > 0)) fail("eta must be positive");
  if (!(feature_noise_var >= 0)) fail("sigmaF2 must be non-negative");
  for (double c : {rician_ae, rician_ar, rician_re})
    if (!(c >= 0)) fail("Rician factors must be non-negative");
  if (!(agent_radius >= 0)) fail("agent_radius must be non-negative");
  if (!(class_variance > 0)) fail("class_var must be positive");
  if (correlation_mode != 1 && correlation_mode != 2) fail("correlation_mode must be 1 or 2");
  if (!(correlation_eps >= 0 && correlation_eps <= 1)) fail("correlation_eps must lie in [0, 1]");
  if (!(md_truncation_pct >= 0 && md_truncation_pct <= 100)) fail("md_truncation_pct must lie in [0, 100]");
  if (!(swomp_threshold > 0 && swomp_threshold <= 1)) fail("swomp_threshold must lie in (0, 1]");
  if (swomp_max_stages < 1) fail("swomp_max_stages must be >= 1");
  if (rounds < 1) fail("rounds must be >= 1");
  if (max_outer_iters < 1 || max_inner_iters < 1) fail("iteration caps must be >= 1");
  if (entropy_samples < 0) fail("entropy_samples must be >= 0");
}

// ---------------------------------------------------------------------------
// Flat "key = value" config files. Keys mirror the SystemConfig symbols.

namespace detail {

struct ConfigKey {
  std::string name;
  std::function<void(SystemConfig&, const std::string&)> set;
  std::function<std::string(const SystemConfig&)> get;
};

inline double parse_double(const std::string& key, const std::string& v) {
  std::string s = v;
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "inf" || s == "infinity") return kInf;
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  }
}

inline long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    long long i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  }
}

inline Point3 parse_point(const std::string& key, const std::string& v) {
  std::stringstream ss(v);
  std::string part;
  double xyz[3];
  int n = 0;
  while (std::getline(ss, part, ',')) {
    if (n == 3) throw ConfigError("key '" + key + "': expected x,y,z");
    auto b = part.find_first_not_of(" \t");
    auto e = part.find_last_not_of(" \t");
    xyz[n++] = parse_double(key, b == std::string::npos ? "" : part.substr(b, e - b + 1));
  }
  if (n != 3) throw ConfigError("key '" + key + "': expected x,y,z");
  return {xyz[0], xyz[1], xyz[2]};
}

inline std::string fmt_double(double d) {
  if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << d;
  return os.str();
}

template <class T>
ConfigKey int_key(std::string name, T SystemConfig::*field) {
  return {name,
          [name, field](SystemConfig& c, const std::string& v) { c.*field = static_cast<T>(parse_int(name, v)); },
          [field](const SystemConfig& c) { return std::to_string(c.*field); }};
}

inline ConfigKey dbl_key(std::string name, double SystemConfig::*field) {
  return {name, [name, field](SystemConfig& c, const std::string& v) { c.*field = parse_double(name, v); },
          [field](const SystemConfig& c) { return fmt_double(c.*field); }};
}

inline ConfigKey pt_key(std::string name, Point3 SystemConfig::*field) {
  return {name, [name, field](SystemConfig& c, const std::string& v) { c.*field = parse_point(name, v); },
          [field](const SystemConfig& c) {
            const Point3& p = c.*field;
            return fmt_double(p.x) + "," + fmt_double(p.y) + "," + fmt_double(p.z);
          }};
}

inline const std::vector<ConfigKey>& config_keys() {
  using C = SystemConfig;
  static const std::vector<ConfigKey> keys = {
      int_key("K", &C::agents),
      int_key("M", &C::en_antennas),
      int_key("N", &C::ris_elements),
      int_key("Na", &C::active_elements),
      int_key("D", &C::block_length),
      int_key("J", &C::sequence_length),
      int_key("B", &C::total_bits),
      int_key("W", &C::feature_dim),
      int_key("L", &C::classes),
      dbl_key("pA_dbm", &C::agent_power_dbm),
      dbl_key("pR_dbm", &C::ris_power_dbm),
      dbl_key("sigmaR2_dbm", &C::ris_noise_dbm),
      dbl_key("sigmaE2_dbm", &C::en_noise_dbm),
      dbl_key("beta", &C::block_norm_bound),
      dbl_key("eta", &C::detection_mse_const),
      dbl_key("sigmaF2", &C::feature_noise_var),
      dbl_key("delta_out", &C::delta_out),
      dbl_key("delta_in", &C::delta_in),
      dbl_key("theta_ae", &C::pathloss_ae),
      dbl_key("theta_ar", &C::pathloss_ar),
      dbl_key("theta_re", &C::pathloss_re),
      dbl_key("chi_ae", &C::rician_ae),
      dbl_key("chi_ar", &C::rician_ar),
      dbl_key("chi_re", &C::rician_re),
      pt_key("en_pos", &C::en_position),
      pt_key("ris_pos", &C::ris_position),
      pt_key("agent_center", &C::agent_center),
      dbl_key("agent_radius", &C::agent_radius),
      dbl_key("mean_scale", &C::mean_scale),
      dbl_key("class_var", &C::class_variance),
      int_key("task_seed", &C::task_seed),
      int_key("codebook_seed", &C::codebook_seed),
      int_key("min_block_bits", &C::min_block_bits),
      int_key("max_block_bits", &C::max_block_bits),
      int_key("correlation_mode", &C::correlation_mode),
      dbl_key("correlation_eps", &C::correlation_eps),
      dbl_key("md_truncation_pct", &C::md_truncation_pct),
      dbl_key("swomp_threshold", &C::swomp_threshold),
      int_key("swomp_max_stages", &C::swomp_max_stages),
      int_key("rounds", &C::rounds),
      int_key("max_outer_iters", &C::max_outer_iters),
      int_key("max_inner_iters", &C::max_inner_iters),
      int_key("entropy_samples", &C::entropy_samples),
  };
  return keys;
}

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Sets one config key from its textual value. Unknown keys throw ConfigError.
inline void set_config_value(SystemConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& k : detail::config_keys()) {
    if (k.name == key) {
      k.set(cfg, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

inline std::string get_config_value(const SystemConfig& cfg, const std::string& key) {
  for (const auto& k : detail::config_keys())
    if (k.name == key) return k.get(cfg);
  throw ConfigError("unknown config key '" + key + "'");
}

/// Parses "key = value" lines ('#' starts a comment) on top of the defaults.
inline SystemConfig parse_config(std::istream& in) {
  SystemConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    set_config_value(cfg, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  return cfg.finalize();
}

inline SystemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

inline void write_config(std::ostream& out, const SystemConfig& cfg) {
  for (const auto& k : detail::config_keys()) out << k.name << " = " << k.get(cfg) << '\n';
}

}  // namespace hrdair
