#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "redris/types.hpp"

namespace redris {

/** @brief Transmission schemes the harness can run on one channel realization. */
enum class Scheme {
  RedrisFull,     // alternating switching-matrix optimization, all ports active
  RedrisPartial,  // full optimization followed by port reduction to np ports
  RedrisTwoPort,  // single-user energy-based two-port selection
  RedrisRandom,   // uniformly random full matching, no optimization
  Reflective,     // conventional reflective surface with per-element phases
};

inline std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::RedrisFull: return "redris_full";
    case Scheme::RedrisPartial: return "redris_partial";
    case Scheme::RedrisTwoPort: return "redris_two_port";
    case Scheme::RedrisRandom: return "redris_random";
    case Scheme::Reflective: return "reflective";
  }
  throw std::logic_error("to_string(Scheme): unreachable");
}

inline Scheme scheme_from_string(const std::string& s) {
  if (s == "redris_full") return Scheme::RedrisFull;
  if (s == "redris_partial") return Scheme::RedrisPartial;
  if (s == "redris_two_port") return Scheme::RedrisTwoPort;
  if (s == "redris_random") return Scheme::RedrisRandom;
  if (s == "reflective") return Scheme::Reflective;
  throw std::invalid_argument("unknown scheme: " + s);
}

enum class LosMode {
  BsRisOnly,       // line-of-sight path only on the BS to surface link
  BsRisAndRisUser, // line-of-sight on surface-user links as well
};

inline std::string to_string(LosMode m) {
  return m == LosMode::BsRisOnly ? "bs_ris_only" : "bs_ris_and_ris_user";
}

inline LosMode los_from_string(const std::string& s) {
  if (s == "bs_ris_only") return LosMode::BsRisOnly;
  if (s == "bs_ris_and_ris_user") return LosMode::BsRisAndRisUser;
  throw std::invalid_argument("unknown los mode: " + s);
}

/**
 * @brief Full description of one simulated experiment.
 *
 * Geometry, propagation constants, CSI quality, scheme list, transmit power
 * sweep and optimizer knobs. Defaults follow the urban macro setup used
 * throughout the experiments: carrier-normalized pathloss of -30 dB at the
 * 1 m reference, exponent 2.5 on surface links and 3.7 on the direct link,
 * -100 dBm noise.
 */
struct ScenarioConfig {
  std::string name = "custom";

  int users = 4;         // M
  int bs_antennas = 16;  // N (1 in the multi-cell model)
  int ports = 64;        // K, even perfect square
  int np = 16;           // active ports after reduction (redris_partial)
  bool multi_cell = false;

  std::vector<double> p_dbm = {10.0, 20.0, 30.0};
  std::vector<Scheme> schemes = {Scheme::RedrisFull, Scheme::RedrisPartial, Scheme::RedrisRandom,
                                 Scheme::Reflective};

  LosMode los = LosMode::BsRisOnly;
  bool direct_link = true;  // false zeroes the BS-user channel (full blockage)
  double kappa = 1.0;       // CSI quality, 1 = perfect

  int q_ris = 10;  // paths on BS-surface links
  int q_su = 2;    // paths on surface-user links
  int q_bu = 2;    // paths on the direct BS-user link
  double eta_ris = 2.5;
  double eta_bu = 3.7;
  double c0_db = -30.0;
  double d0_m = 1.0;
  double sigma2_dbm = -100.0;

  double d_ris_min_m = 500.0;  // BS-surface distance range (degenerate = fixed)
  double d_ris_max_m = 500.0;
  double d_user_min_m = 10.0;  // surface-user distance range
  double d_user_max_m = 50.0;
  double d_bu_m = 500.0;       // BS-user distance, all links

  int trials = 50;
  std::uint64_t seed = 1;

  double gamma0 = 0.0;  // 0 = data-scaled default
  double eps = 1e-4;
  int t_max = 50;

  double noise_var() const { return dbm_to_watt(sigma2_dbm); }
  double c0() const { return db_to_linear(c0_db); }
  bool has_scheme(Scheme s) const { return std::find(schemes.begin(), schemes.end(), s) != schemes.end(); }
};

/**
 * @brief Validates a config; returns one message per violated field, empty if ok.
 */
inline std::vector<std::string> validate_config(const ScenarioConfig& c) {
  std::vector<std::string> errs;
  auto bad = [&](const std::string& m) { errs.push_back(m); };

  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(c.ports))));
  if (c.ports < 4 || c.ports % 2 != 0 || side * side != c.ports)
    bad("ports: must be an even perfect square of at least 4");
  if (c.users < 1) bad("users: must be at least 1");
  if (c.multi_cell) {
    if (c.bs_antennas != 1) bad("bs_antennas: must be 1 in the multi-cell model");
  } else if (c.bs_antennas < 1) {
    bad("bs_antennas: must be at least 1");
  }
  if (c.np < 2 || c.np % 2 != 0 || c.np > c.ports) bad("np: must be even with 2 <= np <= ports");
  if (c.p_dbm.empty()) bad("p_dbm: at least one power level required");
  if (c.schemes.empty()) bad("schemes: at least one scheme required");
  if (c.has_scheme(Scheme::RedrisTwoPort)) {
    if (c.users != 1) bad("schemes: redris_two_port requires users = 1");
    if (c.multi_cell) bad("schemes: redris_two_port is undefined in the multi-cell model");
  }
  if (!(c.kappa > 0.0 && c.kappa <= 1.0)) bad("kappa: must lie in (0, 1]");
  if (c.q_ris < 1) bad("q_ris: must be at least 1");
  if (c.q_su < 1) bad("q_su: must be at least 1");
  if (c.q_bu < 1) bad("q_bu: must be at least 1");
  if (!(c.eta_ris > 0.0)) bad("eta_ris: must be positive");
  if (!(c.eta_bu > 0.0)) bad("eta_bu: must be positive");
  if (!(c.d0_m > 0.0)) bad("d0_m: must be positive");
  if (c.d_ris_min_m < c.d0_m || c.d_ris_max_m < c.d_ris_min_m)
    bad("d_ris range: need d0_m <= d_ris_min_m <= d_ris_max_m");
  if (c.d_user_min_m < c.d0_m || c.d_user_max_m < c.d_user_min_m)
    bad("d_user range: need d0_m <= d_user_min_m <= d_user_max_m");
  if (c.d_bu_m < c.d0_m) bad("d_bu_m: must be at least d0_m");
  if (c.trials < 1) bad("trials: must be at least 1");
  if (c.gamma0 < 0.0) bad("gamma0: must be positive, or 0 for the data-scaled default");
  if (!(c.eps > 0.0)) bad("eps: must be positive");
  if (c.t_max < 0) bad("t_max: must be nonnegative");
  return errs;
}

namespace detail {

inline ScenarioConfig desk_base() {
  ScenarioConfig c;  // defaults already describe the desk-scale single-cell setup
  return c;
}

inline ScenarioConfig large_base() {
  ScenarioConfig c;
  c.ports = 256;
  c.bs_antennas = 32;
  c.np = 20;
  c.trials = 100;
  c.p_dbm = {10.0, 15.0, 20.0, 25.0, 30.0};
  return c;
}

}  // namespace detail

/**
 * @brief Named experiment presets.
 *
 * The *-desk presets are sized to finish in minutes on one core; the *-large
 * presets scale the surface up to 256 ports and 32 BS antennas and are meant
 * for overnight runs.
 */
inline const std::map<std::string, ScenarioConfig>& presets() {
  static const std::map<std::string, ScenarioConfig> table = [] {
    std::map<std::string, ScenarioConfig> t;

    {
      ScenarioConfig c = detail::desk_base();
      c.name = "power-sweep-desk";
      t[c.name] = c;
    }
    {
      ScenarioConfig c = detail::desk_base();
      c.name = "single-user-desk";
      c.users = 1;
      c.schemes = {Scheme::RedrisFull, Scheme::RedrisTwoPort, Scheme::RedrisRandom, Scheme::Reflective};
      t[c.name] = c;
    }
    for (int k : {16, 36, 64}) {
      ScenarioConfig c = detail::desk_base();
      c.name = "ports-desk-k" + std::to_string(k);
      c.ports = k;
      c.np = std::max(2, 2 * (k / 8));  // quarter of the ports, rounded down to even
      c.p_dbm = {30.0};
      t[c.name] = c;
    }
    {
      ScenarioConfig c = detail::desk_base();
      c.name = "los-desk";
      c.los = LosMode::BsRisAndRisUser;
      t[c.name] = c;
    }
    for (double kappa : {0.99, 0.95}) {
      ScenarioConfig c = detail::desk_base();
      std::ostringstream n;
      n << "csi-desk-k" << kappa;
      c.name = n.str();
      c.kappa = kappa;
      c.schemes = {Scheme::RedrisFull, Scheme::RedrisPartial};
      t[c.name] = c;
    }
    {
      ScenarioConfig c = detail::desk_base();
      c.name = "multicell-desk";
      c.multi_cell = true;
      c.users = 8;
      c.bs_antennas = 1;
      c.d_ris_min_m = 100.0;
      c.d_ris_max_m = 500.0;
      t[c.name] = c;
    }
    for (int m : {2, 4, 8, 12}) {
      ScenarioConfig c = detail::desk_base();
      c.name = "cells-desk-m" + std::to_string(m);
      c.multi_cell = true;
      c.users = m;
      c.bs_antennas = 1;
      c.d_ris_min_m = 100.0;
      c.d_ris_max_m = 500.0;
      c.p_dbm = {30.0};
      t[c.name] = c;
    }

    {
      ScenarioConfig c = detail::large_base();
      c.name = "power-sweep-large";
      t[c.name] = c;
    }
    {
      ScenarioConfig c = detail::large_base();
      c.name = "single-user-large";
      c.users = 1;
      c.schemes = {Scheme::RedrisFull, Scheme::RedrisTwoPort, Scheme::RedrisRandom, Scheme::Reflective};
      t[c.name] = c;
    }
    {
      ScenarioConfig c = detail::large_base();
      c.name = "los-large";
      c.los = LosMode::BsRisAndRisUser;
      t[c.name] = c;
    }
    {
      ScenarioConfig c = detail::large_base();
      c.name = "multicell-large";
      c.multi_cell = true;
      c.users = 8;
      c.bs_antennas = 1;
      c.d_ris_min_m = 100.0;
      c.d_ris_max_m = 500.0;
      t[c.name] = c;
    }
    return t;
  }();
  return table;
}

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("expected a boolean, got '" + v + "'");
}

}  // namespace detail

/**
 * @brief Applies one "key = value" assignment to a config.
 *
 * Throws std::invalid_argument naming the key on unknown keys or malformed
 * values. List values (p_dbm, schemes) are comma separated.
 */
inline void apply_setting(ScenarioConfig& c, const std::string& key, const std::string& value) {
  try {
    if (key == "name") c.name = value;
    else if (key == "users") c.users = std::stoi(value);
    else if (key == "bs_antennas") c.bs_antennas = std::stoi(value);
    else if (key == "ports") c.ports = std::stoi(value);
    else if (key == "np") c.np = std::stoi(value);
    else if (key == "multi_cell") c.multi_cell = detail::parse_bool(value);
    else if (key == "p_dbm") {
      c.p_dbm.clear();
      for (const auto& v : detail::split(value, ',')) c.p_dbm.push_back(std::stod(v));
    } else if (key == "schemes") {
      c.schemes.clear();
      for (const auto& v : detail::split(value, ',')) c.schemes.push_back(scheme_from_string(v));
    } else if (key == "los") c.los = los_from_string(value);
    else if (key == "direct_link") c.direct_link = detail::parse_bool(value);
    else if (key == "kappa") c.kappa = std::stod(value);
    else if (key == "q_ris") c.q_ris = std::stoi(value);
    else if (key == "q_su") c.q_su = std::stoi(value);
    else if (key == "q_bu") c.q_bu = std::stoi(value);
    else if (key == "eta_ris") c.eta_ris = std::stod(value);
    else if (key == "eta_bu") c.eta_bu = std::stod(value);
    else if (key == "c0_db") c.c0_db = std::stod(value);
    else if (key == "d0_m") c.d0_m = std::stod(value);
    else if (key == "sigma2_dbm") c.sigma2_dbm = std::stod(value);
    else if (key == "d_ris_min_m") c.d_ris_min_m = std::stod(value);
    else if (key == "d_ris_max_m") c.d_ris_max_m = std::stod(value);
    else if (key == "d_user_min_m") c.d_user_min_m = std::stod(value);
    else if (key == "d_user_max_m") c.d_user_max_m = std::stod(value);
    else if (key == "d_bu_m") c.d_bu_m = std::stod(value);
    else if (key == "trials") c.trials = std::stoi(value);
    else if (key == "seed") c.seed = std::stoull(value);
    else if (key == "gamma0") c.gamma0 = std::stod(value);
    else if (key == "eps") c.eps = std::stod(value);
    else if (key == "t_max") c.t_max = std::stoi(value);
    else throw std::invalid_argument("unknown key");
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(key + ": " + e.what());
  } catch (const std::out_of_range&) {
    throw std::invalid_argument(key + ": value out of range");
  }
}

/**
 * @brief Parses a flat "key = value" config file.
 *
 * Lines starting with # or ; are comments; [section] headers are allowed and
 * ignored. An optional base preset can seed the defaults via "preset = name".
 */
inline ScenarioConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  ScenarioConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[' && t.back() == ']') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string value = detail::trim(t.substr(eq + 1));
    try {
      if (key == "preset") {
        const auto it = presets().find(value);
        if (it == presets().end()) throw std::invalid_argument("unknown preset '" + value + "'");
        c = it->second;
      } else {
        apply_setting(c, key, value);
      }
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return c;
}

}  // namespace redris
