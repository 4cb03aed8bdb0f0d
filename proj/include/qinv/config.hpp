// Copyright 2026 The qinv Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QINV_CONFIG_HPP
#define QINV_CONFIG_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qinv/bbm.hpp"
#include "qinv/dynamics.hpp"
#include "qinv/measures.hpp"
#include "qinv/nls.hpp"

/**
 * \file
 * \brief Flat experiment configuration: "key = value" text or a flat JSON object.
 *
 * Text format: one `key = value` per line, `#` starts a comment, lists are comma separated.
 * Only `model` and `experiment` are required; every other key has a documented default.
 */

namespace qinv {

class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : std::invalid_argument("config field '" + field + "': " + message), field_{field} {}
  [[nodiscard]] const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"sample",      "evolve",   "verify-invariance",
                                              "verify-quasi", "density-convergence", "density-lp",
                                              "growth-bounds", "tails",   "recurrence"};
  return names;
}

struct ExperimentConfig {
  std::string model = "bbm";
  std::string experiment = "sample";
  double beta = 1.5;
  double s = 2.0;
  int k = 2;
  double r = 3.0;
  double R = 3.0;
  int N = 8;
  int n_samp = 32;
  double dt = 1e-3;
  std::string integrator = "rk4";
  double t = 0.5;
  std::int64_t count = 1000;
  std::uint64_t seed = 1;
  std::string constraint = "projected";
  std::vector<std::string> psi{"one", "exp_mass_P1", "exp_mass_P2", "cos_re_c1", "min1_mass_P2"};
  double z = 3.0;
  int store_every = 1;
  int duhamel_subintervals = 64;
  int calibration_count = 20;
  double alpha = 0.2;
  double sigma = 1.0;
  double varsigma = 0.5;
  double kappa = 1.0;
  std::vector<double> thresholds{1.0, 1.5, 2.0, 2.5, 3.0};
  std::vector<int> N_list{8, 16, 32, 64};
  std::vector<double> p_list{2.0, 4.0};
  double t_window = 0.25;
  double horizon = 200.0;
  double probe_stride = 0.1;
  double exclusion = 1.0;
  double quad_tol = 1e-6;
  double cocycle_tol = 1e-9;
  std::string out_dir = "out";
  /// Keys that were not given explicitly and took their default.
  std::vector<std::string> defaulted;

  bool operator==(const ExperimentConfig& other) const {
    return to_key_values() == other.to_key_values();
  }

  /// Canonical flat key/value view (excludes `defaulted`).
  [[nodiscard]] nlohmann::json to_key_values() const {
    return {{"model", model},
            {"experiment", experiment},
            {"beta", beta},
            {"s", s},
            {"k", k},
            {"r", r},
            {"R", detail::extended_real(R)},
            {"N", N},
            {"n_samp", n_samp},
            {"dt", dt},
            {"integrator", integrator},
            {"t", t},
            {"count", count},
            {"seed", seed},
            {"constraint", constraint},
            {"psi", psi},
            {"z", z},
            {"store_every", store_every},
            {"duhamel_subintervals", duhamel_subintervals},
            {"calibration_count", calibration_count},
            {"alpha", alpha},
            {"sigma", sigma},
            {"varsigma", varsigma},
            {"kappa", kappa},
            {"thresholds", thresholds},
            {"N_list", N_list},
            {"p_list", p_list},
            {"t_window", t_window},
            {"horizon", horizon},
            {"probe_stride", probe_stride},
            {"exclusion", exclusion},
            {"quad_tol", quad_tol},
            {"cocycle_tol", cocycle_tol},
            {"out_dir", out_dir}};
  }

  [[nodiscard]] Model model_kind() const { return model_from_string(model); }

  [[nodiscard]] GaussianSpec gaussian() const {
    return {model_kind(), experiment == "verify-invariance" ? 0.0 : s, k, beta, n_samp};
  }
  [[nodiscard]] CutoffSpec cutoff() const { return {r, R, N, constraint == "full_field"}; }
  [[nodiscard]] BbmParams bbm_params() const {
    return {beta, N, dt, integrator_from_string(integrator), true};
  }
  [[nodiscard]] NlsParams nls_params() const { return {N, dt, integrator_from_string(integrator), k, true}; }

  void validate() const {
    auto require = [](bool ok, const std::string& field, const std::string& msg) {
      if (!ok) {
        throw ConfigError(field, msg);
      }
    };
    require(model == "bbm" || model == "nls", "model", "must be 'bbm' or 'nls'");
    const auto& names = experiment_names();
    require(std::find(names.begin(), names.end(), experiment) != names.end(), "experiment",
            "unknown experiment '" + experiment + "'");
    require(beta > 1.0, "beta", "must be > 1");
    require(s >= 0.0, "s", "must be >= 0");
    require(k >= 2, "k", "must be >= 2");
    require(r > 0.0, "r", "must be > 0");
    require(model != "bbm" || r > 2.0 || experiment == "verify-invariance" || experiment == "recurrence" ||
                experiment == "evolve",
            "r", "must be > 2 for the BBM cut-off measure");
    require(R > 0.0, "R", "must be > 0");
    require(N >= 0, "N", "must be >= 0");
    require(n_samp >= N, "n_samp", "must be >= N");
    require(dt > 0.0, "dt", "must be > 0");
    require(integrator == "rk4" || integrator == "implicit_midpoint" || integrator == "midpoint4", "integrator",
            "must be 'rk4', 'implicit_midpoint' or 'midpoint4'");
    require(std::isfinite(t), "t", "must be finite");
    require(count >= 1, "count", "must be >= 1");
    require(constraint == "projected" || constraint == "full_field", "constraint",
            "must be 'projected' or 'full_field'");
    require(!psi.empty(), "psi", "must list at least one test function");
    require(z > 0.0, "z", "must be > 0");
    require(store_every >= 1, "store_every", "must be >= 1");
    require(duhamel_subintervals >= 1, "duhamel_subintervals", "must be >= 1");
    require(calibration_count >= 1, "calibration_count", "must be >= 1");
    require(alpha > 0.0, "alpha", "must be > 0");
    require(kappa > 0.0, "kappa", "must be > 0");
    require(std::is_sorted(thresholds.begin(), thresholds.end()), "thresholds", "must be increasing");
    require(!N_list.empty(), "N_list", "must not be empty");
    for (int n : N_list) {
      require(n >= 0 && (experiment != "density-convergence" || n <= n_samp), "N_list",
              "entries must lie in [0, n_samp]");
    }
    for (double p : p_list) {
      require(p >= 1.0, "p_list", "entries must be >= 1");
    }
    require(t_window > 0.0, "t_window", "must be > 0");
    require(horizon >= 0.0, "horizon", "must be >= 0");
    require(probe_stride > 0.0, "probe_stride", "must be > 0");
    require(quad_tol > 0.0, "quad_tol", "must be > 0");
    require(cocycle_tol > 0.0, "cocycle_tol", "must be > 0");
    require(!out_dir.empty(), "out_dir", "must not be empty");
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is{s};
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) {
      out.push_back(item);
    }
  }
  return out;
}

inline double parse_real(const std::string& field, const std::string& v) {
  if (v == "inf" || v == "+inf") {
    return std::numeric_limits<double>::infinity();
  }
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) {
      throw std::invalid_argument(v);
    }
    return x;
  } catch (const std::exception&) {
    throw ConfigError(field, "expected a number, got '" + v + "'");
  }
}

inline long long parse_integer(const std::string& field, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used != v.size()) {
      throw std::invalid_argument(v);
    }
    return x;
  } catch (const std::exception&) {
    throw ConfigError(field, "expected an integer, got '" + v + "'");
  }
}

inline std::uint64_t parse_unsigned(const std::string& field, const std::string& v) {
  try {
    std::size_t used = 0;
    if (v.empty() || v.front() == '-') {
      throw std::invalid_argument(v);
    }
    const std::uint64_t x = std::stoull(v, &used);
    if (used != v.size()) {
      throw std::invalid_argument(v);
    }
    return x;
  } catch (const std::exception&) {
    throw ConfigError(field, "expected a non-negative integer, got '" + v + "'");
  }
}

/// Converts a text value into the JSON type expected by `field` in the canonical view.
inline nlohmann::json text_value(const std::string& field, const nlohmann::json& like, const std::string& v) {
  if (field == "R") {
    return extended_real(parse_real(field, v));
  }
  if (like.is_string()) {
    return v;
  }
  if (like.is_number_unsigned()) {
    return parse_unsigned(field, v);
  }
  if (like.is_number_integer()) {
    return parse_integer(field, v);
  }
  if (like.is_number()) {
    return parse_real(field, v);
  }
  if (like.is_array()) {
    nlohmann::json arr = nlohmann::json::array();
    const bool ints = field == "N_list";
    const bool strings = field == "psi";
    for (const auto& item : split_list(v)) {
      if (strings) {
        arr.push_back(item);
      } else if (ints) {
        arr.push_back(parse_integer(field, item));
      } else {
        arr.push_back(parse_real(field, item));
      }
    }
    return arr;
  }
  throw ConfigError(field, "unsupported value");
}

template <class T>
void take(const nlohmann::json& kv, const std::string& key, T& target) {
  try {
    target = kv.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(key, "has the wrong type");
  }
}

/// Builds a config from a flat key/value object; unknown keys and missing required keys are errors.
inline ExperimentConfig from_key_values(const nlohmann::json& given) {
  if (!given.is_object()) {
    throw ConfigError("<root>", "expected a flat object of key/value pairs");
  }
  ExperimentConfig c;
  const nlohmann::json defaults = c.to_key_values();
  for (const auto& [key, value] : given.items()) {
    if (!defaults.contains(key)) {
      throw ConfigError(key, "unknown key");
    }
    if (value.is_object()) {
      throw ConfigError(key, "nested values are not supported");
    }
  }
  for (const char* required : {"model", "experiment"}) {
    if (!given.contains(required)) {
      throw ConfigError(required, "missing required key");
    }
  }
  nlohmann::json kv = defaults;
  const std::string model = given.at("model").is_string() ? given.at("model").get<std::string>() : "";
  if (model == "nls") {
    kv["integrator"] = "implicit_midpoint";
    kv["R"] = 10.0;
    kv["t"] = 0.25;
  }
  for (const auto& [key, value] : given.items()) {
    kv[key] = value;
  }
  for (const auto& [key, value] : defaults.items()) {
    if (!given.contains(key)) {
      c.defaulted.push_back(key);
    }
  }
  take(kv, "model", c.model);
  take(kv, "experiment", c.experiment);
  take(kv, "beta", c.beta);
  take(kv, "s", c.s);
  take(kv, "k", c.k);
  take(kv, "r", c.r);
  if (kv.at("R").is_string()) {
    c.R = extended_real(kv.at("R"));
  } else {
    take(kv, "R", c.R);
  }
  take(kv, "N", c.N);
  take(kv, "n_samp", c.n_samp);
  take(kv, "dt", c.dt);
  take(kv, "integrator", c.integrator);
  take(kv, "t", c.t);
  take(kv, "count", c.count);
  take(kv, "seed", c.seed);
  take(kv, "constraint", c.constraint);
  take(kv, "psi", c.psi);
  take(kv, "z", c.z);
  take(kv, "store_every", c.store_every);
  take(kv, "duhamel_subintervals", c.duhamel_subintervals);
  take(kv, "calibration_count", c.calibration_count);
  take(kv, "alpha", c.alpha);
  take(kv, "sigma", c.sigma);
  take(kv, "varsigma", c.varsigma);
  take(kv, "kappa", c.kappa);
  take(kv, "thresholds", c.thresholds);
  take(kv, "N_list", c.N_list);
  take(kv, "p_list", c.p_list);
  take(kv, "t_window", c.t_window);
  take(kv, "horizon", c.horizon);
  take(kv, "probe_stride", c.probe_stride);
  take(kv, "exclusion", c.exclusion);
  take(kv, "quad_tol", c.quad_tol);
  take(kv, "cocycle_tol", c.cocycle_tol);
  take(kv, "out_dir", c.out_dir);
  c.validate();
  return c;
}

}  // namespace detail

/// Parses either a flat JSON object (text starting with '{') or the "key = value" format.
inline ExperimentConfig parse_config(const std::string& text) {
  const std::string body = detail::trim(text);
  if (!body.empty() && body.front() == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("<root>", std::string{"invalid JSON: "} + e.what());
    }
    return detail::from_key_values(j);
  }
  const nlohmann::json like = ExperimentConfig{}.to_key_values();
  nlohmann::json given = nlohmann::json::object();
  std::istringstream is{text};
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line.resize(hash);
    }
    line = detail::trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("<line " + std::to_string(line_no) + ">", "expected 'key = value'");
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (!like.contains(key)) {
      throw ConfigError(key, "unknown key");
    }
    if (given.contains(key)) {
      throw ConfigError(key, "given twice");
    }
    given[key] = detail::text_value(key, like.at(key), value);
  }
  return detail::from_key_values(given);
}

/// Canonical JSON serialization (sorted keys, shortest round-trip doubles).
inline std::string serialize_config(const ExperimentConfig& c) { return c.to_key_values().dump(2); }

/// "key = value" serialization; parse_config(serialize_config_text(c)) == c.
inline std::string serialize_config_text(const ExperimentConfig& c) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  const nlohmann::json kv = c.to_key_values();
  for (const auto& [key, value] : kv.items()) {
    os << key << " = ";
    if (value.is_array()) {
      bool first = true;
      for (const auto& item : value) {
        os << (first ? "" : ", ");
        first = false;
        if (item.is_string()) {
          os << item.get<std::string>();
        } else {
          os << item.dump();
        }
      }
    } else if (value.is_string()) {
      os << value.get<std::string>();
    } else {
      os << value.dump();
    }
    os << '\n';
  }
  return os.str();
}

/// 64-bit FNV-1a of the canonical serialization, as 16 hex digits.
inline std::string config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : c.to_key_values().dump()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace qinv

#endif
