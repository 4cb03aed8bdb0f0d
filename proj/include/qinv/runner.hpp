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

#ifndef QINV_RUNNER_HPP
#define QINV_RUNNER_HPP

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qinv/bbm.hpp"
#include "qinv/config.hpp"
#include "qinv/density.hpp"
#include "qinv/measures.hpp"
#include "qinv/nls.hpp"
#include "qinv/verifier.hpp"

/**
 * \file
 * \brief Runs one configured experiment and writes its artifacts and metadata record.
 */

namespace qinv {

inline constexpr const char* kVersion = "qinv 0.1.0";

/// Seed offset used for calibration data, so it never overlaps an experiment's own samples.
inline constexpr std::uint64_t kCalibrationSeedOffset = 0x9E3779B97F4A7C15ULL;

struct RunOptions {
  unsigned threads = 1;
};

struct RunResult {
  int exit_code = 0;
  std::vector<std::string> artifacts;
  nlohmann::json metadata;
};

/// Raised for failures inside an experiment; the message carries the experiment name.
class ExperimentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir) : dir_{std::move(dir)} {
    std::filesystem::create_directories(dir_);
  }

  std::ofstream open(const std::string& name) {
    std::ofstream os{dir_ / name, std::ios::binary};
    if (!os) {
      throw std::runtime_error("cannot write " + (dir_ / name).string());
    }
    os.precision(17);
    names_.push_back(name);
    return os;
  }

  void json(const std::string& name, const nlohmann::json& j) { open(name) << j.dump(2) << '\n'; }

  [[nodiscard]] const std::vector<std::string>& names() const noexcept { return names_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> names_;
};

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

inline nlohmann::json check_json(const Check& c) {
  return {{"test", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass}};
}

inline std::vector<TestFunction> test_functions_of(const ExperimentConfig& c) {
  std::vector<TestFunction> out;
  for (const auto& name : c.psi) {
    out.push_back(test_functions::by_name(name));
  }
  return out;
}

inline MonteCarloOptions mc_options(const ExperimentConfig& c, const RunOptions& o) {
  return {static_cast<std::size_t>(c.count), c.seed, o.threads, c.z};
}

inline bool write_verdicts(ArtifactWriter& w, const std::vector<VerdictReport>& reports, nlohmann::json& calibrated) {
  nlohmann::json arr = nlohmann::json::array();
  nlohmann::json budgets = nlohmann::json::object();
  bool ok = true;
  for (const auto& r : reports) {
    arr.push_back(r);
    budgets[r.psi] = r.drift_budget;
    ok = ok && r.pass;
  }
  calibrated["drift_budget"] = budgets;
  w.json("verdicts.json", arr);
  return ok;
}

inline bool run_sample(const ExperimentConfig& c, const RunOptions& o, ArtifactWriter& w, nlohmann::json& summary) {
  const auto ens = ensemble_sample(c.gaussian(), c.cutoff(), static_cast<std::size_t>(c.count), c.seed,
                                   ModifiedEnergy::zero(), o.threads);
  auto os = w.open("ensemble.jsonl");
  write_ensemble_jsonl(os, ens);
  std::size_t accepted = 0;
  for (double lw : ens.log_weights) {
    accepted += lw == kRejected ? 0 : 1;
  }
  summary["accepted"] = accepted;
  if (accepted > 0) {
    std::vector<double> ones(ens.size(), 1.0);
    summary["ess"] = self_normalized_mean(ens.log_weights, ones).ess;
  }
  return true;
}

inline bool run_evolve(const ExperimentConfig& c, ArtifactWriter& w, nlohmann::json& summary) {
  const TorusField u0 = sample_gamma(c.gaussian(), c.seed, 0);
  const Trajectory traj = c.model == "bbm" ? integrate_bbm(u0, c.bbm_params(), c.t, c.store_every)
                                           : integrate_nls(u0, c.nls_params(), c.t, c.store_every);
  auto os = w.open("trajectory.csv");
  write_trajectory_csv(os, traj);
  nlohmann::json drift = nlohmann::json::object();
  for (std::size_t i = 0; i < traj.conserved_names.size(); ++i) {
    drift[traj.conserved_names[i]] = traj.max_relative_drift[i];
  }
  summary["max_relative_drift"] = drift;
  summary["steps"] = traj.step == 0.0 ? 0 : static_cast<long long>(std::llround(c.t / traj.step));
  return true;
}

inline bool run_verify_invariance(const ExperimentConfig& c, const RunOptions& o, ArtifactWriter& w,
                                  nlohmann::json& calibrated) {
  if (c.model != "bbm") {
    throw ConfigError("model", "verify-invariance is defined for the BBM Gaussian measure gamma_0");
  }
  const auto reports = invariance_test_gamma0(c.gaussian(), test_functions_of(c), c.t, c.bbm_params(), mc_options(c, o));
  return write_verdicts(w, reports, calibrated);
}

inline bool run_verify_quasi(const ExperimentConfig& c, const RunOptions& o, ArtifactWriter& w,
                             nlohmann::json& calibrated) {
  const auto psis = test_functions_of(c);
  const auto reports =
      c.model == "bbm"
          ? quasi_invariance_test_bbm(c.gaussian(), c.cutoff(), psis, c.t, c.bbm_params(), mc_options(c, o))
          : quasi_invariance_test_nls(c.gaussian(), c.cutoff(), ModifiedEnergy::zero(), psis, c.t, c.nls_params(),
                                      mc_options(c, o));
  return write_verdicts(w, reports, calibrated);
}

template <class Model>
bool run_density_convergence_for(const ExperimentConfig& c, const RunOptions& o, const Model& model,
                                 ArtifactWriter& w, nlohmann::json& summary) {
  const auto count = static_cast<std::size_t>(c.count);
  std::vector<std::vector<ConvergenceRow>> tables(count);
  std::vector<DensityRecord> records(count);
  std::vector<double> cocycle(count);
  parallel_for(count, o.threads, [&](std::size_t i) {
    const TorusField u0 = sample_gamma(c.gaussian(), c.seed, i);
    tables[i] = density_convergence_table(u0, c.t, c.N_list, model);
    records[i] = density_record(u0, c.t, model, i);
    cocycle[i] = density_group_check(u0, c.t / 2.0, c.t / 2.0, model);
  });
  {
    auto os = w.open("density_convergence.csv");
    os << "sample_id,N,log_f,abs_diff\n";
    for (std::size_t i = 0; i < count; ++i) {
      for (const auto& row : tables[i]) {
        os << i << ',' << row.N << ',' << row.log_f << ',' << row.diff << '\n';
      }
    }
  }
  {
    auto os = w.open("density_records.csv");
    write_density_csv(os, records);
  }
  double worst_quad = 0.0;
  double worst_cocycle = 0.0;
  std::size_t inversions = 0;
  for (std::size_t i = 0; i < count; ++i) {
    worst_quad = std::max(worst_quad, records[i].residual());
    worst_cocycle = std::max(worst_cocycle, cocycle[i]);
    std::size_t local = 0;
    for (std::size_t j = 2; j < tables[i].size(); ++j) {
      local += tables[i][j].diff > tables[i][j - 1].diff ? 1 : 0;
    }
    inversions = std::max(inversions, local);
  }
  summary["max_successive_diff_inversions"] = inversions;
  summary["proven_range"] = model.proven_range();
  const std::vector<Check> checks{{"quadrature_vs_endpoint", worst_quad, c.quad_tol, worst_quad <= c.quad_tol},
                                  {"cocycle", worst_cocycle, c.cocycle_tol, worst_cocycle <= c.cocycle_tol}};
  nlohmann::json arr = nlohmann::json::array();
  bool ok = true;
  for (const auto& ch : checks) {
    arr.push_back(check_json(ch));
    ok = ok && ch.pass;
  }
  w.json("verdicts.json", arr);
  return ok;
}

inline bool run_density_convergence(const ExperimentConfig& c, const RunOptions& o, ArtifactWriter& w,
                                    nlohmann::json& summary) {
  if (c.model == "bbm") {
    return run_density_convergence_for(c, o, BbmDensityModel{c.bbm_params(), c.s, c.r}, w, summary);
  }
  return run_density_convergence_for(c, o, NlsDensityModel{c.nls_params(), c.k, c.r, ModifiedEnergy::zero()}, w,
                                     summary);
}

inline bool run_density_lp(const ExperimentConfig& c, const RunOptions& o, ArtifactWriter& w,
                           nlohmann::json& calibrated) {
  const auto ens = ensemble_sample(c.gaussian(), c.cutoff(), static_cast<std::size_t>(c.count), c.seed,
                                   ModifiedEnergy::zero(), o.threads);
  auto os = w.open("density_lp.csv");
  os << "p,t,estimate,log_estimate,se,relative_se,ess,integrand_ess,lp_norm\n";
  for (double p : c.p_list) {
    const LpEstimate e = c.model == "bbm" ? density_lp_estimate(ens, c.t, p, c.bbm_params(), o.threads)
                                          : density_lp_estimate(ens, c.t, p, c.nls_params(), ModifiedEnergy::zero(),
                                                                c.t_window, o.threads);
    os << p << ',' << c.t << ',' << e.estimate << ',' << e.log_estimate << ',' << e.se << ',' << e.relative_se << ',' << e.ess << ','
       << e.integrand_ess << ',' << std::exp(e.log_estimate / p) << '\n';
  }
  if (c.model == "nls") {
    calibrated["t_window"] = c.t_window;
  }
  return true;
}

inline bool run_growth_bounds(const ExperimentConfig& c, const RunOptions& o, ArtifactWriter& w,
                              nlohmann::json& summary, nlohmann::json& calibrated) {
  const auto count = static_cast<std::size_t>(c.count);
  std::vector<GrowthDiagnostics> diags(count);
  std::vector<double> constraints(count, 0.0);
  parallel_for(count, o.threads, [&](std::size_t i) {
    const TorusField u0 = sample_gamma(c.gaussian(), c.seed, i);
    if (c.model == "bbm") {
      const auto traj = integrate_bbm(u0, c.bbm_params(), c.t, c.store_every);
      diags[i] = bbm_growth_diagnostics(traj, c.bbm_params(), c.sigma, c.alpha, c.s, c.r);
    } else {
      const auto traj = integrate_nls(u0, c.nls_params(), c.t, c.store_every);
      diags[i] = nls_growth_diagnostics(traj, c.nls_params(), c.k, ModifiedEnergy::zero(), &constraints[i]);
    }
  });
  {
    auto os = w.open("growth.csv");
    os << "sample_id,series,max_ratio\n";
    for (std::size_t i = 0; i < count; ++i) {
      for (const auto& s : diags[i].series) {
        os << i << ',' << s.name << ',' << s.max_ratio << '\n';
      }
    }
  }
  nlohmann::json maxima = nlohmann::json::object();
  for (const auto& d : diags) {
    for (const auto& s : d.series) {
      const double prev = maxima.contains(s.name) ? maxima[s.name].get<double>() : 0.0;
      maxima[s.name] = std::max(prev, s.max_ratio);
    }
  }
  summary["max_ratio"] = maxima;
  if (c.model == "bbm") {
    std::vector<TorusField> calibration;
    for (std::size_t i = 0; i < static_cast<std::size_t>(c.calibration_count); ++i) {
      calibration.push_back(sample_gamma(c.gaussian(), c.seed + kCalibrationSeedOffset, i));
    }
    const double c_cal = calibrate_duhamel_constant(calibration, c.bbm_params(), c.alpha, 0.5, 0.8, c.duhamel_subintervals);
    calibrated["c_cal"] = c_cal;
    std::vector<double> factors(count);
    std::vector<double> agreement(count);
    parallel_for(count, o.threads, [&](std::size_t i) {
      const TorusField u0 = sample_gamma(c.gaussian(), c.seed, i);
      const double T = c_cal / (1.0 + besov_proxy_norm(u0, c.alpha));
      const auto d = duhamel_local_solve(u0, c.bbm_params(), T, 1e-12, 200, c.alpha, c.duhamel_subintervals);
      factors[i] = d.contraction_factor;
      agreement[i] = sobolev_norm(d.state - flow_bbm(u0, c.bbm_params(), T).state, c.s);
    });
    auto os = w.open("duhamel.csv");
    os << "sample_id,contraction_factor,hs_distance_to_integrator\n";
    for (std::size_t i = 0; i < count; ++i) {
      os << i << ',' << factors[i] << ',' << agreement[i] << '\n';
    }
  }
  return true;
}

inline bool run_tails(const ExperimentConfig& c, const RunOptions& o, ArtifactWriter& w, nlohmann::json& summary) {
  if (c.model != "bbm") {
    throw ConfigError("model", "tails are defined for the BBM measure rho_s");
  }
  const auto ens = ensemble_sample(c.gaussian(), c.cutoff(), static_cast<std::size_t>(c.count), c.seed,
                                   ModifiedEnergy::zero(), o.threads);
  const TailCurve curve = tail_survival(ens, c.varsigma, c.kappa, c.N, c.thresholds);
  auto os = w.open("tails.csv");
  os << "t,survival,se\n";
  for (const auto& p : curve.points) {
    os << p.t << ',' << p.survival << ',' << p.se << '\n';
  }
  summary["a"] = curve.a;
  summary["b"] = curve.b;
  try {
    summary["log_survival_slope"] = curve.log_survival_slope();
  } catch (const std::domain_error&) {
    summary["log_survival_slope"] = nullptr;
  }
  return true;
}

inline bool run_recurrence(const ExperimentConfig& c, ArtifactWriter& w, nlohmann::json& summary) {
  if (c.model != "bbm") {
    throw ConfigError("model", "the recurrence experiment is defined for BBM");
  }
  const TorusField u0 = sample_gamma(c.gaussian(), c.seed, 0);
  const auto series = recurrence_experiment(u0, c.alpha, c.bbm_params(), c.horizon, c.probe_stride, c.exclusion);
  auto os = w.open("recurrence.csv");
  os << "t,distance,running_min\n";
  double last = std::numeric_limits<double>::quiet_NaN();
  for (const auto& p : series) {
    os << p.t << ',' << p.distance << ',';
    if (std::isnan(p.running_min)) {
      os << "nan";
    } else {
      os << p.running_min;
      last = p.running_min;
    }
    os << '\n';
  }
  summary["final_running_min"] = std::isnan(last) ? nlohmann::json(nullptr) : nlohmann::json(last);
  return true;
}

}  // namespace detail

/// Executes the configured experiment. Returns exit code 0 iff every asserted verdict passes.
inline RunResult run(const ExperimentConfig& c, const RunOptions& opts = {}) {
  c.validate();
  detail::ArtifactWriter w{c.out_dir};
  nlohmann::json summary = nlohmann::json::object();
  nlohmann::json calibrated = nlohmann::json::object();
  bool ok = true;
  try {
    if (c.experiment == "sample") {
      ok = detail::run_sample(c, opts, w, summary);
    } else if (c.experiment == "evolve") {
      ok = detail::run_evolve(c, w, summary);
    } else if (c.experiment == "verify-invariance") {
      ok = detail::run_verify_invariance(c, opts, w, calibrated);
    } else if (c.experiment == "verify-quasi") {
      ok = detail::run_verify_quasi(c, opts, w, calibrated);
    } else if (c.experiment == "density-convergence") {
      ok = detail::run_density_convergence(c, opts, w, summary);
    } else if (c.experiment == "density-lp") {
      ok = detail::run_density_lp(c, opts, w, calibrated);
    } else if (c.experiment == "growth-bounds") {
      ok = detail::run_growth_bounds(c, opts, w, summary, calibrated);
    } else if (c.experiment == "tails") {
      ok = detail::run_tails(c, opts, w, summary);
    } else {
      ok = detail::run_recurrence(c, w, summary);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ExperimentError("experiment '" + c.experiment + "' failed: " + e.what());
  }
  RunResult result;
  result.exit_code = ok ? 0 : 1;
  result.metadata = {{"version", kVersion},
                     {"experiment", c.experiment},
                     {"seed", c.seed},
                     {"config", c.to_key_values()},
                     {"config_hash", config_hash(c)},
                     {"defaulted_keys", c.defaulted},
                     {"calibrated", calibrated},
                     {"summary", summary},
                     {"pass", ok}};
  auto artifacts = w.names();
  artifacts.push_back("metadata.json");
  result.metadata["artifacts"] = artifacts;
  w.json("metadata.json", result.metadata);
  result.artifacts = w.names();
  return result;
}

}  // namespace qinv

#endif
